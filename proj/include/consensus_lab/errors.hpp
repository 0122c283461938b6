#pragma once

#include <stdexcept>
#include <string>

namespace consensus_lab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The pinned Laplacian nu1*L + nu2*B is rank deficient (leader unreachable).
class SingularPinnedLaplacian : public Error {
 public:
  using Error::Error;
};

/// q has a non-positive entry or Q is not positive definite.
class NonPositiveQ : public Error {
 public:
  using Error::Error;
};

class NonFiniteDrift : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotHurwitz : public Error {
 public:
  using Error::Error;
};

/// Agent with d_i + b_i^0 = 0: it hears neither neighbours nor the leader.
class IsolatedAgent : public Error {
 public:
  using Error::Error;
};

class EmptyTrace : public Error {
 public:
  using Error::Error;
};

/// Invalid input data (scenario fields, topology invariants, expressions).
/// `path` is a JSON-pointer style location when one is known.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  /// Same path, message prefixed with a source location such as "file:12".
  static ValidationError located(const std::string& where, const ValidationError& inner) {
    return ValidationError(inner.path_, where + ": " + inner.what(), Raw{});
  }

  const std::string& path() const { return path_; }

 private:
  struct Raw {};
  ValidationError(std::string path, const std::string& text, Raw)
      : Error(text), path_(std::move(path)) {}

  std::string path_;
};

}  // namespace consensus_lab
