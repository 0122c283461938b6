#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>

namespace consensus_lab {

/// Compiled scalar expression of (state, t, m).
///
/// Grammar: numbers, + - * / ^ (right associative), parentheses, the
/// functions sin cos tan exp log sqrt abs, and the names
///   s, v      first and second state channel
///   xK        K-th state channel (1-based)
///   t         time
///   m         model mass
///   g         9.81
///   pi
/// Parse errors throw ValidationError with the character offset.
class Expression {
 public:
  struct Node;

  Expression() = default;
  static Expression parse(const std::string& text);

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& state, double t,
                  double mass) const;

  /// Highest state channel referenced (0 when none).
  int max_channel() const { return max_channel_; }
  bool uses_time() const { return uses_time_; }
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  int max_channel_ = 0;
  bool uses_time_ = false;
};

}  // namespace consensus_lab
