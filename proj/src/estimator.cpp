#include "consensus_lab/estimator.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

#include "consensus_lab/errors.hpp"

namespace consensus_lab {

Eigen::Index BasisSpec::count() const {
  if (kind == Kind::kFourierTime) {
    return 1 + 2 * static_cast<Eigen::Index>(frequencies.size());
  }
  return static_cast<Eigen::Index>(centers.size());
}

Eigen::Index BasisSpec::input_dimension() const {
  if (kind != Kind::kGaussianState) return 1;
  return centers.empty() ? 0 : centers.front().size();
}

BasisSpec BasisSpec::gaussian_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                   const std::vector<int>& counts, double width) {
  const Eigen::Index dim = lower.size();
  if (upper.size() != dim || static_cast<Eigen::Index>(counts.size()) != dim) {
    throw DimensionMismatch("gaussian_grid: lower, upper and counts must agree in length");
  }
  BasisSpec b;
  b.kind = Kind::kGaussianState;
  b.width = width;
  std::vector<int> index(static_cast<size_t>(dim), 0);
  Eigen::Index total = 1;
  for (int c : counts) {
    if (c < 1) throw ValidationError("", "gaussian_grid: counts must be >= 1");
    total *= c;
  }
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::VectorXd c(dim);
    Eigen::Index rem = k;
    // First axis varies slowest.
    for (Eigen::Index d = dim - 1; d >= 0; --d) {
      const int n = counts[static_cast<size_t>(d)];
      const Eigen::Index idx = rem % n;
      rem /= n;
      c(d) = n == 1 ? 0.5 * (lower(d) + upper(d))
                    : lower(d) + (upper(d) - lower(d)) * static_cast<double>(idx) / (n - 1);
    }
    b.centers.push_back(std::move(c));
  }
  return b;
}

BasisSpec BasisSpec::gaussian_time(const std::vector<double>& centers, double width) {
  BasisSpec b;
  b.kind = Kind::kGaussianTime;
  b.width = width;
  for (double c : centers) b.centers.push_back(Eigen::VectorXd::Constant(1, c));
  return b;
}

BasisSpec BasisSpec::fourier_time(const std::vector<double>& frequencies) {
  BasisSpec b;
  b.kind = Kind::kFourierTime;
  b.frequencies = frequencies;
  return b;
}

Eigen::VectorXd basis_eval(const BasisSpec& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (input.size() != basis.input_dimension()) {
    throw DimensionMismatch("basis_eval: input has dimension " +
                            std::to_string(input.size()) + ", basis expects " +
                            std::to_string(basis.input_dimension()));
  }
  const Eigen::Index p = basis.count();
  Eigen::VectorXd phi(p);
  if (basis.kind == BasisSpec::Kind::kFourierTime) {
    const double t = input(0);
    phi(0) = 1.0;
    for (size_t j = 0; j < basis.frequencies.size(); ++j) {
      const double w = basis.frequencies[j];
      phi(static_cast<Eigen::Index>(1 + 2 * j)) = std::sin(w * t);
      phi(static_cast<Eigen::Index>(2 + 2 * j)) = std::cos(w * t);
    }
    return phi;
  }
  const double denom = 2.0 * basis.width * basis.width;
  for (Eigen::Index j = 0; j < p; ++j) {
    phi(j) = std::exp(-(input - basis.centers[static_cast<size_t>(j)]).squaredNorm() / denom);
  }
  return phi;
}

Eigen::VectorXd basis_eval(const BasisSpec& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& state, double t) {
  if (basis.uses_time()) return basis_eval(basis, Eigen::VectorXd::Constant(1, t));
  return basis_eval(basis, state);
}

double basis_bound(const BasisSpec& basis) {
  if (basis.kind == BasisSpec::Kind::kFourierTime) {
    return std::sqrt(1.0 + static_cast<double>(basis.frequencies.size()));
  }
  return std::sqrt(static_cast<double>(basis.count()));
}

LipEstimator LipEstimator::zero(BasisSpec basis, double gain_scale, double sigma) {
  LipEstimator e;
  const Eigen::Index p = basis.count();
  e.theta = Eigen::VectorXd::Zero(p);
  e.gain = gain_scale * Eigen::MatrixXd::Identity(p, p);
  e.basis = std::move(basis);
  e.sigma = sigma;
  return e;
}

void LipEstimator::validate() const {
  const Eigen::Index p = basis.count();
  if (p < 1) throw ValidationError("", "estimator basis must have at least one function");
  if (basis.kind != BasisSpec::Kind::kFourierTime && !(basis.width > 0.0)) {
    throw ValidationError("", "basis width must be positive");
  }
  if (theta.size() != p) throw DimensionMismatch("estimator weights do not match basis size");
  if (!theta.allFinite()) throw ValidationError("", "estimator weights must be finite");
  if (gain.rows() != p || gain.cols() != p) {
    throw DimensionMismatch("tuning gain must be p x p");
  }
  if (!gain.isApprox(gain.transpose(), 1e-12)) {
    throw ValidationError("", "tuning gain must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gain);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("", "tuning gain must be positive definite");
  }
  if (!(sigma > 0.0)) throw ValidationError("", "damping kappa must be positive");
}

double estimate(const LipEstimator& est, const Eigen::Ref<const Eigen::VectorXd>& phi) {
  return est.theta.dot(phi);
}

Eigen::VectorXd tune_agent(const Eigen::Ref<const Eigen::MatrixXd>& gain, double sigma,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const Eigen::Ref<const Eigen::VectorXd>& phi, double coupling) {
  return -gain * (phi * coupling + sigma * theta);
}

Eigen::VectorXd tune_leader(const Eigen::Ref<const Eigen::MatrixXd>& gain, double sigma,
                            const Eigen::Ref<const Eigen::VectorXd>& theta,
                            const Eigen::Ref<const Eigen::VectorXd>& phi, double coupling) {
  return gain * (phi * coupling - sigma * theta);
}

Eigen::VectorXd tune_agent(const LipEstimator& est,
                           const Eigen::Ref<const Eigen::VectorXd>& phi, double r_i,
                           double p_i, double pin_degree) {
  return tune_agent(est.gain, est.sigma, est.theta, phi, r_i * p_i * pin_degree);
}

Eigen::VectorXd tune_leader(const LipEstimator& est,
                            const Eigen::Ref<const Eigen::VectorXd>& phi, double r_i,
                            double p_i, double pin_degree) {
  return tune_leader(est.gain, est.sigma, est.theta, phi, r_i * p_i * pin_degree);
}

Eigen::VectorXd tune_disturbance(const LipEstimator& est,
                                 const Eigen::Ref<const Eigen::VectorXd>& phi, double r_i,
                                 double p_i, double pin_degree) {
  return tune_agent(est, phi, r_i, p_i, pin_degree);
}

}  // namespace consensus_lab
