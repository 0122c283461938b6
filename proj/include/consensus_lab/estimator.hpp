#pragma once

#include <Eigen/Dense>

#include <vector>

namespace consensus_lab {

/// Fixed basis phi of a linear-in-parameters approximator.
struct BasisSpec {
  enum class Kind {
    /// exp(-||x - c_j||^2 / (2 width^2)) over the agent state.
    kGaussianState,
    /// The same Gaussian bumps on the time axis.
    kGaussianTime,
    /// [1, sin(w_1 t), cos(w_1 t), sin(w_2 t), cos(w_2 t), ...].
    kFourierTime,
  };

  Kind kind = Kind::kGaussianState;
  std::vector<Eigen::VectorXd> centers;
  double width = 1.0;
  std::vector<double> frequencies;

  /// Number of basis functions p.
  Eigen::Index count() const;
  /// Dimension of the input vector basis_eval expects.
  Eigen::Index input_dimension() const;
  bool uses_time() const { return kind != Kind::kGaussianState; }

  /// Uniform tensor grid of centers in the box [lower, upper], `counts`
  /// centers per axis. A single center on an axis sits at the midpoint.
  static BasisSpec gaussian_grid(const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper,
                                 const std::vector<int>& counts, double width);
  static BasisSpec gaussian_time(const std::vector<double>& centers, double width);
  static BasisSpec fourier_time(const std::vector<double>& frequencies);
};

/// Throws DimensionMismatch when the input does not match the centers.
Eigen::VectorXd basis_eval(const BasisSpec& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& input);

/// Evaluates on the state or on t, whichever the basis kind consumes.
Eigen::VectorXd basis_eval(const BasisSpec& basis,
                           const Eigen::Ref<const Eigen::VectorXd>& state, double t);

/// Uniform bound on ||phi||: sqrt(p) for Gaussian kinds, and
/// sqrt(1 + #frequencies) for the Fourier basis.
double basis_bound(const BasisSpec& basis);

/// theta^T phi(x) with adaptive weights theta, gain F and damping kappa.
struct LipEstimator {
  Eigen::VectorXd theta;
  BasisSpec basis;
  Eigen::MatrixXd gain;
  double sigma = 0.05;

  /// Zero weights and gain = gain_scale * I.
  static LipEstimator zero(BasisSpec basis, double gain_scale, double sigma);

  /// Throws ValidationError unless gain is symmetric positive definite,
  /// sigma > 0 and theta is finite with the basis size.
  void validate() const;
};

double estimate(const LipEstimator& est, const Eigen::Ref<const Eigen::VectorXd>& phi);

/// -F [phi r p (d + b) + kappa theta]. In the raw overloads below
/// `coupling` stands for the scalar r_i p_i (d_i + b_i^0).
Eigen::VectorXd tune_agent(const LipEstimator& est,
                           const Eigen::Ref<const Eigen::VectorXd>& phi, double r_i,
                           double p_i, double pin_degree);

/// +F [phi r p (d + b) - kappa theta]. The leader-model weights enter the
/// control law with a plus sign, hence the flipped coupling term.
Eigen::VectorXd tune_leader(const LipEstimator& est,
                            const Eigen::Ref<const Eigen::VectorXd>& phi, double r_i,
                            double p_i, double pin_degree);

/// Raw forms of the laws on a bare weight vector.
Eigen::VectorXd tune_agent(const Eigen::Ref<const Eigen::MatrixXd>& gain, double sigma,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const Eigen::Ref<const Eigen::VectorXd>& phi, double coupling);
Eigen::VectorXd tune_leader(const Eigen::Ref<const Eigen::MatrixXd>& gain, double sigma,
                            const Eigen::Ref<const Eigen::VectorXd>& theta,
                            const Eigen::Ref<const Eigen::VectorXd>& phi, double coupling);

/// Same law as tune_agent, applied to the disturbance estimator.
Eigen::VectorXd tune_disturbance(const LipEstimator& est,
                                 const Eigen::Ref<const Eigen::VectorXd>& phi, double r_i,
                                 double p_i, double pin_degree);

}  // namespace consensus_lab
