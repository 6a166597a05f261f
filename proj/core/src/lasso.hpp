#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hwml::detail {

// Lasso on standardized columns:
//   min_b (1/2n) ||yc - Z b||^2 + lambda ||b||_1
// where Z are the centred, unit-variance columns of X and yc = y - mean(y).
// Zero-variance columns are left out (their coefficient stays 0).
class LassoProblem {
 public:
  LassoProblem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

  Eigen::Index columns() const noexcept { return gram_.cols(); }
  // Smallest lambda at which every coefficient is zero.
  double lambda_max() const noexcept;
  double target_scale() const noexcept { return y_scale_; }

  // Coordinate descent from the given start, then an exact re-solve on the
  // active set. `beta` is in the standardized parameterisation.
  void solve(double lambda, Eigen::VectorXd& beta) const;

  // Solutions at each of `lambdas` (descending) along the exact piecewise
  // linear path, refined by solve() wherever the optimality conditions
  // are not met to tolerance.
  std::vector<Eigen::VectorXd> path(const std::vector<double>& lambdas) const;

  // Largest violation of the optimality conditions at `beta`.
  double kkt_violation(const Eigen::VectorXd& beta, double lambda) const;

  // Converts standardized coefficients to the original column scale.
  void to_raw(const Eigen::VectorXd& beta, Eigen::VectorXd& coefficients, double& intercept) const;

 private:
  bool polish(double lambda, Eigen::VectorXd& beta) const;
  std::vector<Eigen::VectorXd> homotopy(const std::vector<double>& lambdas) const;

  Eigen::MatrixXd z_;
  Eigen::MatrixXd gram_;       // Z^T Z / n
  Eigen::VectorXd corr_;       // Z^T yc / n
  Eigen::VectorXd yc_;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
  std::vector<bool> usable_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
};

}  // namespace hwml::detail
