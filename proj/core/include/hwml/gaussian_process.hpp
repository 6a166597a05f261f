#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace hwml {

struct GpHyperparameters {
  std::vector<double> length_scales;  // one per input dimension (ARD)
  double signal_variance = 1.0;
  double noise_variance = 0.0;
  double prior_mean = 0.0;
};

struct GpObservation {
  std::vector<double> x;
  double y = 0.0;
};

// Matern-5/2 with per-dimension length scales:
//   k(r) = sf2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r),  r^2 = sum ((a_i - b_i) / l_i)^2
double matern52(std::span<const double> a, std::span<const double> b, std::span<const double> length_scales,
                double signal_variance);

// Immutable GP regression state: hyper-parameters, observations and the
// Cholesky factor of K + noise I, rebuilt whenever the state changes.
class GaussianProcess {
 public:
  struct Posterior {
    double mean = 0.0;
    double variance = 0.0;  // latent f, excludes observation noise
  };

  GaussianProcess(GpHyperparameters hyper, std::vector<GpObservation> observations = {});

  Posterior posterior(std::span<const double> x) const;
  double log_marginal_likelihood() const;

  // Conditions on one more observation with the hyper-parameters unchanged.
  GaussianProcess with_observation(GpObservation observation) const;

  const GpHyperparameters& hyperparameters() const noexcept { return hyper_; }
  const std::vector<GpObservation>& observations() const noexcept { return observations_; }
  // Diagonal jitter added on top of the noise variance (0 when none was needed).
  double jitter() const noexcept { return jitter_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  void factorize();

  GpHyperparameters hyper_;
  std::vector<GpObservation> observations_;
  Eigen::MatrixXd lower_;  // L with L L^T = K + (noise + jitter) I
  Eigen::VectorXd alpha_;  // (K + noise I)^-1 (y - m)
  double log_det_ = 0.0;
  double jitter_ = 0.0;
  std::vector<std::string> warnings_;
};

// Log-marginal-likelihood maximisation over a fixed logarithmic grid with
// 7 values per parameter. The prior mean is the sample mean of y and the
// signal-variance grid is relative to the sample variance of y, so the
// selection is equivariant under positive scaling of y.
GpHyperparameters select_hyperparameters(const std::vector<GpObservation>& observations, std::size_t dims);

// Length-scale, noise-ratio and signal-multiplier grids used above.
const std::vector<double>& length_scale_grid();
const std::vector<double>& noise_ratio_grid();
const std::vector<double>& signal_multiplier_grid();

enum class HyperPolicy { Keep, Reselect };

// Appends the observation, re-selects hyper-parameters when asked, and
// rebuilds the factorization.
GaussianProcess update(const GaussianProcess& state, GpObservation observation,
                       HyperPolicy policy = HyperPolicy::Reselect);

}  // namespace hwml
