#include "hwml/gaussian_process.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "hwml/error.hpp"

namespace hwml {

namespace {

const double kSqrt5 = std::sqrt(5.0);

double matern52_from_r2(double r2, double signal_variance) {
  const double r = std::sqrt(r2);
  return signal_variance * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r2) * std::exp(-kSqrt5 * r);
}

double scaled_sq_distance(std::span<const double> a, std::span<const double> b, std::span<const double> ls) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / ls[i];
    r2 += d * d;
  }
  return r2;
}

bool has_duplicates(const std::vector<GpObservation>& obs) {
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (std::size_t j = i + 1; j < obs.size(); ++j)
      if (obs[i].x == obs[j].x) return true;
  return false;
}

}  // namespace

double matern52(std::span<const double> a, std::span<const double> b, std::span<const double> length_scales,
                double signal_variance) {
  return matern52_from_r2(scaled_sq_distance(a, b, length_scales), signal_variance);
}

GaussianProcess::GaussianProcess(GpHyperparameters hyper, std::vector<GpObservation> observations)
    : hyper_(std::move(hyper)), observations_(std::move(observations)) {
  for (double l : hyper_.length_scales)
    if (!(l > 0)) throw ConfigError("GP length scales must be positive");
  if (!(hyper_.signal_variance > 0)) throw ConfigError("GP signal variance must be positive");
  if (!(hyper_.noise_variance >= 0)) throw ConfigError("GP noise variance must be non-negative");
  for (const auto& o : observations_)
    if (o.x.size() != hyper_.length_scales.size()) throw ConfigError("observation dimension does not match kernel");
  factorize();
}

void GaussianProcess::factorize() {
  const auto n = static_cast<Eigen::Index>(observations_.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = matern52(observations_[static_cast<std::size_t>(i)].x, observations_[static_cast<std::size_t>(j)].x,
                                hyper_.length_scales, hyper_.signal_variance);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  Eigen::VectorXd residual(n);
  for (Eigen::Index i = 0; i < n; ++i) residual(i) = observations_[static_cast<std::size_t>(i)].y - hyper_.prior_mean;

  jitter_ = 0.0;
  if (hyper_.noise_variance == 0.0 && has_duplicates(observations_)) {
    jitter_ = 1e-8 * hyper_.signal_variance;
    warnings_.push_back("duplicate inputs with zero noise; added jitter " + std::to_string(jitter_));
  }

  const double max_jitter = 1e-4 * hyper_.signal_variance;
  while (true) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += hyper_.noise_variance + jitter_;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      lower_ = llt.matrixL();
      alpha_ = llt.solve(residual);
      log_det_ = 2.0 * lower_.diagonal().array().log().sum();
      return;
    }
    if (jitter_ >= max_jitter)
      throw NumericalError("GP covariance is singular even with jitter " + std::to_string(jitter_));
    jitter_ = jitter_ == 0.0 ? 1e-10 * hyper_.signal_variance : jitter_ * 10.0;
    warnings_.push_back("covariance not positive definite; retrying with jitter " + std::to_string(jitter_));
  }
}

GaussianProcess::Posterior GaussianProcess::posterior(std::span<const double> x) const {
  if (x.size() != hyper_.length_scales.size()) throw ConfigError("query dimension does not match kernel");
  const auto n = static_cast<Eigen::Index>(observations_.size());
  if (n == 0) return {hyper_.prior_mean, hyper_.signal_variance};
  Eigen::VectorXd kx(n);
  for (Eigen::Index i = 0; i < n; ++i)
    kx(i) = matern52(x, observations_[static_cast<std::size_t>(i)].x, hyper_.length_scales, hyper_.signal_variance);
  const double mean = hyper_.prior_mean + kx.dot(alpha_);
  const Eigen::VectorXd v = lower_.triangularView<Eigen::Lower>().solve(kx);
  const double variance = hyper_.signal_variance - v.squaredNorm();
  return {mean, variance > 0.0 ? variance : 0.0};
}

double GaussianProcess::log_marginal_likelihood() const {
  const auto n = static_cast<double>(observations_.size());
  double quad = 0.0;
  for (std::size_t i = 0; i < observations_.size(); ++i)
    quad += (observations_[i].y - hyper_.prior_mean) * alpha_(static_cast<Eigen::Index>(i));
  return -0.5 * quad - 0.5 * log_det_ - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

GaussianProcess GaussianProcess::with_observation(GpObservation observation) const {
  std::vector<GpObservation> obs = observations_;
  obs.push_back(std::move(observation));
  return GaussianProcess(hyper_, std::move(obs));
}

const std::vector<double>& length_scale_grid() {
  static const std::vector<double> grid{0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2};
  return grid;
}

const std::vector<double>& noise_ratio_grid() {
  static const std::vector<double> grid{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  return grid;
}

const std::vector<double>& signal_multiplier_grid() {
  static const std::vector<double> grid{0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  return grid;
}

namespace {

struct GridScore {
  double score = -std::numeric_limits<double>::infinity();
  double multiplier = 1.0;
};

// Scores one (length scales, noise ratio) cell for every signal multiplier
// with a single Cholesky of the unit-signal correlation matrix C + gI.
// Constant terms shared by all cells are dropped; the quadratic form is
// divided by var(y) so scaling y by a power of two leaves scores bit-exact.
GridScore score_cell(const std::vector<GpObservation>& obs, const Eigen::VectorXd& residual, double y_var,
                     std::span<const double> ls, double noise_ratio) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0 + noise_ratio;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = matern52_from_r2(scaled_sq_distance(obs[static_cast<std::size_t>(i)].x, obs[static_cast<std::size_t>(j)].x, ls), 1.0);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  GridScore best;
  if (llt.info() != Eigen::Success) return best;
  const Eigen::VectorXd w = llt.matrixL().solve(residual);
  const double quad = w.squaredNorm() / y_var;
  const double log_det = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  for (double mult : signal_multiplier_grid()) {
    const double s = -0.5 * quad / mult - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(mult);
    if (s > best.score) best = {s, mult};
  }
  return best;
}

}  // namespace

GpHyperparameters select_hyperparameters(const std::vector<GpObservation>& observations, std::size_t dims) {
  GpHyperparameters hyper;
  hyper.length_scales.assign(dims, 0.4);
  const std::size_t n = observations.size();
  if (n == 0) return hyper;

  double mean = 0.0;
  for (const auto& o : observations) mean += o.y;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& o : observations) var += (o.y - mean) * (o.y - mean);
  var /= static_cast<double>(n);
  if (!(var > 0.0)) var = 1.0;

  hyper.prior_mean = mean;
  hyper.signal_variance = var;
  hyper.noise_variance = noise_ratio_grid().front() * var;
  if (n < 2) return hyper;

  Eigen::VectorXd residual(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) residual(static_cast<Eigen::Index>(i)) = observations[i].y - mean;

  const auto& ls_grid = length_scale_grid();
  const auto& g_grid = noise_ratio_grid();
  const std::size_t levels = ls_grid.size();

  GridScore best;
  std::vector<double> best_ls = hyper.length_scales;
  double best_g = g_grid.front();

  std::vector<double> ls(dims);
  auto consider = [&](std::span<const double> cell_ls, double g) {
    const GridScore s = score_cell(observations, residual, var, cell_ls, g);
    if (s.score > best.score) {
      best = s;
      best_ls.assign(cell_ls.begin(), cell_ls.end());
      best_g = g;
    }
    return s;
  };

  // Full grid for up to four inputs; beyond that, coordinate sweeps.
  std::size_t cells = 1;
  for (std::size_t d = 0; d < dims && cells <= 40000; ++d) cells *= levels;
  if (dims <= 4) {
    std::vector<std::size_t> idx(dims, 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      std::size_t rem = cell;
      for (std::size_t d = dims; d-- > 0;) {
        idx[d] = rem % levels;
        rem /= levels;
      }
      for (std::size_t d = 0; d < dims; ++d) ls[d] = ls_grid[idx[d]];
      for (double g : g_grid) consider(ls, g);
    }
  } else {
    std::vector<std::size_t> idx(dims, levels / 2);
    std::size_t g_idx = 0;
    for (int sweep = 0; sweep < 3; ++sweep) {
      bool moved = false;
      for (std::size_t d = 0; d <= dims; ++d) {
        std::size_t arg = d < dims ? idx[d] : g_idx;
        double local = -std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < levels; ++v) {
          for (std::size_t e = 0; e < dims; ++e) ls[e] = ls_grid[(e == d) ? v : idx[e]];
          const double g = g_grid[d == dims ? v : g_idx];
          const GridScore s = consider(ls, g);
          if (s.score > local) {
            local = s.score;
            arg = v;
          }
        }
        std::size_t& slot = d < dims ? idx[d] : g_idx;
        if (slot != arg) moved = true;
        slot = arg;
      }
      if (!moved) break;
    }
  }

  if (std::isfinite(best.score)) {
    hyper.length_scales = best_ls;
    hyper.signal_variance = var * best.multiplier;
    hyper.noise_variance = best_g * hyper.signal_variance;
  }
  return hyper;
}

GaussianProcess update(const GaussianProcess& state, GpObservation observation, HyperPolicy policy) {
  if (policy == HyperPolicy::Keep) return state.with_observation(std::move(observation));
  std::vector<GpObservation> obs = state.observations();
  obs.push_back(std::move(observation));
  GpHyperparameters hyper = select_hyperparameters(obs, state.hyperparameters().length_scales.size());
  return GaussianProcess(std::move(hyper), std::move(obs));
}

}  // namespace hwml
