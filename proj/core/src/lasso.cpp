#include "lasso.hpp"

#include <algorithm>
#include <cmath>

namespace hwml::detail {

namespace {

double soft_threshold(double value, double lambda) noexcept {
  if (value > lambda) return value - lambda;
  if (value < -lambda) return value + lambda;
  return 0.0;
}

constexpr int kMaxSweeps = 20000;
constexpr double kRelativeTolerance = 1e-13;
constexpr double kKktTolerance = 1e-11;
constexpr int kInnerSweeps = 50;
constexpr int kMaxPathSteps = 10000;
constexpr double kSingularRcond = 1e-15;

}  // namespace

LassoProblem::LassoProblem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  y_mean_ = y.sum() * inv_n;
  yc_ = y.array() - y_mean_;
  const double y_var = yc_.squaredNorm() * inv_n;
  y_scale_ = y_var > 0 ? std::sqrt(y_var) : 1.0;

  means_ = x.colwise().sum().transpose() * inv_n;
  scales_.resize(p);
  usable_.assign(static_cast<std::size_t>(p), false);
  z_.resize(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    z_.col(j) = x.col(j).array() - means_(j);
    const double var = z_.col(j).squaredNorm() * inv_n;
    const double sd = std::sqrt(var);
    if (sd > 1e-13 * std::max(1.0, std::abs(means_(j))) && std::isfinite(sd)) {
      scales_(j) = sd;
      usable_[static_cast<std::size_t>(j)] = true;
      z_.col(j) /= sd;
    } else {
      scales_(j) = 1.0;
      z_.col(j).setZero();
    }
  }
  gram_ = (z_.transpose() * z_) * inv_n;
  corr_ = (z_.transpose() * yc_) * inv_n;
}

double LassoProblem::lambda_max() const noexcept {
  return corr_.size() == 0 ? 0.0 : corr_.cwiseAbs().maxCoeff();
}

void LassoProblem::solve(double lambda, Eigen::VectorXd& beta) const {
  const Eigen::Index p = columns();
  if (beta.size() != p) beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd g_beta = gram_ * beta;
  const double tolerance = kRelativeTolerance * y_scale_;

  auto sweep = [&](bool active_only) {
    double max_delta = 0.0;
    bool support_changed = false;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!usable_[static_cast<std::size_t>(j)]) continue;
      if (active_only && beta(j) == 0.0) continue;
      const double gjj = gram_(j, j);
      const double partial = corr_(j) - g_beta(j) + gjj * beta(j);
      const double updated = soft_threshold(partial, lambda) / gjj;
      const double delta = updated - beta(j);
      if (delta != 0.0) {
        if ((beta(j) == 0.0) != (updated == 0.0)) support_changed = true;
        beta(j) = updated;
        g_beta.noalias() += gram_.col(j) * delta;
        max_delta = std::max(max_delta, std::abs(delta) * std::sqrt(gjj));
      }
    }
    return std::pair{max_delta, support_changed};
  };

  // Coordinate descent only has to find the support: once the exact
  // re-solve on the current active set satisfies the optimality conditions
  // it is the solution, however slowly the sweeps would have converged.
  const double kkt_tolerance = kKktTolerance * y_scale_;
  Eigen::VectorXd polished;
  for (int outer = 0; outer < kMaxSweeps;) {
    auto [delta, changed] = sweep(false);
    ++outer;
    if (delta < tolerance && !changed) break;
    for (int inner = 0; outer < kMaxSweeps && inner < kInnerSweeps; ++inner) {
      auto [d, unused] = sweep(true);
      ++outer;
      if (d < tolerance) break;
    }
    polished = beta;
    if (polish(lambda, polished) && kkt_violation(polished, lambda) <= kkt_tolerance) {
      beta = polished;
      return;
    }
  }

  polished = beta;
  if (polish(lambda, polished) && kkt_violation(polished, lambda) <= kkt_violation(beta, lambda)) beta = polished;
}

bool LassoProblem::polish(double lambda, Eigen::VectorXd& beta) const {
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) active.push_back(j);
  if (active.empty()) return false;
  const auto k = static_cast<Eigen::Index>(active.size());

  Eigen::VectorXd solution;
  if (lambda == 0.0) {
    Eigen::MatrixXd za(z_.rows(), k);
    for (Eigen::Index a = 0; a < k; ++a) za.col(a) = z_.col(active[static_cast<std::size_t>(a)]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(za);
    if (qr.rank() < k) return false;
    solution = qr.solve(yc_);
  } else {
    Eigen::MatrixXd gaa(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const Eigen::Index ja = active[static_cast<std::size_t>(a)];
      rhs(a) = corr_(ja) - lambda * (beta(ja) > 0 ? 1.0 : -1.0);
      for (Eigen::Index b = 0; b < k; ++b) gaa(a, b) = gram_(ja, active[static_cast<std::size_t>(b)]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gaa);
    if (ldlt.info() != Eigen::Success) return false;
    solution = ldlt.solve(rhs);
    for (Eigen::Index a = 0; a < k; ++a)
      if ((solution(a) > 0) != (beta(active[static_cast<std::size_t>(a)]) > 0) || solution(a) == 0.0) return false;
  }
  if (!solution.allFinite()) return false;
  for (Eigen::Index a = 0; a < k; ++a) beta(active[static_cast<std::size_t>(a)]) = solution(a);
  return true;
}

std::vector<Eigen::VectorXd> LassoProblem::homotopy(const std::vector<double>& lambdas) const {
  const Eigen::Index p = columns();
  std::vector<Eigen::VectorXd> out;
  out.reserve(lambdas.size());
  std::size_t next = 0;
  double lam = lambda_max();
  while (next < lambdas.size() && lambdas[next] >= lam) out.push_back(Eigen::VectorXd::Zero(p)), ++next;
  if (next == lambdas.size() || lam <= 0.0) {
    while (out.size() < lambdas.size()) out.push_back(Eigen::VectorXd::Zero(p));
    return out;
  }

  std::vector<Eigen::Index> active;
  std::vector<double> sign;
  std::vector<char> in_active(static_cast<std::size_t>(p), 0), blocked(static_cast<std::size_t>(p), 0);
  {
    Eigen::Index first = -1;
    for (Eigen::Index j = 0; j < p; ++j)
      if (usable_[static_cast<std::size_t>(j)] && (first < 0 || std::abs(corr_(j)) > std::abs(corr_(first)))) first = j;
    active.push_back(first);
    sign.push_back(corr_(first) > 0 ? 1.0 : -1.0);
    in_active[static_cast<std::size_t>(first)] = 1;
  }

  Eigen::VectorXd u, v;
  auto factor = [&]() {
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd gaa(k, k);
    Eigen::VectorXd ca(k), sa(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      ca(a) = corr_(active[static_cast<std::size_t>(a)]);
      sa(a) = sign[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < k; ++b) gaa(a, b) = gram_(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gaa);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kSingularRcond)) return false;
    u = ldlt.solve(ca);
    v = ldlt.solve(sa);
    return u.allFinite() && v.allFinite();
  };
  auto emit = [&](double at) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (std::size_t a = 0; a < active.size(); ++a) beta(active[a]) = u(static_cast<Eigen::Index>(a)) - at * v(static_cast<Eigen::Index>(a));
    out.push_back(std::move(beta));
  };

  if (!factor()) return {};
  // Events are clipped to the current lambda; a coordinate that roundoff
  // has already pushed past the boundary changes state immediately. The
  // last coordinate to change may not flip back within the same step.
  Eigen::Index last_changed = active.front();
  for (int step = 0; step < kMaxPathSteps && next < lambdas.size(); ++step) {
    double lam_next = 0.0;
    Eigen::Index join = -1, leave = -1;
    double join_sign = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (!usable_[ju] || in_active[ju] || blocked[ju]) continue;
      double gu = 0.0, gv = 0.0;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const double g = gram_(j, active[a]);
        gu += g * u(static_cast<Eigen::Index>(a));
        gv += g * v(static_cast<Eigen::Index>(a));
      }
      // s r_j(l) - l with r_j(l) = (c_j - G_jA u) + l G_jA v must rise to 0
      // as l decreases.
      const double base = corr_(j) - gu;
      for (double sgn : {1.0, -1.0}) {
        const double slope = 1.0 - sgn * gv;
        if (!(slope > 0.0)) continue;
        double l = sgn * base / slope;
        if (l >= lam) {
          if (j == last_changed) continue;
          l = lam;
        }
        if (l > lam_next) {
          lam_next = l;
          join = j;
          join_sign = sgn;
          leave = -1;
        }
      }
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double va = v(static_cast<Eigen::Index>(a));
      const double ua = u(static_cast<Eigen::Index>(a));
      const double s_a = sign[a];
      const double signed_now = s_a * (ua - lam * va);
      double l;
      if (signed_now <= 0.0) {
        // Zero or wrong-signed by roundoff: leave now unless already moving
        // back to the right side.
        if (s_a * va > 0.0 || active[a] == last_changed) continue;
        l = lam;
      } else {
        // b_a(l) = u_a - l v_a keeps its sign until it crosses zero
        if (va == 0.0) continue;
        l = ua / va;
        if (!(l < lam)) continue;
      }
      if (l > lam_next) {
        lam_next = l;
        leave = static_cast<Eigen::Index>(a);
        join = -1;
      }
    }
    while (next < lambdas.size() && lambdas[next] >= lam_next) emit(lambdas[next++]);
    if (join < 0 && leave < 0) break;
    lam = lam_next;
    if (join >= 0) {
      last_changed = join;
      active.push_back(join);
      sign.push_back(join_sign);
      in_active[static_cast<std::size_t>(join)] = 1;
      if (!factor()) {
        active.pop_back();
        sign.pop_back();
        in_active[static_cast<std::size_t>(join)] = 0;
        blocked[static_cast<std::size_t>(join)] = 1;
        if (!factor()) break;
      }
    } else {
      const auto a = static_cast<std::size_t>(leave);
      last_changed = active[a];
      in_active[static_cast<std::size_t>(active[a])] = 0;
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(a));
      sign.erase(sign.begin() + static_cast<std::ptrdiff_t>(a));
      if (active.empty()) {
        u.resize(0);
        v.resize(0);
      } else if (!factor()) {
        break;
      }
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> LassoProblem::path(const std::vector<double>& lambdas) const {
  std::vector<Eigen::VectorXd> betas = homotopy(lambdas);
  const double kkt_tolerance = kKktTolerance * y_scale_;
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(columns());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (i < betas.size() && kkt_violation(betas[i], lambdas[i]) <= kkt_tolerance) {
      warm = betas[i];
      continue;
    }
    Eigen::VectorXd beta = i < betas.size() ? betas[i] : warm;
    solve(lambdas[i], beta);
    if (i < betas.size()) betas[i] = beta;
    else betas.push_back(beta);
    warm = beta;
  }
  return betas;
}

double LassoProblem::kkt_violation(const Eigen::VectorXd& beta, double lambda) const {
  const Eigen::VectorXd gradient = corr_ - gram_ * beta;  // negative gradient of the smooth part
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (!usable_[static_cast<std::size_t>(j)]) continue;
    double v;
    if (beta(j) != 0.0)
      v = std::abs(gradient(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0));
    else
      v = std::max(0.0, std::abs(gradient(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

void LassoProblem::to_raw(const Eigen::VectorXd& beta, Eigen::VectorXd& coefficients, double& intercept) const {
  coefficients = beta.cwiseQuotient(scales_);
  intercept = y_mean_;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (coefficients(j) != 0.0) intercept -= coefficients(j) * means_(j);
}

}  // namespace hwml::detail
