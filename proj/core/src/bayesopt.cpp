#include "hwml/bayesopt.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"
#include "hwml/rng.hpp"

namespace hwml {

std::vector<std::string> SearchSpace::names() const {
  std::vector<std::string> out;
  for (const auto& d : dimensions) out.push_back(d.name);
  return out;
}

std::vector<std::string> SearchSpace::structural_names() const {
  std::vector<std::string> out;
  for (const auto& d : dimensions)
    if (d.structural) out.push_back(d.name);
  return out;
}

std::vector<double> SearchSpace::to_unit(std::span<const double> x) const {
  if (x.size() != size()) throw ConfigError("point has " + std::to_string(x.size()) + " coordinates, space has " + std::to_string(size()));
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& d = dimensions[i];
    u[i] = d.hi > d.lo ? (x[i] - d.lo) / (d.hi - d.lo) : 0.0;
  }
  return u;
}

std::vector<double> SearchSpace::from_unit_sample(std::span<const double> u) const {
  if (u.size() != size()) throw ConfigError("unit point has wrong dimension");
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& d = dimensions[i];
    if (d.kind == DimensionKind::Integer) {
      const double v = d.lo + std::floor(u[i] * (d.hi - d.lo + 1.0));
      x[i] = std::clamp(v, d.lo, d.hi);
    } else {
      x[i] = std::clamp(d.lo + u[i] * (d.hi - d.lo), d.lo, d.hi);
    }
  }
  return x;
}

std::vector<double> SearchSpace::structural(std::span<const double> x) const {
  std::vector<double> z;
  for (std::size_t i = 0; i < dimensions.size(); ++i)
    if (dimensions[i].structural) z.push_back(x[i]);
  return z;
}

bool SearchSpace::contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& d = dimensions[i];
    if (!(x[i] >= d.lo && x[i] <= d.hi)) return false;
    if (d.kind == DimensionKind::Integer && x[i] != std::floor(x[i])) return false;
  }
  return true;
}

void validate(const SearchSpace& space) {
  if (space.dimensions.empty()) throw ConfigError("search space needs at least one dimension");
  std::set<std::string> seen;
  for (const auto& d : space.dimensions) {
    if (d.name.empty()) throw ConfigError("search dimension without a name");
    if (!seen.insert(d.name).second) throw ConfigError("duplicate search dimension '" + d.name + "'");
    if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || d.lo >= d.hi)
      throw ConfigError("dimension '" + d.name + "' has an invalid range");
    if (d.kind == DimensionKind::Integer && (d.lo != std::floor(d.lo) || d.hi != std::floor(d.hi)))
      throw ConfigError("integer dimension '" + d.name + "' needs integer bounds");
  }
}

SearchSpace parse_search_space(std::string_view text) {
  SearchSpace space;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 4 && tok.size() != 5) throw ParseError(line_no, "expected: name int|real lo hi [structural]");
    SearchDimension d;
    d.name = tok[0];
    if (tok[1] == "int") d.kind = DimensionKind::Integer;
    else if (tok[1] == "real") d.kind = DimensionKind::Continuous;
    else throw ParseError(line_no, "unknown dimension type '" + tok[1] + "'");
    try {
      d.lo = parse_double(tok[2]);
      d.hi = parse_double(tok[3]);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    if (tok.size() == 5) {
      if (tok[4] != "structural") throw ParseError(line_no, "unknown flag '" + tok[4] + "'");
      d.structural = true;
    }
    space.dimensions.push_back(std::move(d));
    try {
      validate(space);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  validate(space);
  return space;
}

void validate(const ConstraintSpec& constraints, const SearchSpace& space) {
  const auto names = space.structural_names();
  auto check = [&](const std::optional<double>& budget, const std::optional<LinearModel>& model, LinearTarget target,
                   const char* what) {
    if (!budget && !model) return;
    if (!budget) throw ConfigError(std::string(what) + " model given without a budget");
    if (!model) throw ConfigError(std::string(what) + " budget given without a model");
    if (!(*budget > 0) || !std::isfinite(*budget)) throw ConfigError(std::string(what) + " budget must be positive");
    if (model->target != target) throw ConfigError(std::string(what) + " model predicts the wrong quantity");
    if (model->schema != names)
      throw ConfigError(std::string(what) + " model schema does not match the structural dimensions of the search space");
  };
  check(constraints.power_budget, constraints.power_model, LinearTarget::Power_W, "power");
  check(constraints.memory_budget, constraints.memory_model, LinearTarget::Memory_MB, "memory");
}

ConstraintCheck check_constraints(const ConstraintSpec& constraints, std::span<const double> z) {
  ConstraintCheck c;
  if (constraints.power_budget && constraints.power_model) {
    const double p = predict_power(*constraints.power_model, z);
    c.power = p;
    if (!(p <= *constraints.power_budget)) {
      c.feasible = false;
      c.violation += (p - *constraints.power_budget) / *constraints.power_budget;
    }
  }
  if (constraints.memory_budget && constraints.memory_model) {
    const double m = predict_memory(*constraints.memory_model, z);
    c.memory = m;
    if (!(m <= *constraints.memory_budget)) {
      c.feasible = false;
      c.violation += (m - *constraints.memory_budget) / *constraints.memory_budget;
    }
  }
  return c;
}

double expected_improvement(double mean, double stddev, double y_best) noexcept {
  const double gain = y_best - mean;
  if (!(stddev > 0.0)) return gain > 0.0 ? gain : 0.0;
  const double u = gain / stddev;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  const double ei = gain * cdf + stddev * pdf;
  return ei > 0.0 ? ei : 0.0;
}

double expected_improvement(const GaussianProcess& gp, std::span<const double> x_unit, double y_best) {
  const auto post = gp.posterior(x_unit);
  return expected_improvement(post.mean, std::sqrt(post.variance), y_best);
}

double hw_ieci(const GaussianProcess& gp, const SearchSpace& space, std::span<const double> x, double y_best,
               const ConstraintSpec& constraints) {
  if (!check_constraints(constraints, space.structural(x)).feasible) return 0.0;
  return expected_improvement(gp, space.to_unit(x), y_best);
}

Acquisition make_ei_acquisition(const GaussianProcess& gp, const SearchSpace& space, double y_best) {
  return [&gp, &space, y_best](std::span<const double> x) {
    return AcquisitionValue{expected_improvement(gp, space.to_unit(x), y_best), {}};
  };
}

Acquisition make_hw_ieci_acquisition(const GaussianProcess& gp, const SearchSpace& space, double y_best,
                                     const ConstraintSpec& constraints) {
  return [&gp, &space, y_best, &constraints](std::span<const double> x) {
    AcquisitionValue a;
    a.check = check_constraints(constraints, space.structural(x));
    a.value = a.check.feasible ? expected_improvement(gp, space.to_unit(x), y_best) : 0.0;
    return a;
  };
}

std::vector<std::vector<double>> draw_candidates(const SearchSpace& space, std::size_t count, std::uint64_t seed) {
  auto points = shifted_halton(count, space.size(), seed);
  for (auto& p : points) p = space.from_unit_sample(p);
  return points;
}

Proposal propose_next(const SearchSpace& space, const Acquisition& acquisition, std::size_t candidates,
                      std::uint64_t seed) {
  if (candidates == 0) throw ConfigError("need at least one candidate");
  const auto points = draw_candidates(space, candidates, seed);
  std::vector<AcquisitionValue> values;
  values.reserve(points.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    values.push_back(acquisition(points[i]));
    if (values[i].value > values[best].value) best = i;
  }
  Proposal p;
  if (!(values[best].value > 0.0)) {
    p.fallback = true;
    best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i].check.violation < values[best].check.violation) best = i;
  }
  p.x = points[best];
  p.acquisition = values[best];
  p.candidate_index = best;
  return p;
}

std::string_view to_string(ProposalKind kind) noexcept {
  switch (kind) {
    case ProposalKind::Seed: return "seed";
    case ProposalKind::Acquisition: return "acquisition";
    case ProposalKind::Fallback: return "fallback";
  }
  return "?";
}

std::string format_trace_csv(const Trace& trace) {
  std::string out = "iter";
  for (const auto& n : trace.dimension_names) out += "," + n;
  out += ",acq,y,pred_power,pred_mem,feasible,best_y\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  for (const auto& r : trace.records) {
    out += std::to_string(r.iteration);
    for (double v : r.x) out += fmt::format(",{}", v);
    out += "," + opt(r.acquisition);
    out += r.failed ? std::string(",") : fmt::format(",{}", r.y);
    out += "," + opt(r.predicted_power);
    out += "," + opt(r.predicted_memory);
    out += r.feasible ? ",1" : ",0";
    out += "," + opt(r.best_y) + "\n";
  }
  return out;
}

namespace {

struct Evaluation {
  double y = 0.0;
  bool failed = false;
};

Evaluation evaluate(const Objective& objective, std::span<const double> x) {
  try {
    const auto y = objective(x);
    if (y && std::isfinite(*y)) return {*y, false};
  } catch (const std::exception&) {
  }
  return {0.0, true};
}

}  // namespace

BoResult bo_run(const Objective& objective, const SearchSpace& space, const BoOptions& options) {
  validate(space);
  const ConstraintSpec constraints = options.constraints.value_or(ConstraintSpec{});
  validate(constraints, space);
  const std::size_t dims = space.size();
  const std::size_t n_seed = 2 * dims;
  if (options.budget < n_seed)
    throw ConfigError("budget " + std::to_string(options.budget) + " is below the " + std::to_string(n_seed) +
                      " seed evaluations");
  const bool gate = options.gate_acquisition && constraints.active();

  BoResult result;
  result.trace.seed = options.seed;
  result.trace.dimension_names = space.names();

  std::vector<GpObservation> observations;
  std::optional<double> worst;
  std::optional<double> best_feasible;
  std::optional<double> best_any;

  auto record = [&](std::vector<double> x, ProposalKind kind, std::optional<double> acq, double seconds_start) {
    const auto t0 = std::chrono::steady_clock::now();
    Evaluation e = evaluate(objective, x);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (e.failed) e.y = worst.value_or(1.0);
    TraceRecord r;
    r.iteration = result.trace.records.size() + 1;
    r.kind = kind;
    r.acquisition = acq;
    r.y = e.y;
    r.failed = e.failed;
    const ConstraintCheck c = check_constraints(constraints, space.structural(x));
    r.predicted_power = c.power;
    r.predicted_memory = c.memory;
    r.feasible = c.feasible;
    if (!e.failed) {
      worst = worst ? std::max(*worst, e.y) : e.y;
      best_any = best_any ? std::min(*best_any, e.y) : e.y;
      if (c.feasible && (!best_feasible || e.y < *best_feasible)) {
        best_feasible = e.y;
        result.best = r;
        result.best->x = x;
      }
    }
    r.best_y = best_feasible;
    r.wall_seconds = seconds_start + elapsed;
    observations.push_back({space.to_unit(x), e.y});
    r.x = std::move(x);
    if (result.best && result.best->iteration == r.iteration) result.best->best_y = r.best_y;
    result.trace.records.push_back(std::move(r));
  };

  const auto seeds = shifted_halton(n_seed, dims, derive_seed(options.seed, "bo-seed-points"));
  for (const auto& u : seeds) record(space.from_unit_sample(u), ProposalKind::Seed, std::nullopt, 0.0);

  const std::uint64_t candidate_root = derive_seed(options.seed, "bo-candidates");
  while (result.trace.records.size() < options.budget) {
    const auto t0 = std::chrono::steady_clock::now();
    const GaussianProcess gp(select_hyperparameters(observations, dims), observations);
    double y_best = 0.0;
    if (gate && best_feasible) y_best = *best_feasible;
    else if (best_any) y_best = *best_any;
    else y_best = observations.front().y;

    const Acquisition acq = gate ? make_hw_ieci_acquisition(gp, space, y_best, constraints)
                                 : make_ei_acquisition(gp, space, y_best);
    const Proposal p = propose_next(space, acq, options.candidates,
                                    derive_seed(candidate_root, static_cast<std::uint64_t>(result.trace.records.size())));
    const double spent = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record(p.x, p.fallback ? ProposalKind::Fallback : ProposalKind::Acquisition, p.acquisition.value, spent);
  }
  return result;
}

}  // namespace hwml
