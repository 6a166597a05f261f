#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hwml/gaussian_process.hpp"
#include "hwml/linmod.hpp"

namespace hwml {

enum class DimensionKind { Integer, Continuous };

struct SearchDimension {
  std::string name;
  DimensionKind kind = DimensionKind::Continuous;
  double lo = 0.0;
  double hi = 1.0;
  bool structural = false;  // part of z, seen by the power/memory models
};

struct SearchSpace {
  std::vector<SearchDimension> dimensions;

  std::size_t size() const noexcept { return dimensions.size(); }
  std::vector<std::string> names() const;
  std::vector<std::string> structural_names() const;

  // Affine map of the box onto [0,1]^D, as seen by the GP.
  std::vector<double> to_unit(std::span<const double> x) const;
  // Inverse of to_unit for a point drawn uniformly from [0,1)^D; integer
  // dimensions land on each of the hi-lo+1 values with equal mass.
  std::vector<double> from_unit_sample(std::span<const double> u) const;
  std::vector<double> structural(std::span<const double> x) const;
  bool contains(std::span<const double> x) const;
};

void validate(const SearchSpace& space);
// One dimension per line: `name int|real lo hi [structural]`.
SearchSpace parse_search_space(std::string_view text);

// Budgets on a priori predicted power (W) and memory (MB). A missing
// budget leaves that resource unconstrained.
struct ConstraintSpec {
  std::optional<double> power_budget;
  std::optional<LinearModel> power_model;
  std::optional<double> memory_budget;
  std::optional<LinearModel> memory_model;

  bool active() const noexcept { return power_budget.has_value() || memory_budget.has_value(); }
};

void validate(const ConstraintSpec& constraints, const SearchSpace& space);

struct ConstraintCheck {
  std::optional<double> power;
  std::optional<double> memory;
  bool feasible = true;
  // max(P - PB, 0) / PB + max(M - MB, 0) / MB
  double violation = 0.0;
};

ConstraintCheck check_constraints(const ConstraintSpec& constraints, std::span<const double> z);

// Closed-form expected improvement for minimisation:
//   (y+ - mu) Phi(u) + s phi(u),  u = (y+ - mu) / s;  s = 0 gives max(y+ - mu, 0).
double expected_improvement(double mean, double stddev, double y_best) noexcept;
double expected_improvement(const GaussianProcess& gp, std::span<const double> x_unit, double y_best);

// EI gated by the indicators [P(z) <= PB] and [M(z) <= MB].
double hw_ieci(const GaussianProcess& gp, const SearchSpace& space, std::span<const double> x, double y_best,
               const ConstraintSpec& constraints);

struct AcquisitionValue {
  double value = 0.0;
  ConstraintCheck check;
};

// Evaluates an acquisition at a point of the search space (not unit coords).
using Acquisition = std::function<AcquisitionValue(std::span<const double> x)>;

Acquisition make_ei_acquisition(const GaussianProcess& gp, const SearchSpace& space, double y_best);
Acquisition make_hw_ieci_acquisition(const GaussianProcess& gp, const SearchSpace& space, double y_best,
                                     const ConstraintSpec& constraints);

struct Proposal {
  std::vector<double> x;
  AcquisitionValue acquisition;
  std::size_t candidate_index = 0;
  bool fallback = false;  // no candidate had positive acquisition
};

std::vector<std::vector<double>> draw_candidates(const SearchSpace& space, std::size_t count, std::uint64_t seed);

// Maximises the acquisition over `candidates` quasi-random points, first
// index winning ties. When every value is zero, returns the candidate with
// the smallest predicted constraint violation and flags it.
Proposal propose_next(const SearchSpace& space, const Acquisition& acquisition, std::size_t candidates,
                      std::uint64_t seed);

enum class ProposalKind { Seed, Acquisition, Fallback };
std::string_view to_string(ProposalKind kind) noexcept;

struct TraceRecord {
  std::size_t iteration = 0;  // 1-based evaluation count
  std::vector<double> x;
  ProposalKind kind = ProposalKind::Seed;
  std::optional<double> acquisition;
  double y = 0.0;  // imputed for failed evaluations
  bool failed = false;
  std::optional<double> predicted_power;
  std::optional<double> predicted_memory;
  bool feasible = true;
  std::optional<double> best_y;  // best feasible y so far
  double wall_seconds = 0.0;
};

struct Trace {
  std::uint64_t seed = 0;
  std::vector<std::string> dimension_names;
  std::vector<TraceRecord> records;
};

// iter,x...,acq,y,pred_power,pred_mem,feasible,best_y
std::string format_trace_csv(const Trace& trace);

// Returns nullopt (or throws) when an evaluation fails.
using Objective = std::function<std::optional<double>(std::span<const double> x)>;

struct BoOptions {
  std::size_t budget = 20;
  std::uint64_t seed = 0;
  std::size_t candidates = 512;
  std::optional<ConstraintSpec> constraints;
  // With constraints present: gate EI by predicted feasibility (HW-IECI).
  // When false, proposals use plain EI and feasibility is only recorded,
  // i.e. infeasible points are filtered after the fact.
  bool gate_acquisition = true;
};

struct BoResult {
  std::optional<TraceRecord> best;  // empty when no feasible evaluation succeeded
  Trace trace;
};

// Seeds with 2D quasi-random points, then propose -> evaluate -> update
// until the budget is spent.
BoResult bo_run(const Objective& objective, const SearchSpace& space, const BoOptions& options);

}  // namespace hwml
