#include <gtest/gtest.h>

#include <cmath>

#include "hwml/bayesopt.hpp"
#include "hwml/error.hpp"
#include "hwml/objectives.hpp"
#include "oracles.hpp"
#include "problems.hpp"

namespace hwml {
namespace {

TEST(Ei, ClosedFormValues) {
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0), oracle::ei_quadrature(0.0, 1.0, 0.0), 1e-6);
  EXPECT_EQ(expected_improvement(1.0, 0.0, 0.5), 0.0);
  EXPECT_EQ(expected_improvement(0.25, 0.0, 1.0), 0.75);
  EXPECT_EQ(expected_improvement(50.0, 0.1, 0.0), 0.0);
}

TEST(Ei, NonNegativeAndIncreasingInSd) {
  double previous = 0;
  for (double s = 0.0; s < 5; s += 0.1) {
    const double ei = expected_improvement(2.0, s, 2.0);
    EXPECT_GE(ei, previous);
    previous = ei;
  }
  for (double mu = -5; mu <= 5; mu += 0.5)
    for (double s : {0.0, 1e-3, 0.3, 3.0}) EXPECT_GE(expected_improvement(mu, s, 0.3), 0.0);
}

TEST(Ei, DeepTailStaysAccurate) {
  // u = -30: both terms underflow in a naive form.
  const double ei = expected_improvement(30.0, 1.0, 0.0);
  EXPECT_GE(ei, 0.0);
  EXPECT_LT(ei, 1e-190);
  EXPECT_NEAR(expected_improvement(-30.0, 1.0, 0.0), 30.0, 1e-12);
}

GaussianProcess small_gp() {
  return GaussianProcess({{0.3, 0.3}, 1.0, 0.01, 0.5},
                         {{{0.1, 0.2}, 0.4}, {{0.8, 0.3}, 0.9}, {{0.5, 0.9}, 0.2}});
}

TEST(HwIeci, IndicatorGate) {
  const auto space = problems::integer_square();
  const auto gp = small_gp();
  const std::vector<double> x{7, 7}, xb{8, 7}, xo{8, 6};
  const double ei = expected_improvement(gp, space.to_unit(x), 0.3);
  EXPECT_EQ(hw_ieci(gp, space, x, 0.3, problems::power_budget(14)), ei);  // boundary: P = PB allowed
  EXPECT_EQ(hw_ieci(gp, space, xb, 0.3, problems::power_budget(14)), 0.0);
  EXPECT_EQ(hw_ieci(gp, space, xb, 0.3, problems::power_budget(15 - 1e-12)), 0.0);
  const std::vector<double> xs{1, 1};
  EXPECT_EQ(hw_ieci(gp, space, xs, 0.3, problems::power_budget(14)),
            expected_improvement(gp, space.to_unit(xs), 0.3));
  auto both = problems::power_budget(100);
  both.memory_budget = 10;
  both.memory_model = problems::sum_model(LinearTarget::Memory_MB);
  EXPECT_EQ(hw_ieci(gp, space, xo, 0.3, both), 0.0);
}

TEST(Constraints, CheckAndViolation) {
  auto c = problems::power_budget(10);
  c.memory_budget = 20;
  c.memory_model = problems::sum_model(LinearTarget::Memory_MB, 2.0, 2.0);
  const std::vector<double> z{6, 6};
  const auto r = check_constraints(c, z);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(*r.power, 12.0);
  EXPECT_EQ(*r.memory, 24.0);
  EXPECT_DOUBLE_EQ(r.violation, 2.0 / 10 + 4.0 / 20);
  const std::vector<double> ok{5, 5};
  EXPECT_TRUE(check_constraints(c, ok).feasible);
  EXPECT_EQ(check_constraints(c, ok).violation, 0.0);
}

TEST(Constraints, Validation) {
  const auto space = problems::integer_square();
  auto c = problems::power_budget(-1);
  EXPECT_THROW(validate(c, space), ConfigError);
  c = problems::power_budget(10);
  c.power_model->schema = {"x1", "other"};
  EXPECT_THROW(validate(c, space), ConfigError);
  c = problems::power_budget(10);
  c.power_model->target = LinearTarget::Memory_MB;
  EXPECT_THROW(validate(c, space), ConfigError);
  c = ConstraintSpec{};
  c.memory_budget = 3;
  EXPECT_THROW(validate(c, space), ConfigError);
  EXPECT_NO_THROW(validate(problems::power_budget(10), space));
}

TEST(SearchSpace, ParseAndMaps) {
  const auto s = parse_search_space("# dims\nunits int 8 64 structural\nlr real 0.001 0.1\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.structural_names(), (std::vector<std::string>{"units"}));
  const std::vector<double> x{36, 0.0505};
  const auto u = s.to_unit(x);
  EXPECT_DOUBLE_EQ(u[0], 0.5);
  EXPECT_DOUBLE_EQ(u[1], 0.5);
  const std::vector<double> lo{0.0, 0.0}, hi{0.999999, 0.999999};
  EXPECT_EQ(s.from_unit_sample(lo)[0], 8.0);
  EXPECT_EQ(s.from_unit_sample(hi)[0], 64.0);
  EXPECT_TRUE(s.contains(x));
  EXPECT_THROW(parse_search_space("a int 3 3\n"), Error);
  EXPECT_THROW(parse_search_space("a float 0 1\n"), Error);
  EXPECT_THROW(parse_search_space("a real 0 1\na real 0 2\n"), Error);
}

TEST(SearchSpace, IntegerSamplesEquallyLikely) {
  SearchSpace s;
  s.dimensions.push_back({"k", DimensionKind::Integer, 1, 4, false});
  std::vector<int> hits(5, 0);
  for (const auto& c : draw_candidates(s, 400, 3)) {
    ASSERT_EQ(c[0], std::round(c[0]));
    ++hits[static_cast<int>(c[0])];
  }
  for (int v = 1; v <= 4; ++v) EXPECT_NEAR(hits[v], 100, 2);
}

TEST(Propose, SingleCandidate) {
  const auto space = problems::integer_square();
  const auto p = propose_next(space, [](std::span<const double>) { return AcquisitionValue{1.0, {}}; }, 1, 5);
  EXPECT_EQ(p.candidate_index, 0u);
  EXPECT_EQ(p.x, draw_candidates(space, 1, 5)[0]);
}

TEST(Propose, ConstantAcquisitionPicksFirst) {
  const auto space = problems::integer_square();
  const auto p = propose_next(space, [](std::span<const double>) { return AcquisitionValue{0.5, {}}; }, 64, 9);
  EXPECT_EQ(p.candidate_index, 0u);
  EXPECT_FALSE(p.fallback);
}

TEST(Propose, FeasibleWheneverAnyCandidateIs) {
  const auto space = problems::integer_square();
  const auto gp = small_gp();
  const auto cons = problems::power_budget(15);  // half the box
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto acq = make_hw_ieci_acquisition(gp, space, 0.3, cons);
    const auto p = propose_next(space, acq, 512, seed);
    bool any = false;
    for (const auto& c : draw_candidates(space, 512, seed)) any |= check_constraints(cons, space.structural(c)).feasible;
    if (any) {
      EXPECT_TRUE(check_constraints(cons, space.structural(p.x)).feasible);
      EXPECT_FALSE(p.fallback);
    }
  }
}

TEST(Propose, FallbackMinimisesViolation) {
  const auto space = problems::integer_square();
  const auto gp = small_gp();
  const auto cons = problems::power_budget(0.5);  // only (0,0) is feasible
  const auto acq = make_hw_ieci_acquisition(gp, space, 0.3, cons);
  const auto cands = draw_candidates(space, 16, 2);
  const auto p = propose_next(space, acq, 16, 2);
  double best = 1e300;
  bool any_feasible = false;
  for (const auto& c : cands) {
    const auto chk = check_constraints(cons, space.structural(c));
    best = std::min(best, chk.violation);
    any_feasible |= chk.feasible;
  }
  if (!any_feasible) {
    EXPECT_TRUE(p.fallback);
    EXPECT_EQ(p.acquisition.check.violation, best);
  }
}

TEST(BoRun, OneDimensionalQuadratic) {
  SearchSpace s;
  s.dimensions.push_back({"x", DimensionKind::Continuous, 0, 1, false});
  QuadraticObjective q;
  q.center = {0.3};
  BoOptions o;
  o.budget = 20;
  o.seed = 1;
  const auto r = bo_run(q.bind(), s, o);
  ASSERT_TRUE(r.best);
  EXPECT_LE(r.best->y, 1e-3);
  ASSERT_EQ(r.trace.records.size(), 20u);
  for (std::size_t i = 1; i < r.trace.records.size(); ++i)
    EXPECT_LE(*r.trace.records[i].best_y, *r.trace.records[i - 1].best_y);
  EXPECT_EQ(r.trace.records[0].kind, ProposalKind::Seed);
  EXPECT_EQ(r.trace.records[1].kind, ProposalKind::Seed);
  EXPECT_NE(r.trace.records[2].kind, ProposalKind::Seed);
}

TEST(BoRun, ConstrainedBestIsFeasible) {
  SearchSpace s;
  s.dimensions.push_back({"x1", DimensionKind::Continuous, 0, 2, true});
  s.dimensions.push_back({"x2", DimensionKind::Continuous, 0, 2, true});
  BoOptions o;
  o.budget = 25;
  o.seed = 4;
  o.constraints = problems::power_budget(1.5);
  auto f = [](std::span<const double> x) -> std::optional<double> {
    return (x[0] - 1) * (x[0] - 1) + (x[1] - 1) * (x[1] - 1);
  };
  const auto r = bo_run(f, s, o);
  ASSERT_TRUE(r.best);
  EXPECT_LE(r.best->x[0] + r.best->x[1], 1.5);
  // Closed-form constrained optimum: (0.75, 0.75), value 0.125.
  EXPECT_GE(r.best->y, 0.125 - 1e-12);
  EXPECT_LT(r.best->y, 0.2);
  for (const auto& rec : r.trace.records)
    if (rec.feasible) {
      ASSERT_TRUE(rec.predicted_power);
      EXPECT_LE(*rec.predicted_power, 1.5);
    }
}

TEST(BoRun, NothingFeasible) {
  auto s = problems::integer_square();
  s.dimensions[0].lo = 1;  // every point now draws at least 1 W
  BoOptions o;
  o.budget = 8;
  o.constraints = problems::power_budget(0.5);
  auto f = [](std::span<const double> x) -> std::optional<double> { return problems::shifted_bowl(x); };
  const auto r = bo_run(f, s, o);
  EXPECT_FALSE(r.best);
  EXPECT_EQ(r.trace.records.size(), 8u);
  for (const auto& rec : r.trace.records) {
    EXPECT_FALSE(rec.best_y);
    if (rec.kind != ProposalKind::Seed) EXPECT_EQ(rec.kind, ProposalKind::Fallback);
  }
}

TEST(BoRun, BudgetBelowSeedingRejected) {
  BoOptions o;
  o.budget = 3;
  EXPECT_THROW(bo_run([](std::span<const double>) { return std::optional<double>(0.0); }, problems::integer_square(), o),
               ConfigError);
}

TEST(BoRun, FailedEvaluationsImputedAsWorst) {
  SearchSpace s;
  s.dimensions.push_back({"x", DimensionKind::Continuous, 0, 1, false});
  auto f = [](std::span<const double> x) -> std::optional<double> {
    if (x[0] > 0.7) return std::nullopt;
    if (x[0] > 0.6) throw std::runtime_error("boom");
    return x[0];
  };
  BoOptions o;
  o.budget = 12;
  const auto r = bo_run(f, s, o);
  double worst = -1e300;
  for (const auto& rec : r.trace.records)
    if (!rec.failed) worst = std::max(worst, rec.y);
  bool any_failed = false;
  for (const auto& rec : r.trace.records)
    if (rec.failed) {
      any_failed = true;
      EXPECT_LE(rec.y, worst);
    }
  EXPECT_TRUE(any_failed);
  EXPECT_NE(format_trace_csv(r.trace).find(",,"), std::string::npos);
}

TEST(BoRun, DeterministicAndScaleInvariant) {
  SearchSpace s;
  s.dimensions.push_back({"a", DimensionKind::Continuous, -1, 1, false});
  s.dimensions.push_back({"b", DimensionKind::Integer, 0, 9, false});
  auto f = [](std::span<const double> x) { return std::optional<double>(std::sin(3 * x[0]) + 0.1 * x[1]); };
  auto g = [&](std::span<const double> x) { return std::optional<double>(2.0 * *f(x)); };
  BoOptions o;
  o.budget = 16;
  o.seed = 77;
  o.candidates = 256;
  const auto a = bo_run(f, s, o), b = bo_run(f, s, o), c = bo_run(g, s, o);
  auto strip = [](Trace t) {
    for (auto& r : t.records) r.wall_seconds = 0;
    return format_trace_csv(t);
  };
  EXPECT_EQ(strip(a.trace), strip(b.trace));
  ASSERT_EQ(a.trace.records.size(), c.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) EXPECT_EQ(a.trace.records[i].x, c.trace.records[i].x);
}

TEST(Trace, CsvLayout) {
  Trace t;
  t.dimension_names = {"u", "v"};
  TraceRecord r;
  r.iteration = 1;
  r.x = {3, 0.5};
  r.y = 0.25;
  r.best_y = 0.25;
  t.records.push_back(r);
  r.iteration = 2;
  r.kind = ProposalKind::Acquisition;
  r.acquisition = 0.125;
  r.failed = true;
  r.predicted_power = 12;
  r.feasible = false;
  t.records.push_back(r);
  EXPECT_EQ(format_trace_csv(t),
            "iter,u,v,acq,y,pred_power,pred_mem,feasible,best_y\n"
            "1,3,0.5,,0.25,,,1,0.25\n"
            "2,3,0.5,0.125,,12,,0,0.25\n");
}

TEST(Objectives, QuadraticAndBranin) {
  QuadraticObjective q;
  q.center = {1, 2};
  q.scale = {2, 1};
  const std::vector<double> x{3, 2};
  EXPECT_EQ(q.value(x), 1.0);
  const std::vector<double> u{(M_PI + 5) / 15, 2.275 / 15};
  EXPECT_NEAR(branin_unit(u), 0.397887, 1e-6);
  QuadraticObjective noisy = q;
  noisy.noise_stddev = 0.1;
  auto f1 = noisy.bind(), f2 = noisy.bind();
  const double a1 = *f1(x), a2 = *f1(x), b1 = *f2(x), b2 = *f2(x);
  EXPECT_EQ(a1, b1);
  EXPECT_EQ(a2, b2);
  EXPECT_NE(a1, a2);
}

TEST(Objectives, ExternalCommand) {
  CommandObjective ok{"awk -F, '{ print $1 * $1 + $2 }'"};
  const std::vector<double> x{3, 0.5};
  ASSERT_TRUE(ok.value(x));
  EXPECT_DOUBLE_EQ(*ok.value(x), 9.5);
  EXPECT_FALSE(CommandObjective{"exit 3"}.value(x));
  EXPECT_FALSE(CommandObjective{"echo not-a-number"}.value(x));
}

}  // namespace
}  // namespace hwml
