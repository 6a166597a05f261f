// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hwml/analytic.hpp"
#include "hwml/bayesopt.hpp"
#include "hwml/gaussian_process.hpp"
#include "hwml/linmod.hpp"
#include "hwml/netgraph.hpp"
#include "hwml/polyreg.hpp"
#include "hwml/rng.hpp"
#include "oracles.hpp"
#include "problems.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;
using namespace hwml;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(split(line, ','));
  return rows;
}

// ---------------------------------------------------------------- 1

Outcome polynomial_accuracy() {
  const auto t0 = Clock::now();
  const fs::path dir = oracle::scratch_dir("acc1");
  std::string detail;
  bool pass = true;

  for (double noise : {0.05, 0.0}) {
    const double limit = noise > 0 ? 10.0 : 1.0;
    const std::string tag = noise > 0 ? "noisy" : "clean";
    const fs::path out = dir / tag;
    const auto synth = cli({"--seed", "2024", "--output-dir", out.string(), "synth", "--samples", "500", "--noise",
                            fmt::format("{}", noise)});
    const auto fit = cli({"--seed", "2024", "--output-dir", out.string(), "fit", "--profile", (out / "profile.csv").string()});
    if (synth.code != 0 || fit.code != 0) return {false, "cli failed: " + synth.err + fit.err};

    // Held-out set from an independent seed.
    cli::SynthConfig cfg = cli::default_synth_config();
    cfg.samples = 500;
    cfg.noise = noise;
    const auto test_rows = cli::synthesize(cfg, 777);
    const auto models = parse_models(oracle::read_file(out / "models.json"));
    const auto report = csv_rows(oracle::read_file(out / "fit_report.csv"));

    double worst_holdout = 0, worst_cv = 0;
    int seen = 0;
    for (const auto& m : models) {
      const auto samples = select_samples(test_rows, m.layer_kind, m.target);
      const Metrics held = evaluate(m, samples);
      worst_holdout = std::max(worst_holdout, held.rmspe);
      ++seen;
    }
    for (std::size_t i = 1; i < report.size(); ++i) worst_cv = std::max(worst_cv, std::stod(report[i][5]));
    const bool ok = seen == 6 && worst_holdout <= limit && worst_cv <= limit;
    pass = pass && ok;
    detail += fmt::format("{} max held-out RMSPE {:.3f}% / CV {:.3f}% (limit {}%); ", tag, worst_holdout, worst_cv, limit);
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 60.0;
  detail += fmt::format("{:.1f} s (limit 60 s)", elapsed);
  fs::remove_all(dir);
  return {pass, detail};
}

// ---------------------------------------------------------------- 2

Outcome reference_tables() {
  const fs::path dir = oracle::scratch_dir("acc2");
  const auto r = cli({"--output-dir", dir.string(), "compare-reference"});
  if (r.code != 0) return {false, r.err};
  const auto nets = csv_rows(oracle::read_file(dir / "reference_networks.csv"));
  const auto layers = csv_rows(oracle::read_file(dir / "reference_layers.csv"));
  fs::remove_all(dir);

  struct Published {
    const char* name;
    double paleo, np, actual;
    double paleo_err, np_err;  // as stated, in percent
  };
  const Published table[] = {
      {"VGG-16", 345.83, 373.82, 368.42, -6.13, +1.47},
      {"AlexNet", 33.16, 43.41, 39.02, -15.02, +11.25},
      {"NIN", 45.68, 62.62, 50.66, -9.83, +23.61},
      {"Overfeat", 114.71, 195.21, 197.99, -42.06, -1.40},
      {"CIFAR10-6conv", 28.75, 51.13, 50.09, -42.60, +2.08},
  };
  if (nets.size() != 6) return {false, "expected five network rows"};
  double worst = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& row = nets[i + 1];
    const auto& p = table[i];
    if (row[0] != p.name) return {false, "row order differs at " + row[0]};
    const double printed_paleo = std::stod(row[4].substr(0, row[4].size() - 1));
    const double printed_np = std::stod(row[5].substr(0, row[5].size() - 1));
    const double exact_paleo = 100.0 * (p.paleo - p.actual) / p.actual;
    const double exact_np = 100.0 * (p.np - p.actual) / p.actual;
    for (double d : {printed_paleo - exact_paleo, printed_np - exact_np, printed_paleo - p.paleo_err,
                     printed_np - p.np_err})
      worst = std::max(worst, std::abs(d));
  }
  const std::vector<std::vector<std::string>> table1 = {
      {"layer", "np_model_size", "np_rmspe", "np_rmse_ms", "paleo_rmspe", "paleo_rmse_ms"},
      {"CONV", "60", "39.97%", "1.019", "58.29%", "4.304"},
      {"FC", "17", "41.92%", "0.7474", "73.76%", "0.8265"},
      {"Pool", "31", "11.41%", "0.0686", "79.91%", "1.763"},
  };
  const bool verbatim = layers == table1;
  return {worst <= 0.01 + 1e-12 && verbatim,
          fmt::format("max error deviation {:.4f} pp (limit 0.01); table 1 {}", worst,
                      verbatim ? "verbatim" : "differs")};
}

// ---------------------------------------------------------------- 3

Outcome gp_oracle() {
  Rng rng(31337);
  double worst = 0;
  int queries = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t dims = static_cast<std::size_t>(rng.uniform_int(1, 3));
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(0, 10));
    GpHyperparameters h;
    for (std::size_t d = 0; d < dims; ++d) h.length_scales.push_back(0.1 * std::pow(10.0, rng.uniform()));
    h.signal_variance = 0.5 + 2.5 * rng.uniform();
    h.noise_variance = h.signal_variance * std::pow(10.0, -4 + 3 * rng.uniform());
    h.prior_mean = rng.normal();
    std::vector<GpObservation> obs;
    for (std::size_t i = 0; i < n; ++i) {
      GpObservation o;
      for (std::size_t d = 0; d < dims; ++d) o.x.push_back(rng.uniform());
      o.y = 2 * rng.normal();
      obs.push_back(o);
    }
    const GaussianProcess gp(h, obs);
    oracle::DenseGpInstance dense;
    for (const auto& o : obs) {
      dense.x.push_back(o.x);
      dense.y.push_back(o.y);
    }
    dense.length_scales = h.length_scales;
    dense.signal_variance = h.signal_variance;
    dense.diagonal = h.noise_variance + gp.jitter();
    dense.prior_mean = h.prior_mean;

    std::vector<std::vector<double>> qs(dense.x.begin(), dense.x.end());
    for (int q = 0; q < 10; ++q) {
      std::vector<double> x;
      for (std::size_t d = 0; d < dims; ++d) x.push_back(rng.uniform());
      qs.push_back(x);
    }
    for (const auto& x : qs) {
      const auto got = gp.posterior(x);
      const auto want = oracle::dense_gp_posterior(dense, x);
      worst = std::max({worst, std::abs(got.mean - want.mean), std::abs(got.variance - want.variance)});
      ++queries;
    }
  }
  return {worst <= 1e-8, fmt::format("50 instances, {} queries, max |diff| {:.3e} (limit 1e-8)", queries, worst)};
}

// ---------------------------------------------------------------- 4

Outcome ei_quadrature() {
  double worst = 0;
  int points = 0;
  for (int i = 0; i < 20; ++i) {
    const double mu = -2.0 + 4.0 * i / 19.0;
    for (int j = 0; j < 20; ++j) {
      const double s = 1e-3 * std::pow(1e4, j / 19.0);
      for (double y_best : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        worst = std::max(worst, std::abs(expected_improvement(mu, s, y_best) - oracle::ei_quadrature(mu, s, y_best)));
        ++points;
      }
    }
  }
  return {worst <= 1e-6, fmt::format("{} grid points, max |diff| {:.3e} (limit 1e-6)", points, worst)};
}

// ---------------------------------------------------------------- 5

Outcome hw_ieci_gating() {
  std::size_t proposals = 0, violations = 0, unflagged = 0, fallbacks = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const bool tight = seed >= 10;
    auto space = problems::integer_square();
    BoOptions o;
    o.seed = seed;
    o.budget = 30;
    o.constraints = problems::power_budget(tight ? 2.5 : problems::kBowlBudget);
    o.constraints->memory_budget = tight ? 40.0 : 36.0;
    o.constraints->memory_model = problems::sum_model(LinearTarget::Memory_MB, 2.0, 1.5);
    o.candidates = tight ? 16 : 512;
    const auto r = bo_run([](std::span<const double> x) { return std::optional<double>(problems::shifted_bowl(x)); },
                          space, o);
    const double pb = *o.constraints->power_budget, mb = *o.constraints->memory_budget;
    for (const auto& rec : r.trace.records) {
      if (rec.kind == ProposalKind::Seed) continue;
      ++proposals;
      // Recompute the predicted budgets independently of the library.
      const double p = rec.x[0] + rec.x[1];
      const double m = 2.0 * rec.x[0] + 1.5 * rec.x[1];
      const bool violates = p > pb || m > mb;
      if (rec.kind == ProposalKind::Fallback) {
        ++fallbacks;
        if (rec.acquisition && *rec.acquisition > 0) ++unflagged;
        continue;
      }
      if (violates) ++violations;
      if (!rec.acquisition || !(*rec.acquisition > 0)) ++unflagged;
    }
  }
  return {violations == 0 && unflagged == 0 && fallbacks > 0,
          fmt::format("{} proposals over 20 runs, {} violating non-fallback, {} mis-flagged, {} fallbacks", proposals,
                      violations, unflagged, fallbacks)};
}

// ---------------------------------------------------------------- 6

std::size_t iterations_to_target(const BoResult& r, double target) {
  for (const auto& rec : r.trace.records) {
    if (rec.failed) continue;
    const bool feasible = rec.x[0] + rec.x[1] <= problems::kBowlBudget;
    if (feasible && rec.y <= target) return rec.iteration;
  }
  return 51;
}

double median(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? double(v[n / 2]) : 0.5 * (double(v[n / 2 - 1]) + double(v[n / 2]));
}

Outcome constrained_convergence() {
  const auto t0 = Clock::now();
  const double target = 1.01 * problems::kBowlConstrainedOptimum;
  std::vector<std::size_t> hw, ei;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (bool gate : {true, false}) {
      BoOptions o;
      o.seed = seed;
      o.budget = 50;
      o.constraints = problems::power_budget(problems::kBowlBudget);
      o.gate_acquisition = gate;
      const auto r = bo_run(
          [](std::span<const double> x) { return std::optional<double>(problems::shifted_bowl(x)); },
          problems::integer_square(), o);
      (gate ? hw : ei).push_back(iterations_to_target(r, target));
    }
  const double m_hw = median(hw), m_ei = median(ei);
  const double elapsed = seconds_since(t0);
  return {m_hw < m_ei && elapsed < 300.0,
          fmt::format("median iterations HW-IECI {} vs EI {} (51 = not reached); {:.1f} s (limit 300 s)", m_hw, m_ei,
                      elapsed)};
}

// ---------------------------------------------------------------- 7

Outcome analytic_exactness() {
  // Dyadic device so every term is exact in binary floating point.
  DeviceSpec d;
  d.peak_flops = 1073741824.0;     // 2^30
  d.read_bandwidth = 268435456.0;  // 2^28
  d.write_bandwidth = 134217728.0; // 2^27
  d.ppp_compute = 0.5;
  d.ppp_io = 0.25;
  d.bytes_per_element = 2;

  struct Fixture {
    LayerConfig layer;
    Count flops, reads, writes;  // by hand
  };
  const std::vector<Fixture> fixtures = {
      // 1x1x3x3 input, 3x3 kernel, one output: 9 MACs, 9 weights.
      {make_conv("c1", {1, 1, 3, 3}, {3, 3, 1, 0}, 1), 18, 9 + 9, 1},
      // 2x3x8x8, 3x3 s1 p1 -> 2x16x8x8; MACs 2*16*64*27.
      {make_conv("c2", {2, 3, 8, 8}, {3, 3, 1, 1}, 16), 2 * 2 * 16 * 64 * 27, 384 + 432, 2 * 16 * 64},
      // 1x1x5x5, 3x3 s2 -> 2x2.
      {make_conv("c3", {1, 1, 5, 5}, {3, 3, 2, 0}, 1), 2 * 4 * 9, 25 + 9, 4},
      // 1x4x6x6, 1x1 -> 8 channels.
      {make_conv("c4", {1, 4, 6, 6}, {1, 1, 1, 0}, 8), 2 * 36 * 8 * 4, 144 + 32, 288},
      // 1x2x7x7, 5x5 s2 p2 -> 4x4 x 3.
      {make_conv("c5", {1, 2, 7, 7}, {5, 5, 2, 2}, 3), 2 * 16 * 3 * 50, 98 + 150, 48},
      {make_fc("f1", {1, 4, 1, 1}, 2), 16, 4 + 8, 2},
      {make_fc("f2", {3, 2, 2, 2}, 5), 2 * 3 * 8 * 5, 24 + 40, 15},
      // 1x2x4x4 pool 2 s2: 8 outputs, 4 comparisons each.
      {make_pool("p1", {1, 2, 4, 4}, {2, 2, 2, 0}), 32, 32, 8},
      // 2x1x5x5 pool 3 s1 -> 3x3.
      {make_pool("p2", {2, 1, 5, 5}, {3, 3, 1, 0}), 2 * 9 * 9, 50, 18},
      // 1x3x8x8 pool 2 s2 p1 -> 5x5.
      {make_pool("p3", {1, 3, 8, 8}, {2, 2, 2, 1}), 3 * 25 * 4, 192, 75},
  };
  int paleo_exact = 0;
  for (const auto& f : fixtures) {
    const auto t = paleo_layer_runtime(f.layer, d);
    const double c = 1000.0 * double(f.flops) / (d.peak_flops * d.ppp_compute);
    const double r = 1000.0 * double(f.reads) * d.bytes_per_element / (d.read_bandwidth * d.ppp_io);
    const double w = 1000.0 * double(f.writes) * d.bytes_per_element / (d.write_bandwidth * d.ppp_io);
    if (t.compute_ms == c && t.read_ms == r && t.write_ms == w && t.total_ms() == r + c + w) ++paleo_exact;
  }

  EnergySpec spec;
  spec.e_mac_pj = 0.75;
  spec.levels = {{"DRAM", 200.0}};
  spec.bitwidth_reference = 16;
  int layers = 0, energy_exact = 0, zero_ok = 0;
  auto check = [&](const LayerConfig& l) {
    ++layers;
    const auto acc = default_access_profile(l);
    bool ok = true;
    for (double zf : {0.0, 0.25})
      for (double bw : {16.0, 8.0}) {
        const double got = eyeriss_layer_energy(l, spec, acc, {zf}, bw).total_pj();
        ok = ok && got == oracle::loop_nest_energy_pj(l, 0.75, 200.0, zf, bw, 16.0);
      }
    energy_exact += ok;
    const auto full = eyeriss_layer_energy(l, spec, acc, {1.0}, 16);
    zero_ok += full.total_pj() == 0.0 && full.compute_pj == 0.0 && full.data_pj == 0.0;
  };
  for (Count b : {1, 2, 8})
    for (Count c : {1, 3, 8})
      for (Count hw = 1; hw <= 8; ++hw) {
        for (Count out : {1, 5, 8}) check(make_fc("f", {b, c, hw, hw}, out));
        for (Count k = 1; k <= 3; ++k)
          for (Count s = 1; s <= 2; ++s)
            for (Count p = 0; p <= 1; ++p) {
              if (k > hw + 2 * p || oracle::placements(hw, k, s, p) < 1) continue;
              check(make_pool("p", {b, c, hw, hw}, {k, k, s, p}));
              for (Count oc : {1, 8}) check(make_conv("c", {b, c, hw, hw}, {k, k, s, p}, oc));
            }
      }
  const bool pass = paleo_exact == 10 && energy_exact == layers && zero_ok == layers;
  return {pass, fmt::format("paleo {}/10 fixtures exact; energy {}/{} layers exact; sparsity=1 zero on {}/{}",
                            paleo_exact, energy_exact, layers, zero_ok, layers)};
}

// ---------------------------------------------------------------- 8

Outcome linear_recovery() {
  StructuralSchema schema;
  schema.dimensions = {{"units1", 8, 512}, {"units2", 8, 512}, {"filters", 16, 256}};
  const std::vector<double> wp{1.5, 0.2, 0.05}, wm{0.004, 0.012, 0.75};
  const auto z = offline_sample(schema, 200, 12);
  std::vector<ProfiledPoint> pts, noisy;
  Rng noise(4);
  for (const auto& p : z) {
    ProfiledPoint q;
    for (std::size_t j = 0; j < p.size(); ++j) {
      q.z.push_back(double(p[j]));
      q.power_w += wp[j] * double(p[j]);
      q.memory_mb += wm[j] * double(p[j]);
    }
    pts.push_back(q);
    q.power_w *= 1 + 0.03 * noise.normal();
    noisy.push_back(q);
  }
  const auto names = schema.names();
  double worst = 0;
  for (auto [target, w] : {std::pair{LinearTarget::Power_W, wp}, std::pair{LinearTarget::Memory_MB, wm}}) {
    const auto m = fit_linear(pts, names, target);
    for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(m.weights[j] - w[j]));
  }
  LinearFitOptions opts;
  opts.seed = 2718;
  const auto a = fit_linear(noisy, names, LinearTarget::Power_W, opts);
  const auto b = fit_linear(noisy, names, LinearTarget::Power_W, opts);
  const bool deterministic = a.cv_rmspe == b.cv_rmspe && a.cv_rmspe.size() == 10 &&
                             serialize_linear_model(a) == serialize_linear_model(b);
  return {worst <= 1e-6 && deterministic,
          fmt::format("max weight error {:.3e} (limit 1e-6); 10-fold CV report {}", worst,
                      deterministic ? "identical across runs" : "differs")};
}

// ---------------------------------------------------------------- 9

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = oracle::read_file(e.path());
  return files;
}

Outcome cli_determinism() {
  const fs::path root = oracle::scratch_dir("acc9");
  const fs::path in = root / "inputs";
  fs::create_directories(in);
  write(in / "net.txt",
        "c1 conv in=1x3x32x32 k=3 s=1 p=1 out=16\np1 pool k=2 s=2\nc2 conv k=3 p=1 out=32\nf1 fc out=10\n");
  write(in / "device.txt", "peak_flops = 4e12\nread_bandwidth = 2e11\nwrite_bandwidth = 1e11\nppp_compute = 0.6\n");
  write(in / "energy.txt", "e_mac = 1\nlevels = DRAM:200, RF:1\nbitwidth_reference = 16\n");
  write(in / "access.txt", "c2 DRAM=1000 RF=50000\n");
  write(in / "schema.txt", "units1 8 64\nunits2 8 64\n");
  write(in / "space.txt", "units1 int 8 64 structural\nunits2 int 8 64 structural\nlr real 0 1\n");
  write(in / "cons.txt", "power_budget = 40\npower_model = lin/power_model.json\nmemory_budget = 300\n"
                         "memory_model = lin/memory_model.json\n");
  write(in / "space2.txt", "a real 0 1\nb real 0 1\n");

  // Inputs produced by the tool itself.
  const std::string seed = "99";
  if (cli({"--seed", seed, "--output-dir", (in / "prof").string(), "synth", "--samples", "60", "--noise", "0.05"}).code ||
      cli({"--seed", seed, "--output-dir", (in / "models").string(), "fit", "--profile", (in / "prof/profile.csv").string()}).code ||
      cli({"--seed", seed, "--output-dir", (in / "lin").string(), "sample", "--schema", (in / "schema.txt").string(),
           "--count", "40", "--power-weights", "0.5,0.25", "--memory-weights", "2,3", "--noise", "0.02"}).code ||
      cli({"--seed", seed, "--output-dir", (in / "lin").string(), "fit-linear", "--data", (in / "lin/samples.csv").string()}).code)
    return {false, "could not prepare inputs"};

  const auto f = [&](const std::string& name) { return (in / name).string(); };
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"compare-reference", {"compare-reference"}},
      {"synth", {"synth", "--samples", "40", "--noise", "0.05"}},
      {"fit", {"fit", "--profile", f("prof/profile.csv")}},
      {"predict neuralpower", {"predict", "--network", f("net.txt"), "--models", f("models/models.json")}},
      {"predict paleo", {"predict", "--network", f("net.txt"), "--family", "paleo", "--device", f("device.txt")}},
      {"predict energy", {"predict", "--network", f("net.txt"), "--family", "energy", "--energy", f("energy.txt"),
                          "--accesses", f("access.txt"), "--sparsity", "0.25", "--bitwidth", "8"}},
      {"sample", {"sample", "--schema", f("schema.txt"), "--count", "30", "--power-weights", "1,2", "--memory-weights",
                  "3,4", "--noise", "0.05"}},
      {"fit-linear", {"fit-linear", "--data", f("lin/samples.csv")}},
      {"optimize", {"optimize", "--space", f("space.txt"), "--constraints", f("cons.txt"), "--budget", "14", "--noise",
                    "0.01"}},
      {"optimize branin", {"optimize", "--space", f("space2.txt"), "--objective", "branin", "--budget", "10",
                           "--format", "csv"}},
  };
  int identical = 0;
  std::string differing;
  for (const auto& [label, args] : commands) {
    std::array<std::pair<CliRun, std::map<std::string, std::string>>, 2> runs;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = root / fmt::format("run{}", k) / std::to_string(identical) / label;
      std::vector<std::string> full{"--seed", seed, "--output-dir", out.string()};
      full.insert(full.end(), args.begin(), args.end());
      runs[k].first = cli(full);
      runs[k].second = fs::exists(out) ? snapshot(out) : std::map<std::string, std::string>{};
    }
    const bool same = runs[0].first.code == 0 && runs[0].first.code == runs[1].first.code &&
                      runs[0].first.out == runs[1].first.out && runs[0].second == runs[1].second &&
                      !runs[0].second.empty();
    if (same) ++identical;
    else differing += " " + label;
  }
  fs::remove_all(root);
  return {identical == static_cast<int>(commands.size()),
          fmt::format("{}/{} invocations byte-identical (stdout and every output file){}", identical, commands.size(),
                      differing.empty() ? "" : "; differing:" + differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"polynomial model accuracy on synthetic profiles", polynomial_accuracy},
      {"reference table reproduction", reference_tables},
      {"GP posterior vs dense-inverse oracle", gp_oracle},
      {"EI closed form vs quadrature", ei_quadrature},
      {"HW-IECI gating over constrained traces", hw_ieci_gating},
      {"constrained convergence HW-IECI vs EI", constrained_convergence},
      {"analytic model exactness", analytic_exactness},
      {"linear model recovery and CV determinism", linear_recovery},
      {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("{} [{}] {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
