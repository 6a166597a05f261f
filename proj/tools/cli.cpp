#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "hwml/analytic.hpp"
#include "hwml/bayesopt.hpp"
#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"
#include "hwml/linmod.hpp"
#include "hwml/netgraph.hpp"
#include "hwml/objectives.hpp"
#include "hwml/polyreg.hpp"
#include "hwml/rng.hpp"
#include "reference.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;

namespace hwml::cli {

namespace {

enum class OutputFormat { Table, Csv };

using Row = std::vector<std::string>;

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string num(double v) { return fmt::format("{}", v); }

// Records everything that affects the outputs of one invocation.
class Session {
 public:
  Session(std::string subcommand, std::uint64_t seed, fs::path output_dir, OutputFormat format)
      : subcommand_(std::move(subcommand)), seed_(seed), output_dir_(std::move(output_dir)), format_(format) {}

  std::uint64_t seed() const noexcept { return seed_; }
  OutputFormat format() const noexcept { return format_; }

  std::string read_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    inputs_.emplace_back(path, fnv1a64(text));
    return text;
  }

  void param(const std::string& key, const std::string& value) { params_[key] = value; }

  // Buffered so that a failing command leaves no partial outputs behind.
  void output(const std::string& name, std::string content) { outputs_.emplace_back(name, std::move(content)); }

  void commit() {
    if (outputs_.empty()) return;
    fs::create_directories(output_dir_);
    for (const auto& [name, content] : outputs_) write(name, content);
    write("manifest.json", manifest());
  }

  std::string manifest() const {
    nlohmann::ordered_json j;
    j["tool"] = "hwml";
    j["version"] = std::string(kToolVersion);
    j["subcommand"] = subcommand_;
    j["seed"] = seed_;
    auto& p = j["parameters"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params_) p[k] = v;
    auto& in = j["inputs"] = nlohmann::ordered_json::array();
    std::string digest_src = subcommand_ + "\n" + std::to_string(seed_) + "\n" + std::string(kToolVersion) + "\n";
    for (const auto& [k, v] : params_) digest_src += k + "=" + v + "\n";
    for (const auto& [path, digest] : inputs_) {
      in.push_back({{"path", path}, {"fnv1a64", hex64(digest)}});
      digest_src += hex64(digest) + "\n";
    }
    j["config_digest"] = hex64(fnv1a64(digest_src));
    auto& out = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [name, content] : outputs_) out.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(content))}});
    return j.dump(2) + "\n";
  }

 private:
  void write(const std::string& name, const std::string& content) const {
    const fs::path path = output_dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw ConfigError("failed writing '" + path.string() + "'");
  }

  std::string subcommand_;
  std::uint64_t seed_;
  fs::path output_dir_;
  OutputFormat format_;
  std::map<std::string, std::string> params_;
  std::vector<std::pair<std::string, std::uint64_t>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

std::string csv_text(const Row& header, const std::vector<Row>& rows) {
  std::string out;
  auto line = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string table_text(const Row& header, const std::vector<Row>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  std::string out;
  auto line = [&](const Row& r) {
    std::string l;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) l += "  ";
      l += i == 0 ? fmt::format("{:<{}}", r[i], width[i]) : fmt::format("{:>{}}", r[i], width[i]);
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  };
  line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : rows) line(r);
  return out;
}

std::string render(OutputFormat format, const Row& header, const std::vector<Row>& rows) {
  return format == OutputFormat::Csv ? csv_text(header, rows) : table_text(header, rows);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t s = 0;
  while (true) {
    const auto c = text.find(',', s);
    out.push_back(parse_double(trim(std::string_view(text).substr(s, c == std::string::npos ? std::string::npos : c - s))));
    if (c == std::string::npos) break;
    s = c + 1;
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + num(v[i]);
  return out;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string profile;
  std::string config;
  std::string models_out = "models.json";
  std::string report_out = "fit_report.csv";
};

int cmd_fit(Session& s, const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto rows = parse_profile_csv(s.read_input(a.profile));
  if (rows.empty()) throw ConfigError("profile '" + a.profile + "' has no data rows");

  std::map<LayerKind, int> degree{{LayerKind::Conv2D, default_degree(LayerKind::Conv2D)},
                                  {LayerKind::FullyConnected, default_degree(LayerKind::FullyConnected)},
                                  {LayerKind::Pool2D, default_degree(LayerKind::Pool2D)}};
  FitConfig base;
  if (!a.config.empty()) {
    const auto kv = KeyValueText::parse(s.read_input(a.config));
    kv.require_only({"degree_conv", "degree_fc", "degree_pool", "l1_strength", "cv_folds", "lambda_grid_size",
                     "lambda_min_ratio"});
    if (kv.has("degree_conv")) degree[LayerKind::Conv2D] = static_cast<int>(kv.get_int("degree_conv"));
    if (kv.has("degree_fc")) degree[LayerKind::FullyConnected] = static_cast<int>(kv.get_int("degree_fc"));
    if (kv.has("degree_pool")) degree[LayerKind::Pool2D] = static_cast<int>(kv.get_int("degree_pool"));
    if (kv.has("l1_strength")) base.l1_strength = kv.get_double("l1_strength");
    if (kv.has("cv_folds")) base.cv_folds = static_cast<int>(kv.get_int("cv_folds"));
    if (kv.has("lambda_grid_size")) base.lambda_grid_size = static_cast<std::size_t>(kv.get_int("lambda_grid_size"));
    if (kv.has("lambda_min_ratio")) base.lambda_min_ratio = kv.get_double("lambda_min_ratio");
  }

  std::vector<PolynomialModel> models;
  std::vector<Row> report;
  for (LayerKind kind : {LayerKind::Conv2D, LayerKind::FullyConnected, LayerKind::Pool2D}) {
    for (Target target : {Target::Runtime_ms, Target::Power_W}) {
      const auto samples = select_samples(rows, kind, target);
      if (samples.empty()) continue;
      const std::string label = fmt::format("{}/{}", to_string(kind), to_string(target));
      if (samples.size() < 2 * static_cast<std::size_t>(std::max(base.cv_folds, 1))) {
        err << fmt::format("warning: skipping {}: {} rows, need at least {}\n", label, samples.size(), 2 * base.cv_folds);
        continue;
      }
      FitConfig cfg = base;
      cfg.degree = degree[kind];
      cfg.seed = derive_seed(s.seed(), "fit-" + label);
      FitResult r = fit(samples, cfg, kind, target);
      for (const auto& w : r.report.warnings) err << "warning: " << label << ": " << w << "\n";
      report.push_back({std::string(to_string(kind)), std::string(to_string(target)), std::to_string(samples.size()),
                        std::to_string(r.model.size()), num(r.report.lambda), fmt::format("{:.4f}", r.report.cross_validated.rmspe),
                        fmt::format("{:.6g}", r.report.cross_validated.rmse)});
      models.push_back(std::move(r.model));
    }
  }
  if (models.empty()) throw InsufficientSamples("no layer kind has enough rows to fit a model");

  const Row header{"kind", "target", "samples", "terms", "lambda", "cv_rmspe_pct", "cv_rmse"};
  s.output(a.models_out, serialize_models(models));
  s.output(a.report_out, csv_text(header, report));
  s.commit();
  out << render(s.format(), header, report);
  return kExitOk;
}

// ------------------------------------------------------------ predict

struct PredictArgs {
  std::string network;
  std::string family = "neuralpower";
  std::string models;
  std::string device;
  std::string energy;
  std::string accesses;
  double sparsity = 0.0;
  std::optional<double> bitwidth;
  std::string out_file = "prediction.csv";
};

int cmd_predict(Session& s, const PredictArgs& a, std::ostream& out) {
  const NetworkConfig net = parse_network(s.read_input(a.network), fs::path(a.network).stem().string());
  if (net.empty()) throw ConfigError("network '" + a.network + "' has no layers");
  Row header;
  std::vector<Row> rows;

  if (a.family == "neuralpower") {
    if (a.models.empty()) throw ConfigError("--family=neuralpower needs --models");
    const ModelSet models(parse_models(s.read_input(a.models)));
    bool full = false;
    for (const auto& m : models.models())
      if (m.target == Target::Power_W) full = true;
    const NetworkPrediction p = full ? predict_network(models, net) : predict_network_runtime(models, net);
    header = full ? Row{"layer", "kind", "runtime_ms", "power_w", "energy_mj", "clamped"}
                  : Row{"layer", "kind", "runtime_ms", "clamped"};
    for (const auto& l : p.layers) {
      if (full)
        rows.push_back({l.layer, std::string(to_string(l.kind)), num(l.runtime_ms), num(l.power_w), num(l.energy_mj),
                        l.clamped ? "1" : "0"});
      else
        rows.push_back({l.layer, std::string(to_string(l.kind)), num(l.runtime_ms), l.clamped ? "1" : "0"});
    }
    if (full) rows.push_back({"TOTAL", "", num(p.runtime_ms), num(p.average_power_w), num(p.energy_mj), ""});
    else rows.push_back({"TOTAL", "", num(p.runtime_ms), ""});
  } else if (a.family == "paleo") {
    if (a.device.empty()) throw ConfigError("--family=paleo needs --device");
    const DeviceSpec device = parse_device_spec(s.read_input(a.device));
    const PaleoNetworkTime t = paleo_network_runtime(net, device);
    header = {"layer", "kind", "read_ms", "compute_ms", "write_ms", "total_ms"};
    for (std::size_t i = 0; i < t.layers.size(); ++i) {
      const auto& l = t.layers[i];
      rows.push_back({l.layer, std::string(to_string(net.layers[i].kind())), num(l.time.read_ms), num(l.time.compute_ms),
                      num(l.time.write_ms), num(l.time.total_ms())});
    }
    rows.push_back({"TOTAL", "", num(t.components.read_ms), num(t.components.compute_ms), num(t.components.write_ms),
                    num(t.total_ms)});
  } else if (a.family == "energy") {
    if (a.energy.empty()) throw ConfigError("--family=energy needs --energy");
    const EnergySpec spec = parse_energy_spec(s.read_input(a.energy));
    std::map<std::string, LayerEnergyInputs> overrides;
    if (!a.accesses.empty()) overrides = parse_access_overrides(s.read_input(a.accesses));
    const EnergyNetworkResult e =
        eyeriss_network_energy(net, spec, overrides, SparsityInfo{a.sparsity}, a.bitwidth.value_or(spec.bitwidth_reference));
    header = {"layer", "kind", "source", "compute_pj", "data_pj", "total_pj"};
    for (std::size_t i = 0; i < e.layers.size(); ++i) {
      const auto& l = e.layers[i];
      rows.push_back({l.layer, std::string(to_string(net.layers[i].kind())),
                      l.source == AccessSource::Default ? "default" : "user", num(l.energy.compute_pj),
                      num(l.energy.data_pj), num(l.energy.total_pj())});
    }
    rows.push_back({"TOTAL", "", "", num(e.compute_pj), num(e.data_pj), num(e.total_pj)});
  } else {
    throw ConfigError("unknown model family '" + a.family + "' (expected neuralpower, paleo or energy)");
  }

  s.output(a.out_file, csv_text(header, rows));
  s.commit();
  out << render(s.format(), header, rows);
  return kExitOk;
}

// ----------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string space;
  std::string constraints;
  std::string objective = "quadratic";
  std::string center;
  std::string scale;
  double noise = 0.0;
  std::string command;
  std::size_t budget = 20;
  std::size_t candidates = 512;
  std::string acquisition = "hw-ieci";
  std::string trace_out = "trace.csv";
  std::string summary_out = "summary.json";
};

ConstraintSpec load_constraints(Session& s, const std::string& path) {
  const auto kv = KeyValueText::parse(s.read_input(path));
  kv.require_only({"power_budget", "power_model", "memory_budget", "memory_model"});
  const fs::path base = fs::path(path).parent_path();
  auto model = [&](const std::string& key) {
    fs::path p = kv.get(key);
    if (p.is_relative()) p = base / p;
    return parse_linear_model(s.read_input(p.string()));
  };
  ConstraintSpec c;
  if (kv.has("power_budget")) c.power_budget = kv.get_double("power_budget");
  if (kv.has("power_model")) c.power_model = model("power_model");
  if (kv.has("memory_budget")) c.memory_budget = kv.get_double("memory_budget");
  if (kv.has("memory_model")) c.memory_model = model("memory_model");
  if (!c.active()) throw ConfigError("constraint file '" + path + "' sets no budget");
  return c;
}

int cmd_optimize(Session& s, const OptimizeArgs& a, std::ostream& out, std::ostream& err) {
  const SearchSpace space = parse_search_space(s.read_input(a.space));
  BoOptions opts;
  opts.budget = a.budget;
  opts.seed = s.seed();
  opts.candidates = a.candidates;
  if (!a.constraints.empty()) opts.constraints = load_constraints(s, a.constraints);
  if (a.acquisition == "ei") opts.gate_acquisition = false;
  else if (a.acquisition != "hw-ieci") throw ConfigError("unknown acquisition '" + a.acquisition + "'");

  Objective objective;
  if (a.objective == "quadratic") {
    QuadraticObjective q;
    if (a.center.empty()) {
      for (const auto& d : space.dimensions) q.center.push_back(0.5 * (d.lo + d.hi));
    } else {
      q.center = parse_list(a.center);
    }
    if (!a.scale.empty()) q.scale = parse_list(a.scale);
    if (q.center.size() != space.size()) throw ConfigError("--center needs one value per search dimension");
    if (!q.scale.empty() && q.scale.size() != space.size()) throw ConfigError("--scale needs one value per search dimension");
    q.noise_stddev = a.noise;
    q.seed = derive_seed(s.seed(), "objective-noise");
    objective = q.bind();
  } else if (a.objective == "branin") {
    if (space.size() != 2) throw ConfigError("branin needs a two-dimensional search space");
    objective = [&space](std::span<const double> x) -> std::optional<double> {
      return branin_unit(space.to_unit(x));
    };
  } else if (a.objective == "command") {
    if (a.command.empty()) throw ConfigError("--objective=command needs --command");
    objective = CommandObjective{a.command}.bind();
  } else {
    throw ConfigError("unknown objective '" + a.objective + "'");
  }

  const BoResult r = bo_run(objective, space, opts);
  std::size_t fallbacks = 0, failures = 0;
  for (const auto& t : r.trace.records) {
    if (t.kind == ProposalKind::Fallback) ++fallbacks;
    if (t.failed) ++failures;
  }
  if (failures) err << fmt::format("warning: {} evaluation(s) failed and were imputed\n", failures);

  nlohmann::ordered_json j;
  j["status"] = r.best ? "ok" : "infeasible";
  j["evaluations"] = r.trace.records.size();
  j["fallback_proposals"] = fallbacks;
  j["failed_evaluations"] = failures;
  if (r.best) {
    j["best_y"] = r.best->y;
    j["best_x"] = r.best->x;
    j["iterations_to_best"] = r.best->iteration;
  } else {
    j["best_y"] = nullptr;
  }
  s.output(a.trace_out, format_trace_csv(r.trace));
  s.output(a.summary_out, j.dump(2) + "\n");
  s.commit();

  std::vector<Row> rows{{"status", r.best ? "ok" : "infeasible"},
                        {"evaluations", std::to_string(r.trace.records.size())},
                        {"fallback_proposals", std::to_string(fallbacks)}};
  if (r.best) {
    rows.push_back({"best_y", num(r.best->y)});
    rows.push_back({"best_x", "\"" + join(r.best->x) + "\""});
    rows.push_back({"iterations_to_best", std::to_string(r.best->iteration)});
  }
  out << render(s.format(), {"key", "value"}, rows);
  if (!r.best) {
    err << "error: no feasible point found\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

// -------------------------------------------------- compare-reference

int cmd_compare_reference(Session& s, std::ostream& out) {
  const Row net_header{"network", "paleo_ms", "neuralpower_ms", "actual_ms", "paleo_error", "neuralpower_error"};
  std::vector<Row> net_rows;
  for (const auto& r : network_runtime_table())
    net_rows.push_back({std::string(r.network), fmt::format("{:.2f}", r.paleo_ms), fmt::format("{:.2f}", r.neuralpower_ms),
                        fmt::format("{:.2f}", r.actual_ms),
                        fmt::format("{:+.2f}%", relative_error_percent(r.paleo_ms, r.actual_ms)),
                        fmt::format("{:+.2f}%", relative_error_percent(r.neuralpower_ms, r.actual_ms))});
  const Row layer_header{"layer", "np_model_size", "np_rmspe", "np_rmse_ms", "paleo_rmspe", "paleo_rmse_ms"};
  std::vector<Row> layer_rows;
  for (const auto& r : layer_model_table())
    layer_rows.push_back({std::string(r.layer), std::string(r.model_size), std::string(r.np_rmspe),
                          std::string(r.np_rmse_ms), std::string(r.paleo_rmspe), std::string(r.paleo_rmse_ms)});

  s.output("reference_networks.csv", csv_text(net_header, net_rows));
  s.output("reference_layers.csv", csv_text(layer_header, layer_rows));
  s.commit();
  out << render(s.format(), net_header, net_rows) << "\n" << render(s.format(), layer_header, layer_rows);
  return kExitOk;
}

// -------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::optional<std::size_t> samples;
  std::optional<double> noise;
  std::string out_file = "profile.csv";
};

int cmd_synth(Session& s, const SynthArgs& a, std::ostream& out) {
  SynthConfig c = a.config.empty() ? default_synth_config() : parse_synth_config(s.read_input(a.config));
  if (a.samples) {
    if (*a.samples == 0) throw ConfigError("--samples must be positive");
    c.samples = *a.samples;
  }
  if (a.noise) {
    if (!(*a.noise >= 0.0)) throw ConfigError("--noise must be non-negative");
    c.noise = *a.noise;
  }
  s.param("effective_config", format_synth_config(c));
  const std::string csv = synthesize_profile_csv(c, s.seed());
  s.output(a.out_file, csv);
  s.commit();
  std::vector<Row> rows;
  for (const auto& g : c.kinds) rows.push_back({std::string(to_string(g.kind)), std::to_string(c.samples), num(c.noise)});
  out << render(s.format(), {"kind", "rows", "noise"}, rows);
  return kExitOk;
}

// ------------------------------------------------------------- sample

struct SampleArgs {
  std::string schema;
  std::size_t count = 0;
  std::string power_weights;
  std::string memory_weights;
  double noise = 0.0;
  std::string out_file = "samples.csv";
};

StructuralSchema parse_structural_schema(std::string_view text) {
  StructuralSchema schema;
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
    if (tok.size() != 3) throw ParseError(line_no, "expected: name lo hi");
    try {
      const double lo = parse_double(tok[1]), hi = parse_double(tok[2]);
      if (lo != std::floor(lo) || hi != std::floor(hi)) throw ConfigError("bounds must be integers");
      schema.dimensions.push_back({tok[0], static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)});
      validate(schema);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  validate(schema);
  return schema;
}

int cmd_sample(Session& s, const SampleArgs& a, std::ostream& out) {
  const StructuralSchema schema = parse_structural_schema(s.read_input(a.schema));
  const auto points = offline_sample(schema, a.count, s.seed());
  if (a.power_weights.empty() != a.memory_weights.empty())
    throw ConfigError("--power-weights and --memory-weights go together");

  std::string csv;
  if (a.power_weights.empty()) {
    for (std::size_t j = 0; j < schema.size(); ++j) csv += (j ? "," : "") + schema.dimensions[j].name;
    csv += "\n";
    for (const auto& p : points) {
      for (std::size_t j = 0; j < p.size(); ++j) csv += (j ? "," : "") + std::to_string(p[j]);
      csv += "\n";
    }
  } else {
    const auto wp = parse_list(a.power_weights), wm = parse_list(a.memory_weights);
    if (wp.size() != schema.size() || wm.size() != schema.size())
      throw ConfigError("weights need one value per structural dimension");
    Rng noise(derive_seed(s.seed(), "sample-noise"));
    ProfiledData data;
    data.schema = schema.names();
    for (const auto& p : points) {
      ProfiledPoint q;
      for (auto v : p) q.z.push_back(static_cast<double>(v));
      for (std::size_t j = 0; j < q.z.size(); ++j) {
        q.power_w += wp[j] * q.z[j];
        q.memory_mb += wm[j] * q.z[j];
      }
      const double np = noise.normal(), nm = noise.normal();
      q.power_w *= 1.0 + a.noise * np;
      q.memory_mb *= 1.0 + a.noise * nm;
      data.points.push_back(std::move(q));
    }
    csv = format_profiled_csv(data);
  }
  s.output(a.out_file, csv);
  s.commit();
  out << render(s.format(), {"file", "points", "dimensions"},
                {{a.out_file, std::to_string(points.size()), std::to_string(schema.size())}});
  return kExitOk;
}

// --------------------------------------------------------- fit-linear

struct FitLinearArgs {
  std::string data;
  std::string target = "both";
  int folds = 10;
  bool bias = false;
};

int cmd_fit_linear(Session& s, const FitLinearArgs& a, std::ostream& out) {
  const ProfiledData data = parse_profiled_csv(s.read_input(a.data));
  std::vector<LinearTarget> targets;
  if (a.target == "power" || a.target == "both") targets.push_back(LinearTarget::Power_W);
  if (a.target == "memory" || a.target == "both") targets.push_back(LinearTarget::Memory_MB);
  if (targets.empty()) throw ConfigError("unknown target '" + a.target + "' (expected power, memory or both)");

  LinearFitOptions opts;
  opts.folds = a.folds;
  opts.seed = s.seed();
  opts.bias = a.bias;
  Row header{"target"};
  for (const auto& n : data.schema) header.push_back("w_" + n);
  if (a.bias) header.push_back("bias");
  header.push_back("cv_rmspe_mean_pct");
  std::vector<Row> rows;
  for (LinearTarget t : targets) {
    const LinearModel m = fit_linear(data.points, data.schema, t, opts);
    Row r{std::string(to_string(t))};
    for (double w : m.weights) r.push_back(num(w));
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : m.cv_rmspe)
      if (!std::isnan(v)) {
        sum += v;
        ++n;
      }
    r.push_back(n ? fmt::format("{:.6g}", sum / static_cast<double>(n)) : "nan");
    rows.push_back(std::move(r));
    s.output(t == LinearTarget::Power_W ? "power_model.json" : "memory_model.json", serialize_linear_model(m));
  }
  s.output("linear_report.csv", csv_text(header, rows));
  s.commit();
  out << render(s.format(), header, rows);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hardware-aware cost models: layer runtime/power/energy prediction and constrained search", "hwml"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::string format = "table";
  app.add_option("--seed", seed, "64-bit seed for every random stream");
  app.add_option("--output-dir", output_dir, "Directory for output files and manifest.json");
  app.add_option("--format", format, "Report format on stdout")->check(CLI::IsMember({"table", "csv"}));

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit sparse polynomial runtime/power models to a profiling CSV");
  fit_cmd->add_option("--profile", fit_args.profile, "Profiling CSV")->required();
  fit_cmd->add_option("--config", fit_args.config, "Fit settings (key = value)");
  fit_cmd->add_option("--models-out", fit_args.models_out, "Model file name");
  fit_cmd->add_option("--report-out", fit_args.report_out, "Metrics report name");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Per-layer and whole-network prediction");
  pred_cmd->add_option("--network", pred.network, "Network description")->required();
  pred_cmd->add_option("--family", pred.family, "Model family")->check(CLI::IsMember({"neuralpower", "paleo", "energy"}));
  pred_cmd->add_option("--models", pred.models, "Polynomial model file (neuralpower)");
  pred_cmd->add_option("--device", pred.device, "Device spec (paleo)");
  pred_cmd->add_option("--energy", pred.energy, "Energy spec (energy)");
  pred_cmd->add_option("--accesses", pred.accesses, "Per-layer access-count overrides (energy)");
  pred_cmd->add_option("--sparsity", pred.sparsity, "Zero fraction for layers without overrides (energy)");
  pred_cmd->add_option("--bitwidth", pred.bitwidth, "Operand bitwidth (energy)");
  pred_cmd->add_option("--out", pred.out_file, "Output CSV name");

  OptimizeArgs opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Constrained Bayesian optimisation over a search space");
  opt_cmd->add_option("--space", opt.space, "Search space description")->required();
  opt_cmd->add_option("--constraints", opt.constraints, "Budgets and linear model files");
  opt_cmd->add_option("--objective", opt.objective, "Objective")->check(CLI::IsMember({"quadratic", "branin", "command"}));
  opt_cmd->add_option("--center", opt.center, "Quadratic center, comma separated");
  opt_cmd->add_option("--scale", opt.scale, "Quadratic per-dimension scale, comma separated");
  opt_cmd->add_option("--noise", opt.noise, "Quadratic additive noise stddev");
  opt_cmd->add_option("--command", opt.command, "Shell command reading x on stdin and printing y");
  opt_cmd->add_option("--budget", opt.budget, "Total objective evaluations");
  opt_cmd->add_option("--candidates", opt.candidates, "Acquisition candidates per iteration");
  opt_cmd->add_option("--acquisition", opt.acquisition, "hw-ieci or ei (ei filters feasibility afterwards)")
      ->check(CLI::IsMember({"hw-ieci", "ei"}));
  opt_cmd->add_option("--trace-out", opt.trace_out, "Trace CSV name");

  auto* ref_cmd = app.add_subcommand("compare-reference", "Relative errors of the embedded published runtimes");

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic profiling CSV");
  syn_cmd->add_option("--config", syn.config, "Generator config");
  syn_cmd->add_option("--samples", syn.samples, "Rows per layer kind");
  syn_cmd->add_option("--noise", syn.noise, "Relative stddev of multiplicative noise");
  syn_cmd->add_option("--out", syn.out_file, "Output CSV name");

  SampleArgs smp;
  auto* smp_cmd = app.add_subcommand("sample", "Uniform offline sample of structural hyper-parameters");
  smp_cmd->add_option("--schema", smp.schema, "Structural schema (name lo hi per line)")->required();
  smp_cmd->add_option("--count", smp.count, "Number of points")->required();
  smp_cmd->add_option("--power-weights", smp.power_weights, "Synthesize power = w . z");
  smp_cmd->add_option("--memory-weights", smp.memory_weights, "Synthesize memory = w . z");
  smp_cmd->add_option("--noise", smp.noise, "Relative stddev of multiplicative noise on synthesized targets");
  smp_cmd->add_option("--out", smp.out_file, "Output CSV name");

  FitLinearArgs fl;
  auto* fl_cmd = app.add_subcommand("fit-linear", "Fit linear power/memory models to profiled points");
  fl_cmd->add_option("--data", fl.data, "Profiled CSV")->required();
  fl_cmd->add_option("--target", fl.target, "power, memory or both")->check(CLI::IsMember({"power", "memory", "both"}));
  fl_cmd->add_option("--folds", fl.folds, "Cross-validation folds");
  fl_cmd->add_flag("--bias", fl.bias, "Add an intercept column");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const OutputFormat fmt_out = format == "csv" ? OutputFormat::Csv : OutputFormat::Table;
  CLI::App* sub = app.get_subcommands().front();
  Session session(sub->get_name(), seed, output_dir, fmt_out);
  // Only options that change file contents go into the digest.
  for (const CLI::Option* o : sub->get_options()) {
    if (o->get_name() == "--help" || o->count() == 0) continue;
    const std::string name = o->get_name();
    if (name == "--output-dir" || name == "--format") continue;
    session.param(name.substr(0, 2) == "--" ? name.substr(2) : name, o->as<std::string>());
  }

  try {
    if (sub == fit_cmd) return cmd_fit(session, fit_args, out, err);
    if (sub == pred_cmd) return cmd_predict(session, pred, out);
    if (sub == opt_cmd) return cmd_optimize(session, opt, out, err);
    if (sub == ref_cmd) return cmd_compare_reference(session, out);
    if (sub == syn_cmd) return cmd_synth(session, syn, out);
    if (sub == smp_cmd) return cmd_sample(session, smp, out);
    if (sub == fl_cmd) return cmd_fit_linear(session, fl, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hwml::cli
