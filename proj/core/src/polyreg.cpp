#include "hwml/polyreg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"
#include "hwml/rng.hpp"
#include "lasso.hpp"

namespace hwml {

std::string_view to_string(Target target) noexcept {
  return target == Target::Runtime_ms ? "runtime_ms" : "power_w";
}

Target parse_target(std::string_view text) {
  if (text == "runtime_ms" || text == "runtime") return Target::Runtime_ms;
  if (text == "power_w" || text == "power") return Target::Power_W;
  throw ConfigError("unknown target '" + std::string(text) + "'");
}

std::string_view to_string(SpecialTerm term) noexcept {
  return term == SpecialTerm::TotalFlops ? "TotalFlops" : "TotalMemAccesses";
}

SpecialTerm parse_special_term(std::string_view text) {
  if (text == "TotalFlops") return SpecialTerm::TotalFlops;
  if (text == "TotalMemAccesses") return SpecialTerm::TotalMemAccesses;
  throw ConfigError("unknown special term '" + std::string(text) + "'");
}

const std::vector<std::string>& feature_schema(LayerKind kind) {
  static const std::vector<std::string> conv{"batch", "in_c",    "in_hw", "kernel_hw",
                                             "stride", "padding", "out_c", "out_hw"};
  static const std::vector<std::string> fc{"batch", "in_units", "out_units"};
  static const std::vector<std::string> pool{"batch", "in_c", "in_hw", "kernel_hw", "stride", "out_hw"};
  switch (kind) {
    case LayerKind::Conv2D: return conv;
    case LayerKind::FullyConnected: return fc;
    case LayerKind::Pool2D: return pool;
  }
  return fc;
}

namespace {

double spatial(Count h, Count w) {
  return h == w ? static_cast<double>(h) : std::sqrt(static_cast<double>(h) * static_cast<double>(w));
}

}  // namespace

FeatureVector build_features(const LayerConfig& layer) {
  FeatureVector f;
  f.schema = feature_schema(layer.kind());
  const TensorShape& in = layer.input;
  const auto b = static_cast<double>(in.batch);
  if (const auto* fc = std::get_if<FullyConnected>(&layer.op)) {
    f.values = {b, static_cast<double>(in.flat_features()), static_cast<double>(fc->output_units)};
    return f;
  }
  const TensorShape out = infer_output_shape(layer);
  const Window& w = *layer.window();
  const double in_c = static_cast<double>(in.channels);
  const double in_hw = spatial(in.height, in.width);
  const double k_hw = spatial(w.kernel_h, w.kernel_w);
  const double out_hw = spatial(out.height, out.width);
  if (layer.kind() == LayerKind::Conv2D) {
    f.values = {b,
                in_c,
                in_hw,
                k_hw,
                static_cast<double>(w.stride),
                static_cast<double>(w.padding),
                static_cast<double>(out.channels),
                out_hw};
  } else {
    f.values = {b, in_c, in_hw, k_hw, static_cast<double>(w.stride), out_hw};
  }
  return f;
}

std::vector<double> special_terms(const LayerConfig& layer) {
  const OpCounts c = count_ops(layer);
  return {static_cast<double>(c.flops), static_cast<double>(c.memory_accesses())};
}

std::vector<Exponents> enumerate_terms(std::size_t dims, int degree) {
  std::vector<Exponents> terms;
  if (dims == 0 || degree < 0) return terms;
  Exponents current(dims, 0);
  // Distributes `remaining` over positions [pos, dims), largest first.
  auto fill = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == dims) {
      current[pos] = remaining;
      terms.push_back(current);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[pos] = e;
      self(self, pos + 1, remaining - e);
    }
    current[pos] = 0;
  };
  for (int d = 0; d <= degree; ++d) fill(fill, 0, d);
  return terms;
}

namespace {

double monomial(std::span<const double> x, const Exponents& q) {
  double value = 1.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (int e = 0; e < q[i]; ++e) value *= x[i];
  return value;
}

bool is_constant(const Exponents& q) {
  return std::all_of(q.begin(), q.end(), [](int e) { return e == 0; });
}

std::size_t special_index(SpecialTerm id) { return id == SpecialTerm::TotalFlops ? 0 : 1; }

}  // namespace

std::size_t PolynomialModel::size() const noexcept {
  std::size_t n = 0;
  for (const auto& t : terms) n += t.coefficient != 0.0;
  for (const auto& s : special_terms) n += s.coefficient != 0.0;
  return n;
}

double PolynomialModel::evaluate(std::span<const double> features, std::span<const double> specials) const {
  if (features.size() != schema.size()) throw ConfigError("feature vector does not match model schema");
  double value = 0.0;
  for (const auto& t : terms) value += t.coefficient * monomial(features, t.exponents);
  for (const auto& s : special_terms) {
    const std::size_t idx = special_index(s.id);
    if (idx >= specials.size()) throw ConfigError("missing special term value");
    value += s.coefficient * specials[idx];
  }
  return value;
}

int default_degree(LayerKind kind) noexcept { return kind == LayerKind::Conv2D ? 3 : 2; }

Metrics compute_metrics(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw ConfigError("prediction/actual length mismatch");
  if (actual.empty()) throw InsufficientSamples("metrics need at least one sample");
  Metrics m;
  m.count = actual.size();
  double sq = 0.0, rel_sq = 0.0;
  std::size_t rel_count = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double err = predicted[i] - actual[i];
    sq += err * err;
    if (actual[i] == 0.0) {
      ++m.excluded;
      continue;
    }
    const double rel = err / actual[i];
    rel_sq += rel * rel;
    ++rel_count;
  }
  m.rmse = std::sqrt(sq / static_cast<double>(actual.size()));
  m.rmspe = rel_count ? 100.0 * std::sqrt(rel_sq / static_cast<double>(rel_count))
                      : std::numeric_limits<double>::quiet_NaN();
  return m;
}

namespace {

constexpr double kDropThreshold = 1e-12;

struct Design {
  std::vector<Exponents> regular;  // non-constant terms, column order
  Eigen::MatrixXd x;               // regular columns, then specials
  Eigen::VectorXd y;
};

Design build_design(const RegressionData& data, int degree) {
  Design d;
  for (auto& q : enumerate_terms(data.schema.size(), degree))
    if (!is_constant(q)) d.regular.push_back(std::move(q));
  const auto n = static_cast<Eigen::Index>(data.targets.size());
  const auto p_reg = static_cast<Eigen::Index>(d.regular.size());
  const auto p = p_reg + static_cast<Eigen::Index>(data.special_ids.size());
  d.x.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = data.features[static_cast<std::size_t>(i)];
    if (row.size() != data.schema.size()) throw ConfigError("feature row does not match schema");
    for (Eigen::Index j = 0; j < p_reg; ++j) d.x(i, j) = monomial(row, d.regular[static_cast<std::size_t>(j)]);
    const auto& sp = data.specials[static_cast<std::size_t>(i)];
    if (sp.size() != data.special_ids.size()) throw ConfigError("special-term row does not match ids");
    for (std::size_t s = 0; s < sp.size(); ++s) d.x(i, p_reg + static_cast<Eigen::Index>(s)) = sp[s];
    d.y(i) = data.targets[static_cast<std::size_t>(i)];
  }
  return d;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(rows[r]);
  return out;
}

// Solves along `lambdas` (descending) with warm starts; calls
// visit(index, beta) after each solve.
template <typename Visit>
void run_path(const detail::LassoProblem& problem, const std::vector<double>& lambdas, Visit&& visit) {
  const std::vector<Eigen::VectorXd> betas = problem.path(lambdas);
  for (std::size_t i = 0; i < lambdas.size(); ++i) visit(i, betas[i]);
}

Eigen::VectorXd raw_predictions(const detail::LassoProblem& problem, const Eigen::VectorXd& beta,
                                const Eigen::MatrixXd& x) {
  Eigen::VectorXd coef;
  double intercept;
  problem.to_raw(beta, coef, intercept);
  Eigen::VectorXd pred = (x * coef).array() + intercept;
  return pred.cwiseMax(0.0);
}

PolynomialModel constant_model(const RegressionData& data, LayerKind kind, Target target, int degree,
                               double value) {
  PolynomialModel model;
  model.layer_kind = kind;
  model.target = target;
  model.degree = degree;
  model.schema = data.schema;
  if (value != 0.0) model.terms.push_back({Exponents(data.schema.size(), 0), value});
  return model;
}

}  // namespace

FitResult fit_polynomial(const RegressionData& data, const FitConfig& config, LayerKind kind, Target target) {
  if (config.degree < 0) throw ConfigError("degree must be non-negative");
  if (config.l1_strength && *config.l1_strength < 0) throw ConfigError("l1 strength must be non-negative");
  const bool select_by_cv = !config.l1_strength.has_value();
  if (select_by_cv && config.cv_folds < 2) throw ConfigError("cross-validated lambda needs cv_folds >= 2");
  const std::size_t n = data.targets.size();
  if (n < 2 * static_cast<std::size_t>(std::max(config.cv_folds, 1)) || n == 0)
    throw InsufficientSamples(std::string(to_string(kind)) + "/" + std::string(to_string(target)) + ": " +
                              std::to_string(n) + " samples, need at least " +
                              std::to_string(2 * std::max(config.cv_folds, 1)));
  if (data.features.size() != n || data.specials.size() != n)
    throw ConfigError("regression data rows are inconsistent");

  FitResult result;
  const bool degenerate =
      std::all_of(data.targets.begin(), data.targets.end(), [&](double v) { return v == data.targets.front(); });
  if (degenerate) {
    result.model = constant_model(data, kind, target, config.degree, data.targets.front());
    result.report.warnings.push_back("all targets identical; fitted a constant model");
    const std::vector<double> pred(n, std::max(0.0, data.targets.front()));
    result.report.cross_validated = compute_metrics(pred, data.targets);
    return result;
  }

  const Design design = build_design(data, config.degree);
  const detail::LassoProblem full(design.x, design.y);

  std::vector<double> grid;
  if (select_by_cv) {
    const double top = full.lambda_max();
    const std::size_t count = std::max<std::size_t>(config.lambda_grid_size, 1);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      grid.push_back(top * std::pow(config.lambda_min_ratio, t));
    }
  } else {
    grid.push_back(*config.l1_strength);
  }

  // Fold assignment depends only on (sample order, seed).
  std::size_t chosen = 0;
  if (config.cv_folds >= 2) {
    const auto folds = static_cast<std::size_t>(config.cv_folds);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(config.seed, "cv-folds"));
    rng.shuffle(order);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = i % folds;

    std::vector<std::vector<double>> oof(grid.size(), std::vector<double>(n, 0.0));
    std::vector<double> mean_rmspe(grid.size(), 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> train, test;
      for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
      const detail::LassoProblem problem(select_rows(design.x, train), select_rows(design.y, train));
      const Eigen::MatrixXd x_test = select_rows(design.x, test);
      std::vector<double> actual(test.size());
      for (std::size_t t = 0; t < test.size(); ++t) actual[t] = design.y(test[t]);
      run_path(problem, grid, [&](std::size_t li, const Eigen::VectorXd& beta) {
        const Eigen::VectorXd pred = raw_predictions(problem, beta, x_test);
        std::vector<double> p(pred.data(), pred.data() + pred.size());
        for (std::size_t t = 0; t < test.size(); ++t) oof[li][static_cast<std::size_t>(test[t])] = p[t];
        const Metrics m = compute_metrics(p, actual);
        mean_rmspe[li] += (std::isnan(m.rmspe) ? 0.0 : m.rmspe) / static_cast<double>(folds);
      });
    }
    for (std::size_t li = 1; li < grid.size(); ++li)
      if (mean_rmspe[li] < mean_rmspe[chosen]) chosen = li;
    result.report.cross_validated = compute_metrics(oof[chosen], data.targets);
    if (select_by_cv) {
      result.report.lambda_grid = grid;
      result.report.cv_rmspe = mean_rmspe;
    }
  }
  const double lambda = grid[chosen];
  result.report.lambda = lambda;

  std::vector<double> path(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(chosen) + 1);
  Eigen::VectorXd beta;
  run_path(full, path, [&](std::size_t, const Eigen::VectorXd& b) { beta = b; });
  result.report.max_abs_gradient = full.kkt_violation(beta, lambda);

  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (std::abs(beta(j)) < kDropThreshold) beta(j) = 0.0;
  Eigen::VectorXd coef;
  double intercept;
  full.to_raw(beta, coef, intercept);

  PolynomialModel& model = result.model;
  model.layer_kind = kind;
  model.target = target;
  model.degree = config.degree;
  model.schema = data.schema;
  if (std::abs(intercept) >= kDropThreshold) model.terms.push_back({Exponents(data.schema.size(), 0), intercept});
  const auto p_reg = static_cast<Eigen::Index>(design.regular.size());
  for (Eigen::Index j = 0; j < p_reg; ++j)
    if (coef(j) != 0.0) model.terms.push_back({design.regular[static_cast<std::size_t>(j)], coef(j)});
  for (std::size_t s = 0; s < data.special_ids.size(); ++s) {
    const double c = coef(p_reg + static_cast<Eigen::Index>(s));
    if (c != 0.0) model.special_terms.push_back({data.special_ids[s], c});
  }
  return result;
}

RegressionData make_regression_data(std::span<const LayerSample> samples) {
  RegressionData data;
  data.special_ids = {SpecialTerm::TotalFlops, SpecialTerm::TotalMemAccesses};
  if (!samples.empty()) data.schema = feature_schema(samples.front().layer.kind());
  for (const auto& s : samples) {
    data.features.push_back(build_features(s.layer).values);
    data.specials.push_back(special_terms(s.layer));
    data.targets.push_back(s.value);
  }
  return data;
}

FitResult fit(std::span<const LayerSample> samples, const FitConfig& config, LayerKind kind, Target target) {
  for (const auto& s : samples)
    if (s.layer.kind() != kind)
      throw KindMismatch("sample layer '" + s.layer.name + "' is " + std::string(to_string(s.layer.kind())) +
                         ", expected " + std::string(to_string(kind)));
  RegressionData data = make_regression_data(samples);
  data.schema = feature_schema(kind);
  return fit_polynomial(data, config, kind, target);
}

Prediction predict(const PolynomialModel& model, const LayerConfig& layer) {
  if (layer.kind() != model.layer_kind)
    throw KindMismatch("model for " + std::string(to_string(model.layer_kind)) + " applied to " +
                       std::string(to_string(layer.kind())) + " layer '" + layer.name + "'");
  const FeatureVector f = build_features(layer);
  const double raw = model.evaluate(f.values, special_terms(layer));
  return raw < 0.0 ? Prediction{0.0, true} : Prediction{raw, false};
}

Metrics evaluate(const PolynomialModel& model, std::span<const LayerSample> test) {
  std::vector<double> pred, actual;
  for (const auto& s : test) {
    pred.push_back(predict(model, s.layer).value);
    actual.push_back(s.value);
  }
  return compute_metrics(pred, actual);
}

ModelSet::ModelSet(std::vector<PolynomialModel> models) {
  for (auto& m : models) add(std::move(m));
}

void ModelSet::add(PolynomialModel model) {
  for (auto& existing : models_) {
    if (existing.layer_kind == model.layer_kind && existing.target == model.target) {
      existing = std::move(model);
      return;
    }
  }
  models_.push_back(std::move(model));
}

const PolynomialModel* ModelSet::find(LayerKind kind, Target target) const noexcept {
  for (const auto& m : models_)
    if (m.layer_kind == kind && m.target == target) return &m;
  return nullptr;
}

namespace {

const PolynomialModel& require(const ModelSet& models, LayerKind kind, Target target, const std::string& layer) {
  const PolynomialModel* m = models.find(kind, target);
  if (!m)
    throw ConfigError("no " + std::string(to_string(target)) + " model for " + std::string(to_string(kind)) +
                      " (layer '" + layer + "')");
  return *m;
}

NetworkPrediction predict_network_impl(const ModelSet& models, const NetworkConfig& net, bool with_power) {
  NetworkPrediction result;
  for (const auto& layer : net.layers) {
    LayerPrediction lp;
    lp.layer = layer.name;
    lp.kind = layer.kind();
    const Prediction t = predict(require(models, lp.kind, Target::Runtime_ms, layer.name), layer);
    lp.runtime_ms = t.value;
    lp.clamped = t.clamped;
    if (with_power) {
      const Prediction p = predict(require(models, lp.kind, Target::Power_W, layer.name), layer);
      lp.power_w = p.value;
      lp.clamped = lp.clamped || p.clamped;
      lp.energy_mj = lp.runtime_ms * lp.power_w;
    }
    result.runtime_ms += lp.runtime_ms;
    result.energy_mj += lp.energy_mj;
    result.layers.push_back(std::move(lp));
  }
  return result;
}

}  // namespace

NetworkPrediction predict_network(const ModelSet& models, const NetworkConfig& net) {
  NetworkPrediction result = predict_network_impl(models, net, true);
  if (result.runtime_ms == 0.0) throw NumericalError("total predicted runtime is zero; average power undefined");
  result.average_power_w = result.energy_mj / result.runtime_ms;
  return result;
}

NetworkPrediction predict_network_runtime(const ModelSet& models, const NetworkConfig& net) {
  return predict_network_impl(models, net, false);
}

std::string serialize_models(std::span<const PolynomialModel> models) {
  nlohmann::ordered_json root;
  root["format"] = "hwml-polynomial-models";
  root["version"] = 1;
  auto& list = root["models"] = nlohmann::ordered_json::array();
  for (const auto& m : models) {
    nlohmann::ordered_json j;
    j["layer_kind"] = std::string(to_string(m.layer_kind));
    j["target"] = std::string(to_string(m.target));
    j["degree"] = m.degree;
    j["schema"] = m.schema;
    auto& terms = j["terms"] = nlohmann::ordered_json::array();
    for (const auto& t : m.terms) terms.push_back({{"exponents", t.exponents}, {"coefficient", t.coefficient}});
    auto& specials = j["special_terms"] = nlohmann::ordered_json::array();
    for (const auto& s : m.special_terms)
      specials.push_back({{"id", std::string(to_string(s.id))}, {"coefficient", s.coefficient}});
    list.push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::vector<PolynomialModel> parse_models(std::string_view text) {
  std::vector<PolynomialModel> models;
  try {
    const auto root = nlohmann::json::parse(text);
    if (root.value("format", "") != "hwml-polynomial-models") throw ConfigError("not a polynomial model file");
    for (const auto& j : root.at("models")) {
      PolynomialModel m;
      m.layer_kind = parse_layer_kind(j.at("layer_kind").get<std::string>());
      m.target = parse_target(j.at("target").get<std::string>());
      m.degree = j.at("degree").get<int>();
      m.schema = j.at("schema").get<std::vector<std::string>>();
      for (const auto& t : j.at("terms")) {
        PolynomialTerm term{t.at("exponents").get<Exponents>(), t.at("coefficient").get<double>()};
        if (term.exponents.size() != m.schema.size()) throw ConfigError("term exponents do not match schema");
        int total = 0;
        for (int e : term.exponents) {
          if (e < 0) throw ConfigError("negative exponent");
          total += e;
        }
        if (total > m.degree) throw ConfigError("term exceeds model degree");
        for (const auto& other : m.terms)
          if (other.exponents == term.exponents) throw ConfigError("duplicate term");
        m.terms.push_back(std::move(term));
      }
      for (const auto& s : j.at("special_terms"))
        m.special_terms.push_back({parse_special_term(s.at("id").get<std::string>()), s.at("coefficient").get<double>()});
      models.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("model file: ") + e.what());
  }
  return models;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<ProfileRow> parse_profile_csv(std::string_view text) {
  std::vector<ProfileRow> rows;
  std::size_t line_no = 0, start = 0;
  bool header_seen = false;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header_seen) {
      if (line.front() == '#') continue;
      if (line != kProfileHeader) throw ParseError(line_no, "expected profile header '" + std::string(kProfileHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 13) throw ParseError(line_no, "expected 13 fields, got " + std::to_string(f.size()));

    auto integer = [&](std::size_t idx, const char* name) -> Count {
      Count v = 0;
      const std::string& s = f[idx];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(line_no, std::string("invalid or missing integer for ") + name);
      return v;
    };
    auto optional_number = [&](std::size_t idx, const char* name) -> std::optional<double> {
      if (f[idx].empty()) return std::nullopt;
      try {
        return parse_double(f[idx]);
      } catch (const ConfigError&) {
        throw ParseError(line_no, std::string("invalid number for ") + name);
      }
    };
    auto require_empty = [&](std::initializer_list<std::size_t> idx) {
      for (auto i : idx)
        if (!f[i].empty()) throw ParseError(line_no, "column " + std::to_string(i + 1) + " must be empty for " + f[0]);
    };

    ProfileRow row;
    LayerKind kind;
    try {
      kind = parse_layer_kind(f[0]);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    const std::string name = "row" + std::to_string(line_no);
    const TensorShape in{integer(1, "batch"), integer(2, "in_c"), integer(3, "in_h"), integer(4, "in_w")};
    try {
      if (kind == LayerKind::FullyConnected) {
        require_empty({5, 6, 7, 8, 9});
        row.layer = make_fc(name, in, integer(10, "out_units"));
      } else {
        const Window w{integer(5, "k_h"), integer(6, "k_w"), integer(7, "stride"), integer(8, "pad")};
        if (kind == LayerKind::Conv2D) {
          require_empty({10});
          row.layer = make_conv(name, in, w, integer(9, "out_c"));
        } else {
          require_empty({9, 10});
          row.layer = make_pool(name, in, w);
        }
      }
    } catch (const InvalidGeometry& e) {
      throw ParseError(line_no, e.what());
    }
    row.runtime_ms = optional_number(11, "runtime_ms");
    row.power_w = optional_number(12, "power_w");
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(0, "profile CSV has no header");
  return rows;
}

std::string format_profile_row(const ProfileRow& row) {
  const LayerConfig& l = row.layer;
  const TensorShape& in = l.input;
  std::string out = fmt::format("{},{},{},{},{},", to_string(l.kind()), in.batch, in.channels, in.height, in.width);
  if (const Window* w = l.window()) {
    out += fmt::format("{},{},{},{},", w->kernel_h, w->kernel_w, w->stride, w->padding);
  } else {
    out += ",,,,";
  }
  if (const auto* conv = std::get_if<Conv2D>(&l.op))
    out += fmt::format("{},,", conv->output_channels);
  else if (const auto* fc = std::get_if<FullyConnected>(&l.op))
    out += fmt::format(",{},", fc->output_units);
  else
    out += ",,";
  if (row.runtime_ms) out += fmt::format("{}", *row.runtime_ms);
  out += ",";
  if (row.power_w) out += fmt::format("{}", *row.power_w);
  return out;
}

std::vector<LayerSample> select_samples(std::span<const ProfileRow> rows, LayerKind kind, Target target) {
  std::vector<LayerSample> samples;
  for (const auto& r : rows) {
    if (r.layer.kind() != kind) continue;
    const auto& v = target == Target::Runtime_ms ? r.runtime_ms : r.power_w;
    if (v) samples.push_back({r.layer, *v});
  }
  return samples;
}

}  // namespace hwml
