#include "hwml/linmod.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"
#include "hwml/rng.hpp"

namespace hwml {

std::vector<std::string> StructuralSchema::names() const {
  std::vector<std::string> out;
  for (const auto& d : dimensions) out.push_back(d.name);
  return out;
}

void validate(const StructuralSchema& schema) {
  if (schema.dimensions.empty()) throw ConfigError("structural schema needs at least one dimension");
  std::set<std::string> seen;
  for (const auto& d : schema.dimensions) {
    if (d.lo > d.hi) throw ConfigError("dimension '" + d.name + "' has an empty range");
    if (d.lo < 0) throw ConfigError("dimension '" + d.name + "' must be non-negative");
    if (!seen.insert(d.name).second) throw ConfigError("duplicate dimension '" + d.name + "'");
  }
}

std::vector<StructuralPoint> offline_sample(const StructuralSchema& schema, std::size_t count, std::uint64_t seed) {
  validate(schema);
  if (count == 0) throw ConfigError("sample count must be at least 1");
  Rng rng(derive_seed(seed, "offline-sample"));
  std::vector<StructuralPoint> points(count, StructuralPoint(schema.size()));
  for (auto& p : points)
    for (std::size_t j = 0; j < schema.size(); ++j)
      p[j] = rng.uniform_int(schema.dimensions[j].lo, schema.dimensions[j].hi);
  return points;
}

std::string_view to_string(LinearTarget target) noexcept {
  return target == LinearTarget::Power_W ? "power_w" : "memory_mb";
}

double LinearModel::predict(std::span<const double> z) const {
  const std::size_t dims = weights.size() - (bias ? 1 : 0);
  if (z.size() != dims)
    throw ConfigError("linear model expects " + std::to_string(dims) + " dimensions, got " + std::to_string(z.size()));
  double value = 0.0;
  for (std::size_t j = 0; j < dims; ++j) value += weights[j] * z[j];
  if (bias) value += weights.back();
  return value;
}

double predict_power(const LinearModel& model, std::span<const double> z) {
  if (model.target != LinearTarget::Power_W) throw ConfigError("model does not predict power");
  return model.predict(z);
}

double predict_memory(const LinearModel& model, std::span<const double> z) {
  if (model.target != LinearTarget::Memory_MB) throw ConfigError("model does not predict memory");
  return model.predict(z);
}

namespace {

constexpr double kRankThreshold = 1e-10;

Eigen::MatrixXd design_matrix(std::span<const ProfiledPoint> points, std::size_t dims, bool bias) {
  const auto cols = static_cast<Eigen::Index>(dims + (bias ? 1 : 0));
  Eigen::MatrixXd z(static_cast<Eigen::Index>(points.size()), cols);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].z.size() != dims) throw ConfigError("profiled point " + std::to_string(i) + " has wrong dimension");
    for (std::size_t j = 0; j < dims; ++j) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = points[i].z[j];
    if (bias) z(static_cast<Eigen::Index>(i), cols - 1) = 1.0;
  }
  return z;
}

double target_of(const ProfiledPoint& p, LinearTarget t) { return t == LinearTarget::Power_W ? p.power_w : p.memory_mb; }

}  // namespace

LinearModel fit_linear(std::span<const ProfiledPoint> points, std::span<const std::string> schema,
                       LinearTarget target, const LinearFitOptions& options) {
  const std::size_t dims = schema.size();
  if (dims == 0) throw ConfigError("linear model needs at least one dimension");
  if (options.folds < 2) throw ConfigError("cross validation needs at least 2 folds");
  const std::size_t cols = dims + (options.bias ? 1 : 0);
  const std::size_t needed = std::max<std::size_t>(static_cast<std::size_t>(options.folds), cols + 1);
  if (points.size() < needed)
    throw InsufficientSamples("linear fit needs at least " + std::to_string(needed) + " points, got " +
                              std::to_string(points.size()));
  for (const auto& p : points)
    if (!(target_of(p, target) > 0)) throw ConfigError("profiled power and memory must be positive");

  const Eigen::MatrixXd z = design_matrix(points, dims, options.bias);
  Eigen::VectorXd y(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) y(i) = target_of(points[static_cast<std::size_t>(i)], target);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(z);
  lu.setThreshold(kRankThreshold);
  if (lu.rank() < z.cols()) {
    const Eigen::MatrixXd kernel = lu.kernel();
    std::vector<std::string> unidentifiable;
    for (Eigen::Index j = 0; j < kernel.rows(); ++j) {
      if (kernel.row(j).cwiseAbs().maxCoeff() > 1e-8)
        unidentifiable.push_back(static_cast<std::size_t>(j) < dims ? schema[static_cast<std::size_t>(j)] : "bias");
    }
    std::string list;
    for (const auto& n : unidentifiable) list += (list.empty() ? "" : ", ") + n;
    throw RankDeficient(unidentifiable, "rank-deficient design; unidentifiable dimensions: " + list);
  }

  LinearModel model;
  model.target = target;
  model.schema.assign(schema.begin(), schema.end());
  model.bias = options.bias;
  const Eigen::VectorXd w = z.colPivHouseholderQr().solve(y);
  model.weights.assign(w.data(), w.data() + w.size());

  const auto folds = static_cast<std::size_t>(options.folds);
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(options.seed, "linear-cv-folds"));
  rng.shuffle(order);
  std::vector<std::size_t> fold_of(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % folds;

  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < points.size(); ++i) (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd zt(static_cast<Eigen::Index>(train.size()), z.cols());
    Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
      zt.row(static_cast<Eigen::Index>(r)) = z.row(train[r]);
      yt(static_cast<Eigen::Index>(r)) = y(train[r]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zt);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < z.cols() || test.empty()) {
      model.cv_rmspe.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const Eigen::VectorXd wf = qr.solve(yt);
    double sq = 0.0;
    for (const auto i : test) {
      const double rel = (z.row(i).dot(wf) - y(i)) / y(i);
      sq += rel * rel;
    }
    model.cv_rmspe.push_back(100.0 * std::sqrt(sq / static_cast<double>(test.size())));
  }
  return model;
}

ProfiledData parse_profiled_csv(std::string_view text) {
  ProfiledData data;
  std::size_t line_no = 0, start = 0;
  bool header = false;
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::size_t s = 0;
    while (true) {
      const auto c = line.find(',', s);
      out.push_back(trim(std::string_view(line).substr(s, c == std::string::npos ? std::string::npos : c - s)));
      if (c == std::string::npos) break;
      s = c + 1;
    }
    return out;
  };
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split(trim(line));
    if (!header) {
      if (fields.size() < 3 || fields[fields.size() - 2] != "power_w" || fields.back() != "memory_mb")
        throw ParseError(line_no, "expected header z_1,...,z_J,power_w,memory_mb");
      data.schema.assign(fields.begin(), fields.end() - 2);
      header = true;
      continue;
    }
    if (fields.size() != data.schema.size() + 2)
      throw ParseError(line_no, "expected " + std::to_string(data.schema.size() + 2) + " fields");
    ProfiledPoint p;
    try {
      for (std::size_t j = 0; j < data.schema.size(); ++j) p.z.push_back(parse_double(fields[j]));
      p.power_w = parse_double(fields[data.schema.size()]);
      p.memory_mb = parse_double(fields[data.schema.size() + 1]);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    data.points.push_back(std::move(p));
  }
  if (!header) throw ParseError(0, "profiled CSV has no header");
  return data;
}

std::string format_profiled_csv(const ProfiledData& data) {
  std::string out;
  for (const auto& n : data.schema) out += n + ",";
  out += "power_w,memory_mb\n";
  for (const auto& p : data.points) {
    for (double v : p.z) out += fmt::format("{},", v);
    out += fmt::format("{},{}\n", p.power_w, p.memory_mb);
  }
  return out;
}

std::string serialize_linear_model(const LinearModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "hwml-linear-model";
  j["version"] = 1;
  j["target"] = std::string(to_string(model.target));
  j["schema"] = model.schema;
  j["bias"] = model.bias;
  j["weights"] = model.weights;
  auto& cv = j["cv_rmspe"] = nlohmann::ordered_json::array();
  for (double v : model.cv_rmspe) cv.push_back(std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v));
  return j.dump(2) + "\n";
}

LinearModel parse_linear_model(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "hwml-linear-model") throw ConfigError("not a linear model file");
    LinearModel m;
    const auto target = j.at("target").get<std::string>();
    if (target == "power_w") m.target = LinearTarget::Power_W;
    else if (target == "memory_mb") m.target = LinearTarget::Memory_MB;
    else throw ConfigError("unknown linear target '" + target + "'");
    m.schema = j.at("schema").get<std::vector<std::string>>();
    m.bias = j.at("bias").get<bool>();
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != m.schema.size() + (m.bias ? 1 : 0)) throw ConfigError("weights do not match schema");
    for (const auto& v : j.at("cv_rmspe"))
      m.cv_rmspe.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("linear model file: ") + e.what());
  }
}

}  // namespace hwml
