#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hwml/netgraph.hpp"

namespace hwml {

enum class Target { Runtime_ms, Power_W };
std::string_view to_string(Target target) noexcept;
Target parse_target(std::string_view text);

enum class SpecialTerm { TotalFlops, TotalMemAccesses };
std::string_view to_string(SpecialTerm term) noexcept;
SpecialTerm parse_special_term(std::string_view text);

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> schema;
};

// Feature names per layer kind:
//   conv: batch in_c in_hw kernel_hw stride padding out_c out_hw
//   fc:   batch in_units out_units
//   pool: batch in_c in_hw kernel_hw stride out_hw
// Spatial pairs collapse to one feature (geometric mean when non-square).
const std::vector<std::string>& feature_schema(LayerKind kind);
FeatureVector build_features(const LayerConfig& layer);

// [TotalFlops, TotalMemAccesses] from count_ops.
std::vector<double> special_terms(const LayerConfig& layer);

using Exponents = std::vector<int>;

// All exponent vectors over `dims` features with total degree <= `degree`,
// graded by degree, then reverse-lexicographic within a degree:
// (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).
std::vector<Exponents> enumerate_terms(std::size_t dims, int degree);

struct PolynomialTerm {
  Exponents exponents;
  double coefficient = 0.0;
  bool operator==(const PolynomialTerm&) const = default;
};

struct SpecialCoefficient {
  SpecialTerm id = SpecialTerm::TotalFlops;
  double coefficient = 0.0;
  bool operator==(const SpecialCoefficient&) const = default;
};

// T(x) = sum_j c_j prod_i x_i^q_ij + sum_s c'_s F_s(x). Only nonzero terms
// are stored.
struct PolynomialModel {
  LayerKind layer_kind = LayerKind::Conv2D;
  Target target = Target::Runtime_ms;
  int degree = 1;
  std::vector<std::string> schema;
  std::vector<PolynomialTerm> terms;
  std::vector<SpecialCoefficient> special_terms;

  std::size_t size() const noexcept;
  // Unclamped value on raw feature and special-term values.
  double evaluate(std::span<const double> features, std::span<const double> specials) const;
  bool operator==(const PolynomialModel&) const = default;
};

int default_degree(LayerKind kind) noexcept;

struct FitConfig {
  int degree = 2;
  std::optional<double> l1_strength;  // nullopt selects lambda by cross-validation
  int cv_folds = 10;
  std::uint64_t seed = 0;
  std::size_t lambda_grid_size = 50;
  double lambda_min_ratio = 1e-6;
};

struct Metrics {
  double rmspe = 0.0;  // percent
  double rmse = 0.0;   // target units
  std::size_t count = 0;
  std::size_t excluded = 0;  // samples with zero actual, left out of RMSPE
};

// RMSPE = 100 sqrt(mean(((p - a) / a)^2)), RMSE = sqrt(mean((p - a)^2)).
Metrics compute_metrics(std::span<const double> predicted, std::span<const double> actual);

struct FitReport {
  double lambda = 0.0;
  std::vector<double> lambda_grid;    // empty when lambda was fixed
  std::vector<double> cv_rmspe;       // mean CV RMSPE per grid lambda
  Metrics cross_validated;            // pooled out-of-fold predictions at `lambda`
  double max_abs_gradient = 0.0;      // KKT residual of the final solve (standardized)
  std::vector<std::string> warnings;
};

struct FitResult {
  PolynomialModel model;
  FitReport report;
};

// Raw regression problem: one row of feature values and special-term
// values per sample. Exposed so the solver can be checked against
// arbitrary generating polynomials, not just layer-derived features.
struct RegressionData {
  std::vector<std::string> schema;
  std::vector<std::vector<double>> features;
  std::vector<std::vector<double>> specials;  // may be empty rows
  std::vector<SpecialTerm> special_ids;
  std::vector<double> targets;
};

// L1-regularised least squares by cyclic coordinate descent on
// standardized columns, with an exact re-solve on the final active set.
FitResult fit_polynomial(const RegressionData& data, const FitConfig& config, LayerKind kind, Target target);

struct LayerSample {
  LayerConfig layer;
  double value = 0.0;
};

RegressionData make_regression_data(std::span<const LayerSample> samples);

// Requires >= 2 * cv_folds samples, all of `kind`.
FitResult fit(std::span<const LayerSample> samples, const FitConfig& config, LayerKind kind, Target target);

struct Prediction {
  double value = 0.0;
  bool clamped = false;  // raw polynomial value was negative
};

Prediction predict(const PolynomialModel& model, const LayerConfig& layer);

Metrics evaluate(const PolynomialModel& model, std::span<const LayerSample> test);

class ModelSet {
 public:
  ModelSet() = default;
  explicit ModelSet(std::vector<PolynomialModel> models);

  // Replaces any model with the same (kind, target).
  void add(PolynomialModel model);
  const PolynomialModel* find(LayerKind kind, Target target) const noexcept;
  const std::vector<PolynomialModel>& models() const noexcept { return models_; }

 private:
  std::vector<PolynomialModel> models_;
};

struct LayerPrediction {
  std::string layer;
  LayerKind kind = LayerKind::Conv2D;
  double runtime_ms = 0.0;
  double power_w = 0.0;
  double energy_mj = 0.0;
  bool clamped = false;
};

struct NetworkPrediction {
  std::vector<LayerPrediction> layers;
  double runtime_ms = 0.0;
  double energy_mj = 0.0;
  double average_power_w = 0.0;
};

// T = sum T_i, E = sum T_i P_i, P_avg = E / T. Throws ConfigError when a
// model is missing and NumericalError when T = 0.
NetworkPrediction predict_network(const ModelSet& models, const NetworkConfig& net);
// Runtime-only variant (no power models needed); energy and power stay 0.
NetworkPrediction predict_network_runtime(const ModelSet& models, const NetworkConfig& net);

// JSON model files. Doubles are written in shortest round-trip form.
std::string serialize_models(std::span<const PolynomialModel> models);
std::vector<PolynomialModel> parse_models(std::string_view text);

// Profiling CSV with the fixed header
//   kind,batch,in_c,in_h,in_w,k_h,k_w,stride,pad,out_c,out_units,runtime_ms,power_w
// Lines starting with '#' before the header are comments.
struct ProfileRow {
  LayerConfig layer;
  std::optional<double> runtime_ms;
  std::optional<double> power_w;
};

inline constexpr std::string_view kProfileHeader =
    "kind,batch,in_c,in_h,in_w,k_h,k_w,stride,pad,out_c,out_units,runtime_ms,power_w";

std::vector<ProfileRow> parse_profile_csv(std::string_view text);
std::string format_profile_row(const ProfileRow& row);

// Rows of `kind` that carry a value for `target`.
std::vector<LayerSample> select_samples(std::span<const ProfileRow> rows, LayerKind kind, Target target);

}  // namespace hwml
