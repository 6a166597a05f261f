#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hwml {

struct StructuralDimension {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

// Ranges of the J structural hyper-parameters z (e.g. units per layer).
struct StructuralSchema {
  std::vector<StructuralDimension> dimensions;

  std::size_t size() const noexcept { return dimensions.size(); }
  std::vector<std::string> names() const;
};

void validate(const StructuralSchema& schema);

using StructuralPoint = std::vector<std::int64_t>;

// L points uniform over the integer box, deterministic in `seed`.
std::vector<StructuralPoint> offline_sample(const StructuralSchema& schema, std::size_t count, std::uint64_t seed);

struct ProfiledPoint {
  std::vector<double> z;
  double power_w = 0.0;
  double memory_mb = 0.0;
};

enum class LinearTarget { Power_W, Memory_MB };
std::string_view to_string(LinearTarget target) noexcept;

// P(z) = sum_j w_j z_j (or the memory analogue). With `bias` set, a
// constant feature is appended and weights has J + 1 entries.
struct LinearModel {
  LinearTarget target = LinearTarget::Power_W;
  std::vector<std::string> schema;
  std::vector<double> weights;
  bool bias = false;
  std::vector<double> cv_rmspe;  // per fold, percent

  // Dot product; never clamped. Throws ConfigError on dimension mismatch.
  double predict(std::span<const double> z) const;
};

struct LinearFitOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  bool bias = false;
};

// Least squares through the origin with seeded k-fold CV. Needs at least
// max(folds, J+1) points; throws RankDeficient naming the dimensions the
// design cannot separate.
LinearModel fit_linear(std::span<const ProfiledPoint> points, std::span<const std::string> schema,
                       LinearTarget target, const LinearFitOptions& options = {});

double predict_power(const LinearModel& model, std::span<const double> z);
double predict_memory(const LinearModel& model, std::span<const double> z);

// Profiled-point CSV: header z names..., power_w, memory_mb.
struct ProfiledData {
  std::vector<std::string> schema;
  std::vector<ProfiledPoint> points;
};
ProfiledData parse_profiled_csv(std::string_view text);
std::string format_profiled_csv(const ProfiledData& data);

std::string serialize_linear_model(const LinearModel& model);
LinearModel parse_linear_model(std::string_view text);

}  // namespace hwml
