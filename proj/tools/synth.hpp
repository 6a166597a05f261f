#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "expr.hpp"
#include "hwml/netgraph.hpp"
#include "hwml/polyreg.hpp"

namespace hwml::cli {

// Integer parameter distribution: `lo..hi` (uniform, inclusive) or a
// comma-separated list of choices (uniform over the list).
struct IntChoice {
  bool range = true;
  Count lo = 1;
  Count hi = 1;
  std::vector<Count> values;

  std::string text() const;
};

IntChoice parse_int_choice(std::string_view text);

struct KindGenerator {
  LayerKind kind = LayerKind::Conv2D;
  std::map<std::string, IntChoice> params;
  Expression runtime_ms;
  Expression power_w;
};

// Synthetic profiling setup. Ground truth expressions may use the layer's
// feature names plus TotalFlops and TotalMemAccesses.
struct SynthConfig {
  std::size_t samples = 500;  // per kind
  double noise = 0.0;         // relative stddev of multiplicative noise
  std::vector<KindGenerator> kinds;
};

// Parameter names each kind must declare.
const std::vector<std::string>& generator_params(LayerKind kind);

SynthConfig default_synth_config();
// Global `samples` and `noise`, then `[conv]`, `[fc]`, `[pool]` sections
// of `key = value` lines. Keys absent from a section fall back to the
// built-in defaults.
SynthConfig parse_synth_config(std::string_view text);
std::string format_synth_config(const SynthConfig& config);

// Value of the generating expressions on one layer, before noise.
double ground_truth(const Expression& expr, const LayerConfig& layer);

std::vector<ProfileRow> synthesize(const SynthConfig& config, std::uint64_t seed);
// Profiling CSV with the effective config echoed as '#' comments.
std::string synthesize_profile_csv(const SynthConfig& config, std::uint64_t seed);

}  // namespace hwml::cli
