#include "hwml/analytic.hpp"

#include <sstream>

#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"

namespace hwml {

namespace {

constexpr double kMillisecondsPerSecond = 1e3;

bool is_fraction(double v) { return v > 0.0 && v <= 1.0; }

}  // namespace

void validate(const DeviceSpec& d) {
  if (!(d.peak_flops > 0 && d.read_bandwidth > 0 && d.write_bandwidth > 0 && d.bytes_per_element > 0))
    throw ConfigError("device rates and bytes_per_element must be positive");
  if (!is_fraction(d.ppp_compute) || !is_fraction(d.ppp_io))
    throw ConfigError("ppp_compute and ppp_io must lie in (0, 1]");
}

DeviceSpec parse_device_spec(std::string_view text) {
  const auto kv = KeyValueText::parse(text);
  kv.require_only({"peak_flops", "read_bandwidth", "write_bandwidth", "ppp_compute", "ppp_io",
                   "bytes_per_element"});
  DeviceSpec d;
  d.peak_flops = kv.get_double("peak_flops");
  d.read_bandwidth = kv.get_double("read_bandwidth");
  d.write_bandwidth = kv.get_double("write_bandwidth");
  // PPP defaults to 1 (peak), element size to 4 bytes
  if (kv.has("ppp_compute")) d.ppp_compute = kv.get_double("ppp_compute");
  if (kv.has("ppp_io")) d.ppp_io = kv.get_double("ppp_io");
  if (kv.has("bytes_per_element")) d.bytes_per_element = kv.get_double("bytes_per_element");
  validate(d);
  return d;
}

PaleoTime paleo_layer_runtime(const LayerConfig& layer, const DeviceSpec& d) {
  const OpCounts c = count_ops(layer);
  const double read_bytes = static_cast<double>(c.input_reads) * d.bytes_per_element +
                            static_cast<double>(c.weight_reads) * d.bytes_per_element;
  const double write_bytes = static_cast<double>(c.output_writes) * d.bytes_per_element;
  PaleoTime t;
  t.compute_ms = static_cast<double>(c.flops) / (d.peak_flops * d.ppp_compute) * kMillisecondsPerSecond;
  t.read_ms = read_bytes / (d.read_bandwidth * d.ppp_io) * kMillisecondsPerSecond;
  t.write_ms = write_bytes / (d.write_bandwidth * d.ppp_io) * kMillisecondsPerSecond;
  return t;
}

PaleoNetworkTime paleo_network_runtime(const NetworkConfig& net, const DeviceSpec& device) {
  PaleoNetworkTime result;
  for (const auto& layer : net.layers) {
    const PaleoTime t = paleo_layer_runtime(layer, device);
    result.components.read_ms += t.read_ms;
    result.components.compute_ms += t.compute_ms;
    result.components.write_ms += t.write_ms;
    result.total_ms += t.total_ms();
    result.layers.push_back({layer.name, t});
  }
  return result;
}

const EnergyLevel* EnergySpec::find(std::string_view level) const noexcept {
  for (const auto& l : levels)
    if (l.name == level) return &l;
  return nullptr;
}

void validate(const EnergySpec& spec) {
  if (spec.e_mac_pj < 0) throw ConfigError("e_mac must be non-negative");
  if (spec.levels.empty()) throw ConfigError("energy spec needs at least one memory level");
  if (!(spec.bitwidth_reference > 0)) throw ConfigError("bitwidth_reference must be positive");
  for (const auto& l : spec.levels)
    if (l.energy_per_access_pj < 0) throw ConfigError("level '" + l.name + "' has negative energy");
}

EnergySpec parse_energy_spec(std::string_view text) {
  const auto kv = KeyValueText::parse(text);
  kv.require_only({"e_mac", "levels", "bitwidth_reference"});
  EnergySpec spec;
  spec.e_mac_pj = kv.get_double("e_mac");
  spec.bitwidth_reference = kv.get_double("bitwidth_reference");

  std::stringstream list(kv.get("levels"));
  std::string item;
  while (std::getline(list, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ParseError(kv.line_of("levels"), "levels entries must be NAME:pJ");
    EnergyLevel level{trim(std::string_view(item).substr(0, colon)),
                      parse_double(std::string_view(item).substr(colon + 1))};
    if (level.name.empty()) throw ParseError(kv.line_of("levels"), "empty level name");
    if (spec.find(level.name)) throw ParseError(kv.line_of("levels"), "duplicate level '" + level.name + "'");
    spec.levels.push_back(std::move(level));
  }
  validate(spec);
  return spec;
}

AccessProfile default_access_profile(const LayerConfig& layer) {
  const OpCounts c = count_ops(layer);
  AccessProfile profile;
  profile.counts["DRAM"] = c.input_reads + c.weight_reads + c.output_writes;
  profile.source = AccessSource::Default;
  return profile;
}

double bitwidth_scale(double bitwidth, double reference) noexcept { return bitwidth / reference; }

EnergyBreakdown eyeriss_layer_energy(const LayerConfig& layer, const EnergySpec& spec,
                                     const AccessProfile& accesses, const SparsityInfo& sparsity,
                                     double bitwidth) {
  if (!(bitwidth > 0)) throw ConfigError("bitwidth must be positive");
  if (!(sparsity.zero_fraction >= 0.0 && sparsity.zero_fraction <= 1.0))
    throw ConfigError("zero_fraction must lie in [0, 1]");

  const double scale = bitwidth_scale(bitwidth, spec.bitwidth_reference);
  const double kept = 1.0 - sparsity.zero_fraction;

  EnergyBreakdown e;
  const double effective_macs = static_cast<double>(count_ops(layer).macs) * kept;
  e.compute_pj = effective_macs * spec.e_mac_pj * scale;
  for (const auto& [name, count] : accesses.counts) {
    const EnergyLevel* level = spec.find(name);
    if (!level) throw ConfigError("layer '" + layer.name + "': unknown memory level '" + name + "'");
    if (count < 0) throw ConfigError("layer '" + layer.name + "': negative access count for '" + name + "'");
    const double pj = static_cast<double>(count) * kept * level->energy_per_access_pj * scale;
    e.per_level_pj.emplace_back(name, pj);
    e.data_pj += pj;
  }
  return e;
}

std::map<std::string, LayerEnergyInputs> parse_access_overrides(std::string_view text) {
  std::map<std::string, LayerEnergyInputs> result;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string layer, token;
    if (!(tokens >> layer)) continue;
    if (result.count(layer)) throw ParseError(line_no, "duplicate entry for layer '" + layer + "'");
    LayerEnergyInputs inputs;
    inputs.accesses.source = AccessSource::UserSupplied;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError(line_no, "expected LEVEL=count, got '" + token + "'");
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      try {
        if (key == "zero_fraction") {
          inputs.sparsity = SparsityInfo{parse_double(value)};
        } else {
          const double count = parse_double(value);
          if (count < 0 || count != static_cast<double>(static_cast<Count>(count)))
            throw ConfigError("access count must be a non-negative integer");
          inputs.accesses.counts[key] = static_cast<Count>(count);
        }
      } catch (const ConfigError& e) {
        throw ParseError(line_no, e.what());
      }
    }
    result.emplace(layer, std::move(inputs));
  }
  return result;
}

EnergyNetworkResult eyeriss_network_energy(const NetworkConfig& net, const EnergySpec& spec,
                                           const std::map<std::string, LayerEnergyInputs>& overrides,
                                           const SparsityInfo& sparsity, double bitwidth) {
  for (const auto& [name, unused] : overrides) {
    bool found = false;
    for (const auto& layer : net.layers) found = found || layer.name == name;
    if (!found) throw ConfigError("access override names unknown layer '" + name + "'");
  }
  EnergyNetworkResult result;
  for (const auto& layer : net.layers) {
    AccessProfile profile = default_access_profile(layer);
    SparsityInfo layer_sparsity = sparsity;
    if (const auto it = overrides.find(layer.name); it != overrides.end()) {
      if (!it->second.accesses.counts.empty()) profile = it->second.accesses;
      if (it->second.sparsity) layer_sparsity = *it->second.sparsity;
    }
    EnergyBreakdown e = eyeriss_layer_energy(layer, spec, profile, layer_sparsity, bitwidth);
    result.compute_pj += e.compute_pj;
    result.data_pj += e.data_pj;
    result.total_pj += e.total_pj();
    result.layers.push_back({layer.name, std::move(e), profile.source});
  }
  return result;
}

}  // namespace hwml
