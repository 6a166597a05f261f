#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hwml/netgraph.hpp"

namespace hwml {

// Roofline-style device description. Rates are SI base units
// (FLOP/s, bytes/s); the ppp_* fractions derate peak to achieved speed.
struct DeviceSpec {
  double peak_flops = 1e12;
  double read_bandwidth = 1e11;
  double write_bandwidth = 1e11;
  double ppp_compute = 1.0;
  double ppp_io = 1.0;
  double bytes_per_element = 4.0;
};

void validate(const DeviceSpec& device);
DeviceSpec parse_device_spec(std::string_view text);

struct PaleoTime {
  double read_ms = 0.0;
  double compute_ms = 0.0;
  double write_ms = 0.0;
  double total_ms() const noexcept { return read_ms + compute_ms + write_ms; }
};

// T = R + C + W for one layer on one device.
PaleoTime paleo_layer_runtime(const LayerConfig& layer, const DeviceSpec& device);

struct PaleoLayerTime {
  std::string layer;
  PaleoTime time;
};

struct PaleoNetworkTime {
  std::vector<PaleoLayerTime> layers;
  PaleoTime components;  // component-wise sums, left to right over layers
  double total_ms = 0.0;  // sum of per-layer totals, left to right
};

PaleoNetworkTime paleo_network_runtime(const NetworkConfig& net, const DeviceSpec& device);

struct EnergyLevel {
  std::string name;
  double energy_per_access_pj = 0.0;
};

struct EnergySpec {
  double e_mac_pj = 1.0;
  std::vector<EnergyLevel> levels;
  double bitwidth_reference = 16.0;

  const EnergyLevel* find(std::string_view level) const noexcept;
};

void validate(const EnergySpec& spec);
// Keys: e_mac, bitwidth_reference, levels = NAME:pJ, NAME:pJ, ...
EnergySpec parse_energy_spec(std::string_view text);

enum class AccessSource { Default, UserSupplied };

struct AccessProfile {
  std::map<std::string, Count> counts;
  AccessSource source = AccessSource::UserSupplied;
};

struct SparsityInfo {
  double zero_fraction = 0.0;
};

// All traffic is charged to a single level named "DRAM".
AccessProfile default_access_profile(const LayerConfig& layer);

// Linear scaling of per-operation energy with operand width.
double bitwidth_scale(double bitwidth, double reference) noexcept;

struct EnergyBreakdown {
  double compute_pj = 0.0;
  double data_pj = 0.0;
  std::vector<std::pair<std::string, double>> per_level_pj;  // in AccessProfile order
  double total_pj() const noexcept { return compute_pj + data_pj; }
};

EnergyBreakdown eyeriss_layer_energy(const LayerConfig& layer, const EnergySpec& spec,
                                     const AccessProfile& accesses, const SparsityInfo& sparsity,
                                     double bitwidth);

// Per-layer overrides read from text lines of the form
//   layer_name LEVEL=count ... [zero_fraction=f]
struct LayerEnergyInputs {
  AccessProfile accesses;
  std::optional<SparsityInfo> sparsity;
};
std::map<std::string, LayerEnergyInputs> parse_access_overrides(std::string_view text);

struct EnergyLayerResult {
  std::string layer;
  EnergyBreakdown energy;
  AccessSource source = AccessSource::Default;
};

struct EnergyNetworkResult {
  std::vector<EnergyLayerResult> layers;
  double compute_pj = 0.0;
  double data_pj = 0.0;
  double total_pj = 0.0;  // sum of per-layer totals, left to right
};

// Layers absent from `overrides` use default_access_profile and `sparsity`.
EnergyNetworkResult eyeriss_network_energy(const NetworkConfig& net, const EnergySpec& spec,
                                           const std::map<std::string, LayerEnergyInputs>& overrides,
                                           const SparsityInfo& sparsity, double bitwidth);

}  // namespace hwml
