#include <gtest/gtest.h>

#include "hwml/analytic.hpp"
#include "hwml/error.hpp"
#include "oracles.hpp"

namespace hwml {
namespace {

DeviceSpec unit_device() {
  DeviceSpec d;
  d.peak_flops = 1e12;
  d.read_bandwidth = 4e9;
  d.write_bandwidth = 4e9;
  return d;
}

TEST(Paleo, ComputeOnly) {
  // FC with 5e8 MACs -> 1e9 flops.
  const auto l = make_fc("f", {1, 50000, 1, 1}, 10000);
  DeviceSpec d = unit_device();
  const auto t = paleo_layer_runtime(l, d);
  EXPECT_DOUBLE_EQ(t.compute_ms, 1.0);
}

TEST(Paleo, ReadTime) {
  // 1e6 elements of 4 bytes over 4e9 B/s.
  const auto l = make_pool("p", {1, 1, 1000, 1000}, {1, 1, 1000, 0});
  const auto c = count_ops(l);
  ASSERT_EQ(c.input_reads, 1000000);
  const auto t = paleo_layer_runtime(l, unit_device());
  EXPECT_DOUBLE_EQ(t.read_ms, 1.0);
}

TEST(Paleo, HalvingPppComputeDoublesComputeOnly) {
  const auto l = make_conv("c", {2, 3, 16, 16}, {3, 3, 1, 1}, 8);
  DeviceSpec d = unit_device();
  const auto a = paleo_layer_runtime(l, d);
  d.ppp_compute = 0.5;
  const auto b = paleo_layer_runtime(l, d);
  EXPECT_EQ(b.compute_ms, 2 * a.compute_ms);
  EXPECT_EQ(b.read_ms, a.read_ms);
  EXPECT_EQ(b.write_ms, a.write_ms);
}

TEST(Paleo, TotalIsSumOfParts) {
  const auto l = make_conv("c", {1, 3, 12, 12}, {5, 5, 2, 2}, 6);
  const auto t = paleo_layer_runtime(l, unit_device());
  EXPECT_EQ(t.total_ms(), t.read_ms + t.compute_ms + t.write_ms);
  EXPECT_GE(t.read_ms, 0);
  EXPECT_GE(t.compute_ms, 0);
  EXPECT_GE(t.write_ms, 0);
}

TEST(Paleo, Homogeneity) {
  const auto l = make_conv("c", {1, 3, 12, 12}, {3, 3, 1, 0}, 6);
  DeviceSpec d;
  d.peak_flops = 1024.0 * 1024 * 1024;
  d.read_bandwidth = 1024.0 * 1024 * 64;
  d.write_bandwidth = 1024.0 * 1024 * 32;
  const auto a = paleo_layer_runtime(l, d);
  d.peak_flops *= 4;
  d.read_bandwidth *= 4;
  d.write_bandwidth *= 4;
  const auto b = paleo_layer_runtime(l, d);
  EXPECT_EQ(b.total_ms(), a.total_ms() / 4);
}

TEST(Paleo, NetworkSumsLeftToRight) {
  const auto net = parse_network("c1 conv in=1x3x16x16 k=3 p=1 out=8\np1 pool k=2 s=2\nf1 fc out=10\n");
  const auto r = paleo_network_runtime(net, unit_device());
  ASSERT_EQ(r.layers.size(), 3u);
  double total = 0;
  for (const auto& l : r.layers) total += l.time.total_ms();
  EXPECT_EQ(r.total_ms, total);
  EXPECT_EQ(paleo_network_runtime(NetworkConfig{}, unit_device()).total_ms, 0.0);
}

TEST(Paleo, DeviceValidation) {
  DeviceSpec d;
  d.ppp_io = 0;
  EXPECT_THROW(validate(d), ConfigError);
  d = DeviceSpec{};
  d.ppp_compute = 1.5;
  EXPECT_THROW(validate(d), ConfigError);
  EXPECT_THROW(parse_device_spec("peak_flops = -1\n"), Error);
  const auto p = parse_device_spec("peak_flops = 2e12\nread_bandwidth = 1e9\nwrite_bandwidth = 1e9\nppp_io = 0.5\n");
  EXPECT_EQ(p.peak_flops, 2e12);
  EXPECT_EQ(p.ppp_io, 0.5);
  EXPECT_EQ(p.ppp_compute, 1.0);
  EXPECT_EQ(p.bytes_per_element, 4.0);
  EXPECT_THROW(parse_device_spec("peak_flops = 2e12\n"), ConfigError);
}

EnergySpec dram_spec() {
  EnergySpec s;
  s.e_mac_pj = 1.0;
  s.levels = {{"DRAM", 100.0}};
  s.bitwidth_reference = 16;
  return s;
}

TEST(Energy, WorkedExample) {
  // 100 MACs: FC 1x100 -> 1.
  const auto l = make_fc("f", {1, 100, 1, 1}, 1);
  AccessProfile a;
  a.counts["DRAM"] = 50;
  const auto e = eyeriss_layer_energy(l, dram_spec(), a, {}, 16);
  EXPECT_EQ(e.compute_pj, 100.0);
  EXPECT_EQ(e.data_pj, 5000.0);
  EXPECT_EQ(e.total_pj(), 5100.0);
}

TEST(Energy, FullSparsityIsZero) {
  const auto l = make_conv("c", {1, 3, 8, 8}, {3, 3, 1, 1}, 4);
  const auto e = eyeriss_layer_energy(l, dram_spec(), default_access_profile(l), {1.0}, 16);
  EXPECT_EQ(e.compute_pj, 0.0);
  EXPECT_EQ(e.data_pj, 0.0);
}

TEST(Energy, HalfBitwidthHalves) {
  const auto l = make_conv("c", {1, 3, 8, 8}, {3, 3, 1, 1}, 4);
  const auto full = eyeriss_layer_energy(l, dram_spec(), default_access_profile(l), {}, 16);
  const auto half = eyeriss_layer_energy(l, dram_spec(), default_access_profile(l), {}, 8);
  EXPECT_EQ(half.total_pj(), full.total_pj() / 2);
}

TEST(Energy, StrictlyDecreasingInSparsity) {
  const auto l = make_fc("f", {1, 16, 1, 1}, 4);
  double previous = 1e300;
  for (double z = 0.0; z <= 1.0; z += 0.125) {
    const double e = eyeriss_layer_energy(l, dram_spec(), default_access_profile(l), {z}, 16).total_pj();
    EXPECT_LT(e, previous);
    previous = e;
  }
}

TEST(Energy, UnknownLevelRejected) {
  const auto l = make_fc("f", {1, 4, 1, 1}, 2);
  AccessProfile a;
  a.counts["SRAM"] = 3;
  EXPECT_THROW(eyeriss_layer_energy(l, dram_spec(), a, {}, 16), ConfigError);
}

TEST(DefaultAccess, FcCount) {
  const auto p = default_access_profile(make_fc("f", {1, 4, 1, 1}, 2));
  EXPECT_EQ(p.source, AccessSource::Default);
  ASSERT_EQ(p.counts.size(), 1u);
  EXPECT_EQ(p.counts.at("DRAM"), 14);
}

TEST(DefaultAccess, SinglePlacementConv) {
  const auto l = make_conv("c", {1, 1, 3, 3}, {3, 3, 1, 0}, 1);
  const auto o = oracle::loop_nest(l);
  EXPECT_EQ(default_access_profile(l).counts.at("DRAM"), o.input_reads + o.weight_reads + o.output_writes);
  EXPECT_EQ(default_access_profile(l).counts.at("DRAM"), 19);
}

TEST(Energy, ParseSpecAndOverrides) {
  const auto s = parse_energy_spec("e_mac = 2\nbitwidth_reference = 8\nlevels = DRAM:200, RF:1\n");
  EXPECT_EQ(s.e_mac_pj, 2.0);
  ASSERT_EQ(s.levels.size(), 2u);
  EXPECT_EQ(s.levels[1].name, "RF");
  const auto o = parse_access_overrides("c1 DRAM=10 RF=100 zero_fraction=0.5\n");
  ASSERT_TRUE(o.count("c1"));
  EXPECT_EQ(o.at("c1").accesses.counts.at("RF"), 100);
  ASSERT_TRUE(o.at("c1").sparsity);
  EXPECT_EQ(o.at("c1").sparsity->zero_fraction, 0.5);
  EXPECT_THROW(parse_energy_spec("e_mac = 1\nlevels = DRAM\nbitwidth_reference = 16\n"), ParseError);
  EXPECT_THROW(parse_energy_spec("levels = DRAM:1\n"), ConfigError);
}

TEST(Energy, NetworkTotalsAreLayerSums) {
  const auto net = parse_network("c1 conv in=1x3x8x8 k=3 p=1 out=4\np1 pool k=2 s=2\nf1 fc out=3\n");
  std::map<std::string, LayerEnergyInputs> overrides;
  overrides["p1"].accesses.counts = {{"DRAM", 7}};
  const auto r = eyeriss_network_energy(net, dram_spec(), overrides, {0.25}, 16);
  ASSERT_EQ(r.layers.size(), 3u);
  EXPECT_EQ(r.layers[1].source, AccessSource::UserSupplied);
  double total = 0, comp = 0, data = 0;
  for (const auto& l : r.layers) {
    total += l.energy.total_pj();
    comp += l.energy.compute_pj;
    data += l.energy.data_pj;
  }
  EXPECT_EQ(r.total_pj, total);
  EXPECT_EQ(r.compute_pj, comp);
  EXPECT_EQ(r.data_pj, data);
}

}  // namespace
}  // namespace hwml
