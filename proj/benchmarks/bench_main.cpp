#include <benchmark/benchmark.h>

#include <vector>

#include "hwml/bayesopt.hpp"
#include "hwml/gaussian_process.hpp"
#include "hwml/netgraph.hpp"
#include "hwml/polyreg.hpp"
#include "hwml/rng.hpp"
#include "synth.hpp"

namespace {

using namespace hwml;

void BM_CountOps(benchmark::State& state) {
  const auto layer = make_conv("c", {32, 256, 28, 28}, {3, 3, 1, 1}, 256);
  for (auto _ : state) benchmark::DoNotOptimize(count_ops(layer));
}
BENCHMARK(BM_CountOps);

void BM_PolynomialFit(benchmark::State& state) {
  auto cfg = cli::default_synth_config();
  cfg.samples = static_cast<std::size_t>(state.range(0));
  cfg.noise = 0.05;
  const auto rows = cli::synthesize(cfg, 1);
  const auto samples = select_samples(rows, LayerKind::FullyConnected, Target::Runtime_ms);
  FitConfig fc;
  fc.degree = default_degree(LayerKind::FullyConnected);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit(samples, fc, LayerKind::FullyConnected, Target::Runtime_ms));
}
BENCHMARK(BM_PolynomialFit)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

GaussianProcess random_gp(std::size_t n, std::size_t dims) {
  Rng rng(7);
  GpHyperparameters h;
  h.length_scales.assign(dims, 0.3);
  h.signal_variance = 1.0;
  h.noise_variance = 1e-3;
  std::vector<GpObservation> obs(n);
  for (auto& o : obs) {
    for (std::size_t d = 0; d < dims; ++d) o.x.push_back(rng.uniform());
    o.y = rng.normal();
  }
  return GaussianProcess(h, obs);
}

void BM_GpPosterior(benchmark::State& state) {
  const auto gp = random_gp(static_cast<std::size_t>(state.range(0)), 4);
  const std::vector<double> x{0.5, 0.5, 0.5, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(gp.posterior(x));
}
BENCHMARK(BM_GpPosterior)->Arg(10)->Arg(50)->Arg(200);

void BM_ProposeNext(benchmark::State& state) {
  SearchSpace space;
  for (const char* n : {"a", "b", "c", "d"}) space.dimensions.push_back({n, DimensionKind::Continuous, 0, 1, false});
  const auto gp = random_gp(50, 4);
  const auto acq = make_ei_acquisition(gp, space, -1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(propose_next(space, acq, static_cast<std::size_t>(state.range(0)), 3));
}
BENCHMARK(BM_ProposeNext)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
