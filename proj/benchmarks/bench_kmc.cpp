#include <benchmark/benchmark.h>

#include "smbm/kmc.hpp"

namespace {

void BM_KmcStep(benchmark::State& state) {
  using namespace smbm::kmc;
  const KmcParams params = calibrated_params();
  smbm::Rng rng = smbm::derive_stream(3, 0);
  Lattice lattice(LatticeDims{});
  for (auto _ : state) {
    if (lattice.bridged()) {
      state.PauseTiming();
      lattice = Lattice(LatticeDims{});
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(kmc_step(lattice, params, 0.9, rng).dt);
  }
}
BENCHMARK(BM_KmcStep);

void BM_KmcRamp(benchmark::State& state) {
  using namespace smbm::kmc;
  const KmcParams params = calibrated_params();
  smbm::Rng rng = smbm::derive_stream(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_set_ramp(LatticeDims{}, params, 1.0, 3.0, rng).set_voltage);
}
BENCHMARK(BM_KmcRamp)->Unit(benchmark::kMillisecond);

}  // namespace
