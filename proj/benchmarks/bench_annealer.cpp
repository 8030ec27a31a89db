#include <benchmark/benchmark.h>

#include "smbm/annealer.hpp"
#include "smbm/timetable.hpp"

namespace {

void BM_DemoSweep(benchmark::State& state) {
  const smbm::TimetableProblem demo = smbm::canonical_demo();
  const smbm::AnnealTarget target = smbm::make_anneal_target(demo, smbm::kDemoAmplifierGain);
  smbm::Rng rng = smbm::derive_stream(1, 0);
  smbm::Chain chain(target.network, smbm::random_state(demo.neurons(), rng), target.amplifier_gain);
  const double gamma = double(state.range(0)) / 100.0;
  for (auto _ : state) {
    chain.sweep(smbm::kDemoInitialTemperature, gamma, rng);
    benchmark::DoNotOptimize(chain.state().data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(demo.neurons()));
}
BENCHMARK(BM_DemoSweep)->Arg(0)->Arg(15);

void BM_BuildNetwork(benchmark::State& state) {
  const smbm::TimetableProblem demo = smbm::canonical_demo();
  for (auto _ : state) benchmark::DoNotOptimize(smbm::build_network(demo));
}
BENCHMARK(BM_BuildNetwork)->Unit(benchmark::kMillisecond);

void BM_DeskSaaPoint(benchmark::State& state) {
  const smbm::TimetableProblem demo = smbm::canonical_demo();
  const smbm::AnnealTarget target = smbm::make_anneal_target(demo, smbm::kDemoAmplifierGain);
  const smbm::DesignPoint point{{0.15, 0.0}, {smbm::kDemoInitialTemperature, 3.31}};
  const smbm::SaaConfig saa{500, 1000, 4};
  for (auto _ : state) benchmark::DoNotOptimize(smbm::expected_cost(target, point, saa, 7).mean);
}
BENCHMARK(BM_DeskSaaPoint)->Unit(benchmark::kMillisecond);

}  // namespace
