#include <benchmark/benchmark.h>

#include <cmath>

#include "smbm/bo.hpp"
#include "smbm/gp.hpp"
#include "smbm/random.hpp"

namespace {

smbm::gp::Dataset sample_data(std::size_t n) {
  smbm::Rng rng = smbm::derive_stream(5, 0);
  smbm::gp::Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = smbm::uniform01(rng), b = smbm::uniform01(rng);
    data.push_back({{a, b}, std::sin(3 * a) + b * b + 0.01 * smbm::standard_normal(rng), 0.01});
  }
  return data;
}

void BM_GpFit(benchmark::State& state) {
  const auto data = sample_data(std::size_t(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(smbm::gp::gp_fit(data, smbm::gp::KernelKind::matern52).log_likelihood);
}
BENCHMARK(BM_GpFit)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_NextPoint(benchmark::State& state) {
  const auto data = sample_data(30);
  const smbm::bo::DesignSpace square{{{"a", 0.0, 1.0}, {"b", 0.0, 1.0}}};
  const auto hp = smbm::gp::gp_fit(data, smbm::gp::KernelKind::matern52).hp;
  const smbm::bo::Surrogate model(data, square, smbm::gp::KernelKind::matern52, hp);
  for (auto _ : state) benchmark::DoNotOptimize(smbm::bo::next_point(model, {}, 101));
}
BENCHMARK(BM_NextPoint)->Unit(benchmark::kMillisecond);

}  // namespace
