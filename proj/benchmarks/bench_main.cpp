#include <benchmark/benchmark.h>

#include "cvqkd/gaussian.hpp"
#include "cvqkd/scanner.hpp"
#include "cvqkd/security.hpp"
#include "cvqkd/simulation.hpp"

namespace {

using namespace cvqkd;

ProtocolParams base(Direction d) {
  ProtocolParams p;
  p.preparation_noise = 2.0;
  p.transmission = 0.85;
  p.direction = d;
  return p;
}

void BM_SymplecticSpectrum(benchmark::State& state) {
  const auto gamma = joint_state_after_channel(base(Direction::Direct));
  for (auto _ : state) benchmark::DoNotOptimize(symplectic_spectrum(gamma));
}
BENCHMARK(BM_SymplecticSpectrum);

void BM_KeyRate(benchmark::State& state) {
  const auto p = base(static_cast<Direction>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(key_rate(p));
}
BENCHMARK(BM_KeyRate)->Arg(0)->Arg(1);

void BM_Threshold(benchmark::State& state) {
  const auto p = base(Direction::Direct);
  for (auto _ : state) benchmark::DoNotOptimize(threshold_transmission(p));
}
BENCHMARK(BM_Threshold)->Unit(benchmark::kMicrosecond);

void BM_SimulateRun(benchmark::State& state) {
  RunConfig cfg;
  cfg.params = base(Direction::Direct);
  cfg.n_samples = static_cast<std::size_t>(state.range(0));
  cfg.channel_mode = static_cast<ChannelMode>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_run(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateRun)
    ->Args({100'000, static_cast<int>(ChannelMode::ScaledModulation)})
    ->Args({100'000, static_cast<int>(ChannelMode::ExplicitBeamsplitter)})
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
