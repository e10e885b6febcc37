#include <benchmark/benchmark.h>

#include "parking/ode.hpp"
#include "parking/oracle.hpp"
#include "parking/simulator.hpp"

namespace {

void BM_Replica(benchmark::State& state) {
  parking::SimConfig c;
  c.size = static_cast<std::size_t>(state.range(0));
  c.t_max = 15.0;
  c.replicas = std::size_t{1} << 20;
  std::size_t index = 0;
  std::uint64_t attempts = 0;
  for (auto _ : state) {
    const auto r = parking::run_replica(c, index++ % c.replicas);
    attempts += r.attempts;
    benchmark::DoNotOptimize(r.samples.data());
  }
  state.counters["attempts/s"] =
      benchmark::Counter(static_cast<double>(attempts), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Replica)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Attempt(benchmark::State& state) {
  parking::Lattice lattice(4096);
  std::size_t site = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lattice.attempt(parking::ModelVariant::NoScreening, site));
    site = (site * 2654435761U + 1) & 4095U;
    if (site == 0) lattice = parking::Lattice(4096);
  }
}
BENCHMARK(BM_Attempt);

void BM_OdeIntegrate(benchmark::State& state) {
  const auto model = static_cast<parking::ModelVariant>(state.range(0));
  for (auto _ : state) {
    const auto traj = parking::ode::integrate({model, 30.0, 1e-3, 1});
    benchmark::DoNotOptimize(traj.back().d1);
  }
}
BENCHMARK(BM_OdeIntegrate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OracleEvolve(benchmark::State& state) {
  const auto gen = parking::oracle::build_generator(parking::ModelVariant::NoScreening,
                                                    static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto dist = parking::oracle::evolve(gen, 5.0);
    benchmark::DoNotOptimize(dist[0]);
  }
}
BENCHMARK(BM_OracleEvolve)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
