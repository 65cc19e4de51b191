// Parallel kernels against their serial twins, plus KM at scale.
#include <benchmark/benchmark.h>

#include <random>

#include "gpushare/interference.hpp"
#include "gpushare/matching.hpp"
#include "gpushare/predictor.hpp"
#include "gpushare/scheduler.hpp"
#include "gpushare/simengine.hpp"
#include "gpushare/tracegen.hpp"

using namespace gpushare;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

ThroughputModel ground_truth() {
  const InterferenceParams ip;
  return [ip](double a, double b, double c) { return model_offline_rate(a, b, c, ip); };
}

void BM_TableBuild(benchmark::State& state) {
  TableAxes axes;
  const auto n = static_cast<std::size_t>(state.range(1));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    axes.online_sm.push_back(x);
    axes.offline_sm.push_back(0.5 + 0.5 * x);
    axes.sm_pct.push_back(x);
  }
  for (auto _ : state) benchmark::DoNotOptimize(build_table_from_model("bench", ground_truth(), axes, exec_of(state)));
}
BENCHMARK(BM_TableBuild)->Args({0, 64})->Args({1, 64});

void BM_WeightGrid(benchmark::State& state) {
  GeneratorSpec spec;
  spec.gpus = static_cast<int>(state.range(1));
  spec.offline = static_cast<int>(state.range(1));
  spec.submit_fraction = 0.0;
  const ClusterTrace trace = generate_trace(spec, 1);
  const TablePredictor predictor = make_predictor(trace, SimConfig{});
  ScheduleInput in;
  in.now = 3600.0;
  in.horizon = trace.horizon;
  for (std::size_t i = 0; i < trace.gpus.size(); ++i)
    in.gpus.push_back({trace.gpus[i].id, trace.gpus[i].gpu_type, &trace.online[i], HealthState::Healthy, false});
  for (const auto& w : trace.offline) in.pending.push_back(&w);
  const SchedulerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_weight_grid(in, predictor, cfg, exec_of(state)));
}
BENCHMARK(BM_WeightGrid)->Args({0, 256})->Args({1, 256});

void BM_ControlTicks(benchmark::State& state) {
  GeneratorSpec spec;
  spec.gpus = 64;
  spec.offline = 128;
  spec.horizon = 3600.0;
  const ClusterTrace trace = generate_trace(spec, 2);
  SimConfig cfg;
  cfg.output.timeseries = false;
  const TablePredictor predictor = make_predictor(trace, cfg);
  RunOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(run(trace, cfg, predictor, 7, opts));
}
BENCHMARK(BM_ControlTicks)->Args({0, 0})->Args({1, 0})->Unit(benchmark::kMillisecond);

void BM_KuhnMunkres(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  WeightMatrix m(n, n);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& w : m.w) w = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(max_weight_assignment(m));
}
BENCHMARK(BM_KuhnMunkres)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
