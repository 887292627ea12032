// Serial vs OpenMP kernel comparison, plus end-to-end hot paths
// (one SAC update step, one multi-car rollout episode).
#include <benchmark/benchmark.h>

#include <vector>

#include "apex/controller.hpp"
#include "apex/mat.hpp"
#include "apex/replay.hpp"
#include "apex/rng.hpp"
#include "apex/rollout.hpp"
#include "apex/sac.hpp"
#include "apex/track.hpp"

namespace {

using namespace apex;

Mat random_mat(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (double& v : m.d) v = rng.uniform(-1.0, 1.0);
  return m;
}

void bm_matmul(benchmark::State& state, bool parallel) {
  int batch = static_cast<int>(state.range(0));
  int k = static_cast<int>(state.range(1));
  int n = static_cast<int>(state.range(2));
  Rng rng(7);
  Mat a = random_mat(batch, k, rng);
  Mat b = random_mat(k, n, rng);
  Mat c(batch, n);
  for (auto _ : state) {
    if (parallel) {
      kernels::matmul_omp(a, b, c);
    } else {
      kernels::matmul_serial(a, b, c);
    }
    benchmark::DoNotOptimize(c.d.data());
  }
  state.SetItemsProcessed(state.iterations() * 2ll * batch * k * n);
}

void matmul_args(benchmark::internal::Benchmark* b) {
  b->Args({256, 32, 256})
      ->Args({256, 256, 256})
      ->Args({4096, 256, 256})
      ->Unit(benchmark::kMicrosecond);
}

void bm_sac_update(benchmark::State& state, bool parallel) {
  kernels::set_parallel(parallel);
  SacConfig config;
  config.batch_size = static_cast<int>(state.range(0));
  SacLearner learner(config, 11);
  Rng rng(13);
  ReplayBuffer::NstepBatch batch;
  int dim = config.obs_dim;
  batch.obs.resize(config.batch_size, dim);
  batch.next_obs.resize(config.batch_size, dim);
  batch.action.resize(config.batch_size, kActionDim);
  batch.reward.assign(config.batch_size, 0.0);
  batch.done.assign(config.batch_size, 0.0);
  batch.m.assign(config.batch_size, 5);
  for (double& v : batch.obs.d) v = rng.uniform(-1.0, 1.0);
  for (double& v : batch.next_obs.d) v = rng.uniform(-1.0, 1.0);
  for (double& v : batch.action.d) v = rng.uniform(-0.9, 0.9);
  for (double& v : batch.reward) v = rng.uniform(-0.1, 0.3);
  for (auto _ : state) {
    SacDiagnostics d = learner.update(batch);
    benchmark::DoNotOptimize(d.q1_loss);
  }
  kernels::set_parallel(true);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_rollout(benchmark::State& state, bool parallel) {
  kernels::set_parallel(parallel);
  TrackDefinition track = load_track(BENCH_TRACK);
  CarConfig car = CarConfig::slow();
  EpisodeConfig episode;
  episode.duration = 10.0;
  episode.num_cars = static_cast<int>(state.range(0));
  episode.initial_speed = 10.0;
  CenterlineController controller(car);
  for (auto _ : state) {
    EpisodeResult r = run_episode(track, car, episode, controller, 0);
    benchmark::DoNotOptimize(r.steps);
  }
  kernels::set_parallel(true);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 600);
}

BENCHMARK_CAPTURE(bm_matmul, serial, false)->Apply(matmul_args);
BENCHMARK_CAPTURE(bm_matmul, omp, true)->Apply(matmul_args);
BENCHMARK_CAPTURE(bm_sac_update, serial, false)
    ->Arg(256)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_sac_update, omp, true)
    ->Arg(256)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_rollout, serial, false)
    ->Arg(4)
    ->Arg(20)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_rollout, omp, true)
    ->Arg(4)
    ->Arg(20)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
