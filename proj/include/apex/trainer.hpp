#pragma once

#include <functional>
#include <string>

#include "apex/config.hpp"
#include "apex/evaluation.hpp"
#include "apex/sac.hpp"

namespace apex {

// One metrics row, mirrored into <out_dir>/metrics.csv.
struct TrainProgress {
  int epoch = 0;            // 1-based
  double wall_clock_s = 0.0;
  size_t buffer_size = 0;
  SacDiagnostics losses;    // means over the epoch's update steps
  int updates = 0;          // update steps actually performed this epoch
  bool evaluated = false;
  LapRecord eval;           // meaningful when evaluated
  double wall_contact_fraction = 0.0;  // over this epoch's rollout ticks
};

using ProgressFn = std::function<void(const TrainProgress&)>;

struct TrainResult {
  int epochs_completed = 0;
  double best_lap_ms = 0.0;  // 0 when no evaluation finished a lap
  std::string latest_checkpoint;
  std::string best_checkpoint;  // empty when no evaluation finished a lap
  std::string metrics_path;
};

// Orchestrates a training run: each epoch, every worker collects one
// multi-car episode with the sampling policy while the learner performs
// updates_per_epoch gradient steps, reading uniform batches from the shared
// FIFO replay buffer. Policy snapshots are published to workers at epoch
// boundaries, so rollouts within an epoch use frozen parameters. Metrics
// and a `latest` checkpoint are written every epoch, an evaluation lap
// every eval_period_epochs (tracked as `best` when it improves).
//
// Synchronous mode runs collect-then-update in one thread and is
// bit-reproducible for a fixed seed. Asynchronous mode runs workers on
// threads against a mutex-guarded buffer, overlapping collection with
// updates (updates wait until the buffer can serve a batch).
//
// `resume` restarts from <out_dir>/latest.ckpt: networks, optimizers, RNG
// streams, and counters are restored; the replay buffer is rebuilt from
// fresh rollouts (it is deliberately not persisted).
TrainResult run_training(const RunConfig& config, bool resume = false,
                         const ProgressFn& progress = {});

}  // namespace apex
