#include "apex/trainer.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "apex/error.hpp"

namespace apex {

namespace {

// Per-operation locking around the replay buffer so asynchronous workers
// can append while the learner samples. Each car's episode is pushed as one
// locked run to keep insertion adjacency equal to episode adjacency.
class SharedBuffer {
 public:
  SharedBuffer(int obs_dim, size_t capacity) : buffer_(obs_dim, capacity) {}

  void push_run(const std::vector<Transition>& ts) {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& t : ts) buffer_.push(t);
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return buffer_.size();
  }

  ReplayBuffer::NstepBatch sample(int batch, int n, double gamma,
                                  Rng& rng) const {
    std::lock_guard<std::mutex> lock(mu_);
    return buffer_.sample_nstep(batch, n, gamma, rng);
  }

 private:
  ReplayBuffer buffer_;
  mutable std::mutex mu_;
};

struct CollectStats {
  long wall_ticks = 0;
  long total_ticks = 0;
};

CollectStats collect_episode(const RunConfig& config,
                             const TrackDefinition& track,
                             const CarConfig& car, const MlpParams& snapshot,
                             Rng& rng, uint64_t episode_base,
                             SharedBuffer& buffer) {
  PolicyController controller(snapshot, PolicyController::Mode::kSample,
                              car.max_steer, &rng);
  EpisodeResult episode =
      run_episode(track, car, config.episode, controller, episode_base,
                  config.observation, config.reward);
  CollectStats stats;
  for (const auto& car_ep : episode.cars) {
    buffer.push_run(car_ep.transitions);
    stats.wall_ticks += car_ep.wall_ticks;
    stats.total_ticks += car_ep.ticks;
  }
  return stats;
}

}  // namespace

TrainResult run_training(const RunConfig& config, bool resume,
                         const ProgressFn& progress) {
  validate_config(config);
  const TrackDefinition track = load_track(config.track_path);
  const CarConfig car = config.car();
  const SacConfig& sac = config.sac;

  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  auto at = [&](const char* name) {
    return (fs::path(config.out_dir) / name).string();
  };
  const std::string latest_path = at("latest.ckpt");
  const std::string best_path = at("best.ckpt");
  const std::string metrics_path = at("metrics.csv");

  {
    std::ofstream snap(at("config_resolved.cfg"));
    if (!snap) throw ConfigError("cannot write: " + at("config_resolved.cfg"));
    snap << resolved_config_text(config);
  }

  std::unique_ptr<SacLearner> learner;
  std::vector<Rng> worker_rng(config.workers);
  int start_epoch = 0;
  uint64_t episode_counter = 0;
  bool has_best = false;
  double best_lap = 0.0;

  if (resume) {
    Checkpoint ck = load_checkpoint(latest_path);
    if (ck.require_int("trainer.workers") != config.workers) {
      throw ConfigError("resume: worker count differs from the checkpoint");
    }
    learner = std::make_unique<SacLearner>(SacLearner::unpack(ck, sac));
    start_epoch = static_cast<int>(ck.require_int("trainer.epoch"));
    episode_counter =
        static_cast<uint64_t>(ck.require_int("trainer.episode_counter"));
    has_best = ck.require_int("trainer.has_best") != 0;
    best_lap = ck.require_array("trainer.best_lap_ms").at(0);
    for (int w = 0; w < config.workers; ++w) {
      worker_rng[w] =
          unpack_rng(ck, "trainer.worker" + std::to_string(w) + ".rng");
    }
  } else {
    learner = std::make_unique<SacLearner>(sac, config.seed);
    for (int w = 0; w < config.workers; ++w) {
      worker_rng[w].reseed(derive_seed(config.seed, 0xC011, w));
    }
  }

  std::ofstream metrics;
  if (resume && fs::exists(metrics_path)) {
    metrics.open(metrics_path, std::ios::app);
  } else {
    metrics.open(metrics_path);
    metrics << "epoch,wall_clock_s,buffer_size,q1_loss,q2_loss,value_loss,"
               "policy_loss,eval_lap_ms,wall_contact_fraction\n";
  }
  if (!metrics) throw ConfigError("cannot write: " + metrics_path);
  metrics.precision(17);

  SharedBuffer buffer(sac.obs_dim, sac.buffer_capacity);
  // Enough data that a batch of n-step window starts can be drawn.
  const size_t min_fill =
      static_cast<size_t>(sac.batch_size) + static_cast<size_t>(sac.nstep);

  auto save = [&](const std::string& path, int epochs_done) {
    Checkpoint ck;
    learner->pack(ck);
    ck.ints["trainer.epoch"] = epochs_done;
    ck.ints["trainer.episode_counter"] =
        static_cast<int64_t>(episode_counter);
    ck.ints["trainer.workers"] = config.workers;
    ck.ints["trainer.has_best"] = has_best ? 1 : 0;
    ck.arrays["trainer.best_lap_ms"] = {best_lap};
    for (int w = 0; w < config.workers; ++w) {
      pack_rng(ck, "trainer.worker" + std::to_string(w) + ".rng",
               worker_rng[w]);
    }
    save_checkpoint(path, ck);
  };

  TrainResult out;
  out.epochs_completed = start_epoch;
  out.latest_checkpoint = latest_path;
  out.metrics_path = metrics_path;
  if (has_best) {
    out.best_lap_ms = best_lap;
    out.best_checkpoint = best_path;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  };

  for (int epoch = start_epoch + 1; epoch <= config.epochs; ++epoch) {
    const MlpParams snapshot = learner->policy();  // frozen for this epoch
    CollectStats stats;
    SacDiagnostics sum;
    int updates_done = 0;

    auto do_updates = [&] {
      for (int u = 0; u < sac.updates_per_epoch; ++u) {
        auto batch =
            buffer.sample(sac.batch_size, sac.nstep, sac.gamma, learner->rng());
        SacDiagnostics d = learner->update(batch);
        sum.q1_loss += d.q1_loss;
        sum.q2_loss += d.q2_loss;
        sum.value_loss += d.value_loss;
        sum.policy_loss += d.policy_loss;
        sum.mean_q += d.mean_q;
        sum.mean_v += d.mean_v;
        sum.mean_log_prob += d.mean_log_prob;
        ++updates_done;
      }
    };

    if (config.synchronous) {
      for (int w = 0; w < config.workers; ++w) {
        CollectStats s = collect_episode(
            config, track, car, snapshot, worker_rng[w],
            episode_counter + static_cast<uint64_t>(w) * config.episode.num_cars,
            buffer);
        stats.wall_ticks += s.wall_ticks;
        stats.total_ticks += s.total_ticks;
      }
      episode_counter +=
          static_cast<uint64_t>(config.workers) * config.episode.num_cars;
      if (buffer.size() >= min_fill) do_updates();
    } else {
      std::vector<CollectStats> worker_stats(config.workers);
      std::atomic<int> workers_left{config.workers};
      std::vector<std::thread> threads;
      threads.reserve(config.workers);
      for (int w = 0; w < config.workers; ++w) {
        threads.emplace_back([&, w] {
          worker_stats[w] = collect_episode(
              config, track, car, snapshot, worker_rng[w],
              episode_counter +
                  static_cast<uint64_t>(w) * config.episode.num_cars,
              buffer);
          --workers_left;
        });
      }
      std::exception_ptr learner_error;
      try {
        while (buffer.size() < min_fill && workers_left.load() > 0) {
          std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
        if (buffer.size() >= min_fill) do_updates();
      } catch (...) {
        learner_error = std::current_exception();
      }
      for (auto& t : threads) t.join();
      if (learner_error) std::rethrow_exception(learner_error);
      episode_counter +=
          static_cast<uint64_t>(config.workers) * config.episode.num_cars;
      for (const auto& s : worker_stats) {
        stats.wall_ticks += s.wall_ticks;
        stats.total_ticks += s.total_ticks;
      }
    }

    TrainProgress row;
    row.epoch = epoch;
    row.wall_clock_s = elapsed();
    row.buffer_size = buffer.size();
    row.updates = updates_done;
    if (updates_done > 0) {
      double inv = 1.0 / updates_done;
      row.losses.q1_loss = sum.q1_loss * inv;
      row.losses.q2_loss = sum.q2_loss * inv;
      row.losses.value_loss = sum.value_loss * inv;
      row.losses.policy_loss = sum.policy_loss * inv;
      row.losses.mean_q = sum.mean_q * inv;
      row.losses.mean_v = sum.mean_v * inv;
      row.losses.mean_log_prob = sum.mean_log_prob * inv;
    }
    row.wall_contact_fraction =
        stats.total_ticks > 0
            ? static_cast<double>(stats.wall_ticks) / stats.total_ticks
            : 0.0;

    if (epoch % config.eval_period_epochs == 0) {
      EvalOptions opts;
      opts.laps = 2;
      opts.fairness = config.eval_fairness;
      opts.timeout = config.eval_timeout;
      opts.initial_speed = config.episode.initial_speed;
      opts.observation = config.observation;
      opts.reward = config.reward;
      row.evaluated = true;
      row.eval = evaluate_lap(learner->policy(), track, car, opts);
    }

    metrics << row.epoch << ',' << row.wall_clock_s << ',' << row.buffer_size
            << ',' << row.losses.q1_loss << ',' << row.losses.q2_loss << ','
            << row.losses.value_loss << ',' << row.losses.policy_loss << ',';
    if (row.evaluated) {
      if (row.eval.dnf) metrics << "dnf";
      else metrics << row.eval.lap_time_ms;
    }
    metrics << ',' << row.wall_contact_fraction << '\n';
    metrics.flush();

    if (row.evaluated && !row.eval.dnf &&
        (!has_best || row.eval.lap_time_ms < best_lap)) {
      has_best = true;
      best_lap = row.eval.lap_time_ms;
      save(best_path, epoch);
      out.best_lap_ms = best_lap;
      out.best_checkpoint = best_path;
    }
    save(latest_path, epoch);
    out.epochs_completed = epoch;
    if (progress) progress(row);
  }

  return out;
}

}  // namespace apex
