// Command-line front end: train, eval, robustness, export, serve.
// Exit codes: 0 success, 1 usage/config error, 2 runtime fault, 3 eval DNF.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apex/checkpoint.hpp"
#include "apex/config.hpp"
#include "apex/controller.hpp"
#include "apex/error.hpp"
#include "apex/evaluation.hpp"
#include "apex/export.hpp"
#include "apex/net.hpp"
#include "apex/trainer.hpp"

namespace {

using namespace apex;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFault = 2;
constexpr int kExitDnf = 3;

// Table I lap-time formatting: mm:ss.mmm.
std::string format_lap(double ms) {
  long long total = std::llround(ms);
  if (total < 0) total = 0;
  long long minutes = total / 60000;
  long long rest = total % 60000;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld.%03lld", minutes, rest / 1000,
                rest % 1000);
  return buf;
}

CarConfig car_by_id(const std::string& id) {
  if (id == "slow") return CarConfig::slow();
  if (id == "fast") return CarConfig::fast();
  throw ConfigError("unknown car archetype: " + id + " (expected slow|fast)");
}

// Shared flags resolved against an optional config file. Explicit flags win
// over config values; without either, paper defaults apply.
struct EvalSetup {
  std::string config_path;
  std::string track_path;
  std::string car_id;
  bool no_fair = false;
  double timeout = 0.0;     // 0 = unset
  double speed_kmh = 0.0;   // 0 = unset

  TrackDefinition track;
  CarConfig car;
  EvalOptions opts;

  void resolve() {
    std::optional<RunConfig> cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    std::string track_file = !track_path.empty() ? track_path
                             : cfg              ? cfg->track_path
                                                : std::string();
    if (track_file.empty()) {
      throw ConfigError("no track: pass --track or --config");
    }
    track = load_track(track_file);
    car = car_by_id(!car_id.empty() ? car_id : cfg ? cfg->car_id : "slow");
    if (cfg) {
      opts.observation = cfg->observation;
      opts.reward = cfg->reward;
      opts.fairness = cfg->eval_fairness;
      opts.timeout = cfg->eval_timeout;
      opts.initial_speed = cfg->episode.initial_speed;
    }
    if (no_fair) opts.fairness = false;
    if (timeout > 0.0) opts.timeout = timeout;
    if (speed_kmh > 0.0) opts.initial_speed = speed_kmh / 3.6;
  }
};

MlpParams load_policy(const std::string& ckpt_path, const ObsConfig& obs) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  MlpParams policy = unpack_mlp(ck, "policy");
  if (policy.spec.input_dim != obs.dim()) {
    throw ConfigError("checkpoint expects observation dimension " +
                      std::to_string(policy.spec.input_dim) +
                      " but the current configuration produces " +
                      std::to_string(obs.dim()));
  }
  return policy;
}

int cmd_train(const std::string& config_path, uint64_t seed, bool seed_set,
              const std::string& out, bool sync, int epochs, bool resume) {
  if (config_path.empty()) throw ConfigError("train needs --config");
  RunConfig cfg = load_config(config_path);
  if (seed_set) cfg.seed = seed;
  if (!out.empty()) cfg.out_dir = out;
  if (sync) cfg.synchronous = true;
  if (epochs > 0) cfg.epochs = epochs;

  auto progress = [](const TrainProgress& p) {
    std::printf("epoch %4d  buffer %8zu  q1 %9.4f  v %9.4f  pi %9.4f  wall %5.1f%%",
                p.epoch, p.buffer_size, p.losses.q1_loss, p.losses.value_loss,
                p.losses.policy_loss, 100.0 * p.wall_contact_fraction);
    if (p.evaluated) {
      if (p.eval.dnf) {
        std::printf("  eval dnf");
      } else {
        std::printf("  eval %s", format_lap(p.eval.lap_time_ms).c_str());
      }
    }
    std::printf("\n");
    std::fflush(stdout);
  };

  TrainResult result = run_training(cfg, resume, progress);
  std::printf("completed %d epochs; metrics: %s\n", result.epochs_completed,
              result.metrics_path.c_str());
  if (!result.best_checkpoint.empty()) {
    std::printf("best lap %s  (%s)\n", format_lap(result.best_lap_ms).c_str(),
                result.best_checkpoint.c_str());
  } else {
    std::printf("no evaluation lap completed; latest checkpoint: %s\n",
                result.latest_checkpoint.c_str());
  }
  return kExitOk;
}

int cmd_eval(EvalSetup& setup, const std::string& ckpt, bool scripted,
             int laps, const std::string& out) {
  setup.resolve();

  std::optional<MlpParams> policy;
  std::optional<PolicyController> policy_controller;
  std::optional<CenterlineController> scripted_controller;
  Controller* controller;
  if (scripted) {
    scripted_controller.emplace(setup.car);
    controller = &*scripted_controller;
  } else {
    if (ckpt.empty()) throw ConfigError("eval needs --ckpt (or --scripted)");
    policy = load_policy(ckpt, setup.opts.observation);
    policy_controller.emplace(*policy, PolicyController::Mode::kMean,
                              setup.car.max_steer);
    controller = &*policy_controller;
  }

  if (laps > 0) {
    // Lap 1 is spawn-distorted, so time laps 2..N+1.
    EvalOptions opts = setup.opts;
    opts.laps = laps + 1;
    std::vector<LapRecord> records =
        evaluate_laps_with(*controller, setup.track, setup.car, opts);
    if (records.back().dnf) {
      std::printf("dnf on lap %d after %zu ticks\n", records.back().lap_index,
                  records.back().trajectory.size());
      return kExitDnf;
    }
    double sum = 0.0, sq = 0.0;
    for (int i = 1; i <= laps; ++i) {
      double t = records[i].lap_time_ms;
      std::printf("lap %2d: %s\n", records[i].lap_index,
                  format_lap(t).c_str());
      sum += t;
      sq += t * t;
    }
    double mean = sum / laps;
    double var = laps > 1 ? (sq - laps * mean * mean) / (laps - 1) : 0.0;
    double std_ms = std::sqrt(std::max(0.0, var));
    std::printf("mean %s  std %.3f s over %d laps\n",
                format_lap(mean).c_str(), std_ms / 1000.0, laps);
    return kExitOk;
  }

  LapRecord lap = evaluate_lap_with(*controller, setup.track, setup.car,
                                    setup.opts);
  if (!out.empty()) {
    auto files = export_results({lap}, {}, {}, &setup.track, out);
    for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
  }
  if (lap.dnf) {
    std::printf("dnf on lap %d after %zu ticks\n", lap.lap_index,
                lap.trajectory.size());
    return kExitDnf;
  }
  std::printf("lap %d: %s  (wall-contact ticks: %d)\n", lap.lap_index,
              format_lap(lap.lap_time_ms).c_str(), lap.wall_contact_ticks);
  return kExitOk;
}

int cmd_robustness(EvalSetup& setup, const std::string& ckpt,
                   const std::string& grid_path, const std::string& out) {
  setup.resolve();
  if (ckpt.empty()) throw ConfigError("robustness needs --ckpt");
  MlpParams policy = load_policy(ckpt, setup.opts.observation);

  LapRecord baseline = evaluate_lap(policy, setup.track, setup.car, setup.opts);
  if (baseline.dnf) {
    std::printf("baseline dnf; no deltas to report\n");
    return kExitDnf;
  }
  std::printf("baseline lap: %s\n", format_lap(baseline.lap_time_ms).c_str());

  std::vector<RobustnessCase> grid = grid_path.empty()
                                         ? default_robustness_grid()
                                         : load_robustness_grid(grid_path);
  std::vector<RobustnessRow> rows = run_robustness(
      policy, setup.track, setup.car, baseline, grid, setup.opts);
  for (const auto& r : rows) {
    std::string label = r.spec.substitute.empty()
                            ? std::to_string(r.spec.magnitude)
                            : r.spec.substitute;
    if (r.dnf) {
      std::printf("%-10s %-12s dnf\n", r.spec.kind.c_str(), label.c_str());
    } else {
      std::printf("%-10s %-12s lap %s  delta %+.3f s\n", r.spec.kind.c_str(),
                  label.c_str(), format_lap(r.lap_time_ms).c_str(),
                  r.delta_ms / 1000.0);
    }
  }
  if (!out.empty()) {
    auto files = export_results({baseline}, rows, {}, &setup.track, out);
    for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
  }
  return kExitOk;
}

int cmd_export(const std::string& metrics, const std::string& trajectory,
               const std::string& track_path, const std::string& out) {
  std::vector<LapRecord> laps;
  std::vector<LapPoint> curve;
  TrackDefinition track;
  const TrackDefinition* track_ptr = nullptr;
  if (!metrics.empty()) curve = read_metrics_lap_curve(metrics);
  if (!trajectory.empty()) {
    LapRecord lap;
    lap.lap_index = 1;
    lap.trajectory = read_trajectory_csv(trajectory);
    for (const auto& t : lap.trajectory) {
      lap.lap_time_ms += 1000.0 / 60.0;
      lap.wall_contact_ticks += t.wall_contact ? 1 : 0;
    }
    laps.push_back(std::move(lap));
  }
  if (!track_path.empty()) {
    track = load_track(track_path);
    track_ptr = &track;
  }
  auto files = export_results(laps, {}, curve, track_ptr, out);
  for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
  return kExitOk;
}

int cmd_serve(const std::string& config_path, const std::string& track_path,
              const std::string& car_id, int port, int cars, int sessions) {
  std::optional<RunConfig> cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  std::string track_file = !track_path.empty() ? track_path
                           : cfg              ? cfg->track_path
                                              : std::string();
  if (track_file.empty()) throw ConfigError("no track: pass --track or --config");
  TrackDefinition track = load_track(track_file);
  CarConfig car = car_by_id(!car_id.empty() ? car_id : cfg ? cfg->car_id : "slow");

  ServeOptions opts;
  opts.port = static_cast<uint16_t>(port);
  opts.max_sessions = sessions;
  opts.default_cars = cars;
  if (cfg) {
    opts.observation = cfg->observation;
    opts.reward = cfg->reward;
  }
  opts.on_listening = [](uint16_t p) {
    std::printf("listening on port %u\n", p);
    std::fflush(stdout);
  };
  serve_remote(track, car, opts);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D racing RL: training, evaluation, robustness, export, serve"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  uint64_t seed = 0;
  bool sync = false;
  app.add_option("--config", config_path, "run configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_flag("--sync", sync, "force synchronous (bit-reproducible) training");

  auto* train = app.add_subcommand("train", "run a training session");
  int train_epochs = 0;
  bool resume = false;
  train->add_option("--epochs", train_epochs, "override the epoch count");
  train->add_flag("--resume", resume, "continue from <out>/latest.ckpt");

  EvalSetup setup;
  std::string ckpt, grid_path, metrics_path, trajectory_path;
  bool scripted = false;
  int laps = 0;

  auto add_eval_flags = [&](CLI::App* cmd) {
    cmd->add_option("--track", setup.track_path, "track file");
    cmd->add_option("--car", setup.car_id, "car archetype (slow|fast)");
    cmd->add_flag("--no-fair", setup.no_fair,
                  "disable the per-frame action rate limiter");
    cmd->add_option("--timeout", setup.timeout, "evaluation timeout, seconds");
    cmd->add_option("--speed-kmh", setup.speed_kmh, "spawn speed, km/h");
  };

  auto* eval = app.add_subcommand("eval", "time evaluation laps");
  eval->add_option("--ckpt", ckpt, "checkpoint with the policy to evaluate");
  eval->add_flag("--scripted", scripted,
                 "evaluate the scripted centerline baseline instead");
  eval->add_option("--laps", laps,
                   "time N laps (after the spawn lap) and print mean/std");
  add_eval_flags(eval);

  auto* robust = app.add_subcommand("robustness", "perturbation study");
  robust->add_option("--ckpt", ckpt, "checkpoint with the policy to evaluate");
  robust->add_option("--grid", grid_path,
                     "perturbation grid file (default: built-in grid)");
  add_eval_flags(robust);

  auto* exp = app.add_subcommand("export", "regenerate CSV/SVG artifacts");
  exp->add_option("--metrics", metrics_path, "metrics.csv for the lap curve");
  exp->add_option("--trajectory", trajectory_path, "trajectory CSV to render");
  exp->add_option("--track", setup.track_path, "track outline for the render");

  auto* serve = app.add_subcommand("serve", "host episodes for remote clients");
  int port = 7447, cars = 20, sessions = 0;
  serve->add_option("--track", setup.track_path, "track file");
  serve->add_option("--car", setup.car_id, "car archetype (slow|fast)");
  serve->add_option("--port", port, "TCP port (0 picks an ephemeral port)");
  serve->add_option("--cars", cars, "default car count offered in the hello");
  serve->add_option("--sessions", sessions, "sessions to serve (0 = forever)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    setup.config_path = config_path;
    if (train->parsed()) {
      return cmd_train(config_path, seed, seed_opt->count() > 0, out_dir, sync,
                       train_epochs, resume);
    }
    if (eval->parsed()) {
      return cmd_eval(setup, ckpt, scripted, laps,
                      out_dir.empty() ? "eval_out" : out_dir);
    }
    if (robust->parsed()) {
      return cmd_robustness(setup, ckpt, grid_path,
                            out_dir.empty() ? "robustness_out" : out_dir);
    }
    if (exp->parsed()) {
      return cmd_export(metrics_path, trajectory_path, setup.track_path,
                        out_dir.empty() ? "export_out" : out_dir);
    }
    if (serve->parsed()) {
      return cmd_serve(config_path, setup.track_path, setup.car_id, port, cars,
                       sessions);
    }
    throw ConfigError("no command given");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return kExitFault;
  }
}
