#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apex/car.hpp"
#include "apex/controller.hpp"
#include "apex/observation.hpp"
#include "apex/reward.hpp"
#include "apex/rollout.hpp"
#include "apex/track.hpp"

namespace apex {

struct LapTick {
  int tick = 0;         // 60 Hz tick index within the evaluation episode
  double time = 0.0;    // seconds since episode start
  Vec2 position;
  double progress = 0.0;
  double speed = 0.0;
  Action applied;
  bool wall_contact = false;
};

struct LapRecord {
  int lap_index = 0;           // 1-based; the protocol reports the last lap
  double lap_time_ms = 0.0;    // sequential sum of per-tick dt over the lap
  int wall_contact_ticks = 0;
  bool dnf = false;            // laps not completed within the timeout
  std::vector<LapTick> trajectory;  // this lap's ticks, contiguous
};

struct EvalOptions {
  int laps = 2;            // consecutive laps to drive; the last is reported
  bool fairness = true;    // per-frame action rate limiting
  double timeout = 300.0;  // seconds allowed for all laps together
  double initial_speed = 100.0 / 3.6;
  ObsConfig observation;
  RewardConfig reward;
};

// Drives `laps` consecutive laps at 60 Hz and returns one record per
// completed lap, in order. Lap boundaries are progress wraps through the
// seam with 10 m of hysteresis on both sides. Timeout or a simulation fault
// appends a final dnf record carrying the partial current-lap trajectory
// (lap_time_ms = 0 for that record).
std::vector<LapRecord> evaluate_laps_with(Controller& controller,
                                          const TrackDefinition& track,
                                          const CarConfig& car,
                                          const EvalOptions& opts = {});

// The record of lap `opts.laps` alone (the fixed spawn speed distorts lap 1,
// hence second-lap reporting by default), or the dnf record if the run fell
// short.
LapRecord evaluate_lap_with(Controller& controller,
                            const TrackDefinition& track, const CarConfig& car,
                            const EvalOptions& opts = {});

// evaluate_lap_with driven by the policy's deterministic mean action.
LapRecord evaluate_lap(const MlpParams& policy, const TrackDefinition& track,
                       const CarConfig& car, const EvalOptions& opts = {});

// One cell of the robustness study.
struct RobustnessCase {
  std::string kind;        // "noise", "delay_ms", "friction", "car", "track"
  double magnitude = 0.0;  // noise fraction, delay ms, friction scale
  std::string substitute;  // archetype id or track path for transfers
};

struct RobustnessRow {
  RobustnessCase spec;
  double lap_time_ms = 0.0;
  double delta_ms = 0.0;  // vs the unperturbed baseline
  int wall_contacts = 0;
  bool dnf = false;
};

// noise {0, 1, 2, 5, 9}%, delay {0, 20, 50, 100, 150} ms,
// friction scale {0.8, 0.9, 1.0, 1.1, 1.2}.
std::vector<RobustnessCase> default_robustness_grid();

// Parses a robustness grid file: one "kind value" pair per line,
// '#' comments. Rejects unknown kinds and out-of-range magnitudes.
std::vector<RobustnessCase> load_robustness_grid(const std::string& path);

// Evaluates the policy under each perturbation (observation noise and
// inference delay wrap the controller; friction scales the car; transfers
// swap the car or track) and reports lap-time deltas against `baseline`.
std::vector<RobustnessRow> run_robustness(
    const MlpParams& policy, const TrackDefinition& track,
    const CarConfig& car, const LapRecord& baseline,
    const std::vector<RobustnessCase>& grid, const EvalOptions& opts = {},
    uint64_t noise_seed = 0x0b5e7);

}  // namespace apex
