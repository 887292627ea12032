#pragma once

#include <cstdint>
#include <string>

#include "apex/car.hpp"
#include "apex/observation.hpp"
#include "apex/reward.hpp"
#include "apex/rollout.hpp"
#include "apex/sac.hpp"

namespace apex {

// Full description of a run: file-format is flat `key = value` lines under
// one [section] per module, '#' comments, unknown sections or keys rejected
// with file:line diagnostics. Defaults are the full-scale hyperparameters;
// the shipped desk_*.cfg files scale them down.
struct RunConfig {
  // [run]
  uint64_t seed = 1;
  int epochs = 300;
  int workers = 4;
  bool synchronous = false;
  std::string track_path;      // resolved against the config file's directory
  std::string car_id = "slow"; // archetype: "slow" or "fast"
  std::string out_dir = "run_out";

  // [episode]
  EpisodeConfig episode{.duration = 100.0,
                        .command_hz = 10,
                        .physics_hz = 60,
                        .num_cars = 20,
                        .initial_speed = 100.0 / 3.6,
                        .rate_limited = false};

  // [observation]
  ObsConfig observation;

  // [reward]
  RewardConfig reward;

  // [sac]
  SacConfig sac;

  // [eval]
  int eval_period_epochs = 2;
  bool eval_fairness = true;
  double eval_timeout = 300.0;  // seconds allowed for two laps

  CarConfig car() const;  // resolves car_id
};

// Parses and validates a config file. Throws ConfigError with
// "<path>:<line>: ..." diagnostics for syntax errors, unknown keys,
// malformed values, out-of-range hyperparameters, or a missing track file.
RunConfig load_config(const std::string& path);

// Same parser on an in-memory string; `origin` names the source in errors.
// `base_dir` anchors relative track paths.
RunConfig parse_config(const std::string& text, const std::string& origin,
                       const std::string& base_dir = ".");

// Canonical snapshot of every field; parse_config(resolved_config_text(c))
// reproduces c exactly.
std::string resolved_config_text(const RunConfig& config);

// Range/consistency checks shared by the parser and programmatic construction.
void validate_config(const RunConfig& config);

}  // namespace apex
