#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "apex/car.hpp"
#include "apex/controller.hpp"
#include "apex/observation.hpp"
#include "apex/replay.hpp"
#include "apex/reward.hpp"
#include "apex/track.hpp"

namespace apex {

// Per-boundary command slew limits used when `rate_limited` is set.
struct RateLimits {
  double steer = 0.03;    // rad per applied command
  double throttle = 0.8;  // throttle units per applied command
};

// Moves `previous` toward `requested` by at most the slew limits, then
// clamps to the physical ranges. Applying it twice to the same request
// changes nothing once the request is within reach.
Action rate_limit(const Action& previous, const Action& requested,
                  double max_steer, const RateLimits& limits = {});

struct EpisodeConfig {
  double duration = 100.0;      // seconds
  int command_hz = 10;          // command boundaries per second
  int physics_hz = 60;          // integrator ticks per second
  int num_cars = 20;
  double initial_speed = 100.0 / 3.6;  // m/s along the tangent at spawn
  bool rate_limited = false;    // apply `RateLimits` between commands
  RateLimits limits;
};

// Snapshot handed to the observer after each command step (post-physics).
// Returning false ends the episode for all cars once the step completes.
struct StepSample {
  int car = 0;
  int step = 0;        // command step index, 0-based
  double time = 0.0;   // seconds since episode start at the step's end
  CarState state;
  double progress = 0.0;
  Action applied;            // physical command held during the step
  bool wall_contact = false; // any physics tick in the step touched a wall
};
using StepObserver = std::function<bool(const StepSample&)>;

struct CarEpisode {
  std::vector<Transition> transitions;
  bool faulted = false;        // simulation fault or lost track projection
  int wall_ticks = 0;          // physics ticks spent in wall contact
  int ticks = 0;               // physics ticks actually simulated
  double progress_gain = 0.0;  // sum of wrap-aware progress deltas, m
};

struct EpisodeResult {
  std::vector<CarEpisode> cars;
  int steps = 0;  // command steps per car (fewer for faulted cars)
};

// Runs one fixed-duration episode with `num_cars` cars spawned equally
// spaced along the centerline (car i at progress i * L / num_cars, heading
// along the tangent, forward speed `initial_speed`). At each command
// boundary every live car's observation is built and normalized, the
// controller picks commands, and the commands are held for
// physics_hz / command_hz ticks. One transition per car per step is
// recorded with the network-space action ({steer / max_steer, throttle}),
// the wrap-aware progress reward, and the wall penalty using the velocity
// of the step's first contact tick. A simulation fault truncates that car
// with a terminal transition; running out the clock does not set `done`.
// Cars step in parallel; all randomness lives in the controller, which is
// always called serially in car order.
EpisodeResult run_episode(const TrackDefinition& track, const CarConfig& car,
                          const EpisodeConfig& episode, Controller& controller,
                          uint64_t episode_id_base,
                          const ObsConfig& obs_config = {},
                          const RewardConfig& reward_config = {},
                          const StepObserver& observer = {});

}  // namespace apex
