#include "apex/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "apex/error.hpp"

namespace apex {

Action rate_limit(const Action& previous, const Action& requested,
                  double max_steer, const RateLimits& limits) {
  double ds =
      std::clamp(requested.steer - previous.steer, -limits.steer, limits.steer);
  double dw = std::clamp(requested.throttle - previous.throttle,
                         -limits.throttle, limits.throttle);
  Action out;
  out.steer = std::clamp(previous.steer + ds, -max_steer, max_steer);
  out.throttle = std::clamp(previous.throttle + dw, -1.0, 1.0);
  return out;
}

namespace {

void validate_episode(const EpisodeConfig& e) {
  if (e.num_cars < 1) throw ConfigError("episode: num_cars must be >= 1");
  if (e.command_hz < 1 || e.physics_hz < 1) {
    throw ConfigError("episode: rates must be positive");
  }
  if (e.physics_hz % e.command_hz != 0) {
    throw ConfigError("episode: physics_hz must be a multiple of command_hz");
  }
  if (!(e.duration > 0.0) || !std::isfinite(e.duration)) {
    throw ConfigError("episode: duration must be positive");
  }
  if (!std::isfinite(e.initial_speed)) {
    throw ConfigError("episode: initial_speed must be finite");
  }
}

std::array<double, 2> network_action(const Action& physical,
                                     double max_steer) {
  return {physical.steer / max_steer, physical.throttle};
}

}  // namespace

EpisodeResult run_episode(const TrackDefinition& track, const CarConfig& car,
                          const EpisodeConfig& episode, Controller& controller,
                          uint64_t episode_id_base, const ObsConfig& obs_config,
                          const RewardConfig& reward_config,
                          const StepObserver& observer) {
  validate_episode(episode);
  const int n = episode.num_cars;
  const int ticks_per_command = episode.physics_hz / episode.command_hz;
  const double dt = 1.0 / episode.physics_hz;
  const int steps =
      static_cast<int>(std::llround(episode.duration * episode.command_hz));
  const double length = track.total_length;

  EpisodeResult result;
  result.cars.resize(n);
  result.steps = steps;

  std::vector<CarState> state(n);
  std::vector<double> progress(n);
  std::vector<CenterlineProjection> proj(n);
  std::vector<std::vector<double>> obs(n), next_obs(n);
  std::vector<Action> applied(n);  // latched physical command, starts at zero
  std::vector<char> alive(n, 1);
  std::vector<char> fault(n, 0);
  std::vector<char> contact(n, 0);
  std::vector<std::array<double, 3>> contact_v(n);

  for (int i = 0; i < n; ++i) {
    double s0 = length * static_cast<double>(i) / n;
    state[i].position = position_at(track, s0);
    state[i].heading = wrap_angle(tangent_at(track, s0));
    state[i].vx = episode.initial_speed;
    auto p = project(track, state[i].position, s0);
    if (!p) throw ConfigError("episode: spawn position does not project");
    proj[i] = *p;
    progress[i] = p->progress;
    obs[i] = normalize(build_observation(state[i], track, proj[i], obs_config));
  }

  std::vector<ControlView> views;
  std::vector<int> view_car;
  std::vector<Action> chosen;
  bool stop = false;

  for (int k = 0; k < steps; ++k) {
    views.clear();
    view_car.clear();
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      views.push_back({i, &obs[i], &state[i], &proj[i], &track});
      view_car.push_back(i);
    }
    if (views.empty()) break;

    controller.act(views, chosen);
    if (chosen.size() != views.size()) {
      throw TrainingFault("controller returned a mismatched action count");
    }
    for (size_t j = 0; j < view_car.size(); ++j) {
      int i = view_car[j];
      if (episode.rate_limited) {
        applied[i] =
            rate_limit(applied[i], chosen[j], car.max_steer, episode.limits);
      } else {
        applied[i] = {
            std::clamp(chosen[j].steer, -car.max_steer, car.max_steer),
            std::clamp(chosen[j].throttle, -1.0, 1.0)};
      }
    }

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      CarState s = state[i];
      bool failed = false;
      bool hit = false;
      std::array<double, 3> hit_v{};
      int local_ticks = 0;
      int local_wall = 0;
      for (int t = 0; t < ticks_per_command && !failed; ++t) {
        double pvx = s.vx, pvy = s.vy;
        try {
          s = step(s, applied[i], car, track, dt);
        } catch (const SimulationFault&) {
          failed = true;
          break;
        }
        ++local_ticks;
        if (s.wall_contact) {
          ++local_wall;
          if (!hit) {
            hit = true;
            hit_v = {pvx, pvy, 0.0};
          }
        }
      }
      state[i] = s;
      contact[i] = hit ? 1 : 0;
      contact_v[i] = hit_v;
      result.cars[i].ticks += local_ticks;
      result.cars[i].wall_ticks += local_wall;
      if (!failed) {
        try {
          auto p = project(track, s.position, progress[i]);
          if (!p) {
            failed = true;  // left the world: treat as a fault
          } else {
            proj[i] = *p;
            next_obs[i] =
                normalize(build_observation(s, track, *p, obs_config));
          }
        } catch (const SimulationFault&) {
          failed = true;
        }
      }
      fault[i] = failed ? 1 : 0;
    }

    for (size_t j = 0; j < view_car.size(); ++j) {
      int i = view_car[j];
      auto& ep = result.cars[i];
      if (fault[i]) {
        // Terminal close-out: no usable successor observation, so the stored
        // one is repeated; the reward keeps any wall penalty already incurred.
        double r = contact[i]
                       ? total_reward(0.0, contact_v[i], true, reward_config)
                       : 0.0;
        ep.transitions.push_back({obs[i],
                                  network_action(applied[i], car.max_steer), r,
                                  obs[i], true, episode_id_base + i, k});
        ep.faulted = true;
        alive[i] = 0;
        continue;
      }
      double r_prog = progress_reward(proj[i].progress, progress[i], length);
      ep.progress_gain += r_prog;
      double r = total_reward(r_prog, contact_v[i], contact[i] != 0,
                              reward_config);
      ep.transitions.push_back({obs[i],
                                network_action(applied[i], car.max_steer), r,
                                next_obs[i], false, episode_id_base + i, k});
      progress[i] = proj[i].progress;
      obs[i] = std::move(next_obs[i]);
      if (observer &&
          !observer({i, k, static_cast<double>(k + 1) / episode.command_hz,
                     state[i], progress[i], applied[i], contact[i] != 0})) {
        stop = true;
      }
    }
    if (stop) break;
  }

  return result;
}

}  // namespace apex
