#include "apex/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "apex/error.hpp"

namespace apex {

namespace {

constexpr double kSeamHysteresis = 10.0;  // m on each side of the seam

// Lap counting automaton: a lap completes when progress enters the lower
// seam band while armed; arming requires visiting the upper band, and
// re-arming requires first leaving both bands, so jitter across the seam
// cannot double-count.
struct LapCounter {
  enum class Phase { kCooldown, kCruise, kArmed };
  Phase phase = Phase::kCooldown;
  double length;

  bool advance(double progress) {
    switch (phase) {
      case Phase::kCooldown:
        if (progress >= kSeamHysteresis &&
            progress <= length - kSeamHysteresis) {
          phase = Phase::kCruise;
        }
        return false;
      case Phase::kCruise:
        if (progress > length - kSeamHysteresis) phase = Phase::kArmed;
        return false;
      case Phase::kArmed:
        if (progress < kSeamHysteresis) {
          phase = Phase::kCooldown;
          return true;
        }
        if (progress <= length - kSeamHysteresis) phase = Phase::kCruise;
        return false;
    }
    return false;
  }
};

}  // namespace

std::vector<LapRecord> evaluate_laps_with(Controller& controller,
                                          const TrackDefinition& track,
                                          const CarConfig& car,
                                          const EvalOptions& opts) {
  if (!track.closed) {
    throw ConfigError("lap evaluation requires a closed track");
  }
  if (track.total_length <= 2.0 * kSeamHysteresis) {
    throw ConfigError("track too short for seam hysteresis lap counting");
  }
  if (opts.laps < 1) throw ConfigError("eval laps must be >= 1");

  EpisodeConfig episode;
  episode.duration = opts.timeout;
  episode.command_hz = 60;
  episode.physics_hz = 60;
  episode.num_cars = 1;
  episode.initial_speed = opts.initial_speed;
  episode.rate_limited = opts.fairness;

  const double dt_ms = 1000.0 / 60.0;
  LapCounter counter{.length = track.total_length};
  std::vector<LapTick> current;  // ticks of the lap in progress
  std::vector<LapRecord> laps;

  auto close_lap = [&dt_ms](LapRecord& rec, std::vector<LapTick>&& ticks) {
    rec.trajectory = std::move(ticks);
    rec.lap_time_ms = 0.0;
    rec.wall_contact_ticks = 0;
    for (const auto& t : rec.trajectory) {
      rec.lap_time_ms += dt_ms;
      rec.wall_contact_ticks += t.wall_contact ? 1 : 0;
    }
  };

  auto observer = [&](const StepSample& s) {
    current.push_back({s.step, s.time, s.state.position, s.progress,
                       s.state.speed(), s.applied, s.wall_contact});
    if (counter.advance(s.progress)) {
      LapRecord rec;
      rec.lap_index = static_cast<int>(laps.size()) + 1;
      close_lap(rec, std::move(current));
      laps.push_back(std::move(rec));
      current.clear();
      if (static_cast<int>(laps.size()) == opts.laps) {
        return false;  // done; stop the episode
      }
    }
    return true;
  };

  run_episode(track, car, episode, controller, /*episode_id_base=*/0,
              opts.observation, opts.reward, observer);

  if (static_cast<int>(laps.size()) < opts.laps) {
    LapRecord rec;
    rec.lap_index = static_cast<int>(laps.size()) + 1;
    rec.dnf = true;
    close_lap(rec, std::move(current));
    rec.lap_time_ms = 0.0;  // no finished lap to time
    laps.push_back(std::move(rec));
  }
  return laps;
}

LapRecord evaluate_lap_with(Controller& controller,
                            const TrackDefinition& track, const CarConfig& car,
                            const EvalOptions& opts) {
  std::vector<LapRecord> laps = evaluate_laps_with(controller, track, car, opts);
  if (laps.back().dnf || static_cast<int>(laps.size()) < opts.laps) {
    return laps.back();
  }
  return laps[opts.laps - 1];
}

LapRecord evaluate_lap(const MlpParams& policy, const TrackDefinition& track,
                       const CarConfig& car, const EvalOptions& opts) {
  PolicyController controller(policy, PolicyController::Mode::kMean,
                              car.max_steer);
  return evaluate_lap_with(controller, track, car, opts);
}

std::vector<RobustnessCase> default_robustness_grid() {
  std::vector<RobustnessCase> grid;
  for (double p : {0.0, 0.01, 0.02, 0.05, 0.09}) grid.push_back({"noise", p});
  for (double ms : {0.0, 20.0, 50.0, 100.0, 150.0}) {
    grid.push_back({"delay_ms", ms});
  }
  for (double f : {0.8, 0.9, 1.0, 1.1, 1.2}) grid.push_back({"friction", f});
  return grid;
}

namespace {

void validate_case(const RobustnessCase& c, const std::string& where) {
  if (c.kind == "noise") {
    if (c.magnitude < 0.0) throw ConfigError(where + ": noise must be >= 0");
  } else if (c.kind == "delay_ms") {
    if (c.magnitude < 0.0) throw ConfigError(where + ": delay must be >= 0");
  } else if (c.kind == "friction") {
    if (c.magnitude <= 0.0) {
      throw ConfigError(where + ": friction scale must be > 0");
    }
  } else if (c.kind == "car" || c.kind == "track") {
    if (c.substitute.empty()) {
      throw ConfigError(where + ": " + c.kind + " transfer needs a target");
    }
  } else {
    throw ConfigError(where + ": unknown perturbation kind '" + c.kind + "'");
  }
}

}  // namespace

std::vector<RobustnessCase> load_robustness_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robustness grid: " + path);
  std::vector<RobustnessCase> grid;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string kind;
    if (!(row >> kind)) continue;
    std::string where = path + ":" + std::to_string(line_no);
    RobustnessCase c;
    c.kind = kind;
    if (kind == "car" || kind == "track") {
      if (!(row >> c.substitute)) {
        throw ConfigError(where + ": expected '" + kind + " <target>'");
      }
    } else {
      if (!(row >> c.magnitude) || !std::isfinite(c.magnitude)) {
        throw ConfigError(where + ": expected '" + kind + " <value>'");
      }
    }
    std::string trailing;
    if (row >> trailing) throw ConfigError(where + ": trailing tokens");
    validate_case(c, where);
    grid.push_back(c);
  }
  return grid;
}

std::vector<RobustnessRow> run_robustness(
    const MlpParams& policy, const TrackDefinition& track,
    const CarConfig& car, const LapRecord& baseline,
    const std::vector<RobustnessCase>& grid, const EvalOptions& opts,
    uint64_t noise_seed) {
  std::vector<RobustnessRow> report;
  report.reserve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    const RobustnessCase& c = grid[i];
    validate_case(c, "robustness case " + std::to_string(i));

    CarConfig eval_car = car;
    const TrackDefinition* eval_track = &track;
    TrackDefinition substitute_track;
    PerturbedController::Perturbation perturbation;

    if (c.kind == "noise") {
      perturbation.obs_noise = c.magnitude;
    } else if (c.kind == "delay_ms") {
      perturbation.delay_steps =
          static_cast<int>(std::llround(c.magnitude * 60.0 / 1000.0));
    } else if (c.kind == "friction") {
      eval_car.friction *= c.magnitude;
    } else if (c.kind == "car") {
      if (c.substitute == "slow") eval_car = CarConfig::slow();
      else if (c.substitute == "fast") eval_car = CarConfig::fast();
      else throw ConfigError("unknown car archetype: " + c.substitute);
    } else if (c.kind == "track") {
      substitute_track = load_track(c.substitute);
      eval_track = &substitute_track;
    }

    Rng noise_rng(derive_seed(noise_seed, i));
    PolicyController inner(policy, PolicyController::Mode::kMean,
                           eval_car.max_steer);
    PerturbedController outer(inner, perturbation, &noise_rng);
    LapRecord lap = evaluate_lap_with(outer, *eval_track, eval_car, opts);

    RobustnessRow row;
    row.spec = c;
    row.lap_time_ms = lap.lap_time_ms;
    row.delta_ms = lap.dnf ? 0.0 : lap.lap_time_ms - baseline.lap_time_ms;
    row.wall_contacts = lap.wall_contact_ticks;
    row.dnf = lap.dnf;
    report.push_back(row);
  }
  return report;
}

}  // namespace apex
