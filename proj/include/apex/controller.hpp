#pragma once

#include <deque>
#include <vector>

#include "apex/car.hpp"
#include "apex/mlp.hpp"
#include "apex/policy.hpp"
#include "apex/track.hpp"

namespace apex {

// Everything a controller may look at when choosing a command for one car.
// `obs` is the normalized feature vector; `state` and `projection` exist so
// that scripted baselines can read ground truth the feature vector omits.
struct ControlView {
  int car = 0;  // stable car index within the episode
  const std::vector<double>* obs = nullptr;
  const CarState* state = nullptr;
  const CenterlineProjection* projection = nullptr;
  const TrackDefinition* track = nullptr;
};

// Chooses one physical command (steering in radians, throttle in [-1, 1])
// per car at every command boundary. Called with all live cars at once so
// implementations can batch their work.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void act(const std::vector<ControlView>& views,
                   std::vector<Action>& actions) = 0;
};

// Drives with a squashed-Gaussian policy network. kSample draws fresh noise
// from `rng` for every car (row order, so runs are reproducible); kMean uses
// the squashed mean. Network outputs in (-1, 1) map to physical commands as
// steer = a0 * max_steer, throttle = a1.
class PolicyController : public Controller {
 public:
  enum class Mode { kSample, kMean };

  PolicyController(const MlpParams& policy, Mode mode, double max_steer,
                   Rng* rng = nullptr);

  void act(const std::vector<ControlView>& views,
           std::vector<Action>& actions) override;

 private:
  const MlpParams* policy_;
  Mode mode_;
  double max_steer_;
  Rng* rng_;
  Mat obs_;
  Mat noise_;
  Mat mean_out_;
  PolicyBatch batch_;
};

// Tuning for the scripted proportional baseline.
struct CenterlineGains {
  double heading = 1.5;         // steer rad per rad of heading error
  double lateral = 0.05;        // steer rad per metre of offset
  double speed = 0.4;           // throttle per m/s of speed error
  double cruise_speed = 10.0;   // straight-line target, m/s
  double corner_margin = 0.85;  // fraction of the friction-limit speed
};

// Scripted proportional baseline: steers against the heading error and the
// lateral offset, and tracks the smaller of a cruise speed and the
// friction-limited speed for the curvature visible in the look-ahead
// samples. Deterministic.
class CenterlineController : public Controller {
 public:
  explicit CenterlineController(const CarConfig& car,
                                const CenterlineGains& gains = {});

  void act(const std::vector<ControlView>& views,
           std::vector<Action>& actions) override;

 private:
  double max_steer_;
  double friction_;
  CenterlineGains gains_;
};

// Decorator used by robustness evaluation: multiplies every observation
// component by (1 + u), u ~ U(-obs_noise, obs_noise), at sensing time, and
// feeds the inner controller the reading from `delay_steps` boundaries ago
// (the first reading is repeated until the pipeline fills). State and
// projection pass through un-delayed; policy controllers never read them.
class PerturbedController : public Controller {
 public:
  struct Perturbation {
    double obs_noise = 0.0;  // multiplicative amplitude on normalized obs
    int delay_steps = 0;     // command boundaries of sensing latency
  };

  PerturbedController(Controller& inner, const Perturbation& perturbation,
                      Rng* rng = nullptr);

  void act(const std::vector<ControlView>& views,
           std::vector<Action>& actions) override;

 private:
  Controller* inner_;
  Perturbation perturbation_;
  Rng* rng_;
  std::deque<std::vector<std::vector<double>>> history_;
};

}  // namespace apex
