#include "apex/controller.hpp"

#include <algorithm>
#include <cmath>

#include "apex/error.hpp"
#include "apex/mat.hpp"

namespace apex {

namespace {
constexpr double kGravity = 9.81;
}

PolicyController::PolicyController(const MlpParams& policy, Mode mode,
                                   double max_steer, Rng* rng)
    : policy_(&policy), mode_(mode), max_steer_(max_steer), rng_(rng) {
  if (mode_ == Mode::kSample && rng_ == nullptr) {
    throw ConfigError("PolicyController: sampling mode requires an rng");
  }
}

void PolicyController::act(const std::vector<ControlView>& views,
                           std::vector<Action>& actions) {
  int b = static_cast<int>(views.size());
  actions.resize(views.size());
  if (b == 0) return;
  int dim = static_cast<int>(views[0].obs->size());
  obs_.resize(b, dim);
  for (int r = 0; r < b; ++r) {
    const auto& o = *views[r].obs;
    std::copy(o.begin(), o.end(), obs_.row(r));
  }
  if (mode_ == Mode::kMean) {
    mlp_forward(*policy_, obs_, mean_out_);
    for (int r = 0; r < b; ++r) {
      actions[r].steer = std::tanh(mean_out_.at(r, 0)) * max_steer_;
      actions[r].throttle = std::tanh(mean_out_.at(r, 1));
    }
  } else {
    noise_.resize(b, kActionDim);
    for (double& v : noise_.d) v = rng_->normal();
    policy_forward_batch(*policy_, obs_, noise_, batch_);
    for (int r = 0; r < b; ++r) {
      actions[r].steer = batch_.action.at(r, 0) * max_steer_;
      actions[r].throttle = batch_.action.at(r, 1);
    }
  }
}

CenterlineController::CenterlineController(const CarConfig& car,
                                           const CenterlineGains& gains)
    : max_steer_(car.max_steer), friction_(car.friction), gains_(gains) {}

void CenterlineController::act(const std::vector<ControlView>& views,
                               std::vector<Action>& actions) {
  actions.resize(views.size());
  for (size_t i = 0; i < views.size(); ++i) {
    const CarState& st = *views[i].state;
    const CenterlineProjection& pr = *views[i].projection;
    const TrackDefinition& track = *views[i].track;

    double theta = wrap_angle(st.heading - pr.tangent_heading);
    double steer = -gains_.heading * theta - gains_.lateral * pr.lateral_offset;
    steer = std::clamp(steer, -max_steer_, max_steer_);

    // Slow down for the sharpest curvature within a short time horizon.
    double k_max = 0.0;
    double speed = std::max(st.speed(), 1.0);
    for (double t = 0.0; t <= 2.5; t += 0.5) {
      double k = std::abs(curvature_at(track, pr.progress + speed * t));
      k_max = std::max(k_max, k);
    }
    double limit = std::sqrt(gains_.corner_margin * friction_ * kGravity /
                             std::max(k_max, 1e-4));
    double target = std::min(gains_.cruise_speed, limit);
    double throttle = std::clamp(gains_.speed * (target - st.vx), -1.0, 1.0);

    actions[i] = {steer, throttle};
  }
}

PerturbedController::PerturbedController(Controller& inner,
                                         const Perturbation& perturbation,
                                         Rng* rng)
    : inner_(&inner), perturbation_(perturbation), rng_(rng) {
  if (perturbation_.obs_noise > 0.0 && rng_ == nullptr) {
    throw ConfigError("PerturbedController: observation noise requires an rng");
  }
  if (perturbation_.obs_noise < 0.0 || perturbation_.delay_steps < 0) {
    throw ConfigError("PerturbedController: negative perturbation");
  }
}

void PerturbedController::act(const std::vector<ControlView>& views,
                              std::vector<Action>& actions) {
  std::vector<std::vector<double>> sensed(views.size());
  for (size_t i = 0; i < views.size(); ++i) {
    sensed[i] = *views[i].obs;
    if (perturbation_.obs_noise > 0.0) {
      for (double& v : sensed[i]) {
        v *= 1.0 + rng_->uniform(-perturbation_.obs_noise,
                                 perturbation_.obs_noise);
      }
    }
  }
  history_.push_back(std::move(sensed));
  while (history_.size() > static_cast<size_t>(perturbation_.delay_steps) + 1) {
    history_.pop_front();
  }
  const auto& effective = history_.front().size() == views.size()
                              ? history_.front()
                              : history_.back();
  std::vector<ControlView> delayed(views.size());
  for (size_t i = 0; i < views.size(); ++i) {
    delayed[i] = {views[i].car, &effective[i], views[i].state,
                  views[i].projection, views[i].track};
  }
  inner_->act(delayed, actions);
}

}  // namespace apex
