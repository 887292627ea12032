#pragma once

#include <array>
#include <vector>

#include "apex/car.hpp"
#include "apex/track.hpp"

namespace apex {

struct ObsConfig {
  int num_rangefinders = 13;     // spanning the front 180 degrees
  int num_curvatures = 10;       // look-ahead curvature samples
  double max_range = 100.0;      // rangefinder clamp, m
  double lookahead_start = 1.0;  // first curvature sample, seconds ahead
  double lookahead_end = 2.8;    // last curvature sample, seconds ahead

  int dim() const { return 9 + num_rangefinders + num_curvatures; }
};

// Fixed per-field normalization constants; fixed (rather than running
// statistics) so replayed transitions are reproducible.
struct NormScales {
  double speed = 100.0;     // m/s
  double accel = 20.0;      // m/s^2
  double angle = std::numbers::pi;
  double range = 100.0;     // m
  double curvature = 0.1;   // 1/m
};

// Driver-perceivable feature vector: body-frame velocity and acceleration
// (third component fixed at 0 in the planar world), heading-to-tangent
// angle, wall rangefinders, previous steering, wall-contact flag, and
// look-ahead centerline curvatures.
struct Observation {
  std::array<double, 3> v{};
  std::array<double, 3> v_dot{};
  double theta = 0.0;
  std::vector<double> rangefinders;
  double prev_steering = 0.0;
  double wall_flag = 0.0;
  std::vector<double> curvatures;

  int dim() const {
    return 9 + static_cast<int>(rangefinders.size()) +
           static_cast<int>(curvatures.size());
  }
};

// Builds the feature vector. Rangefinder angles span -90..+90 degrees
// relative to the heading; curvature samples sit at progress + speed * t_k
// for t_k equally spaced over the look-ahead window, wrapping the lap seam.
// `projection` must be current for state.position.
Observation build_observation(const CarState& state,
                              const TrackDefinition& track,
                              const CenterlineProjection& projection,
                              const ObsConfig& config = {});

// Flattens to [v, v_dot, theta, rangefinders, prev_steering, wall_flag,
// curvatures], each field divided by its scale. Throws SimulationFault on
// non-finite input.
std::vector<double> normalize(const Observation& obs,
                              const NormScales& scales = {});

// Inverse of normalize for a vector of the configured dimension (exact up
// to one floating-point rounding per field).
Observation denormalize(const std::vector<double>& flat,
                        const ObsConfig& config, const NormScales& scales = {});

}  // namespace apex
