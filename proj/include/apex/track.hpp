#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apex/geom.hpp"

namespace apex {

// Closed (or open) race circuit: centerline samples with per-point lateral
// half-width, wall polylines, and a cumulative arclength table. Immutable
// after load; all queries are pure and safe to share across workers.
struct TrackDefinition {
  std::vector<Vec2> centerline;
  std::vector<double> half_width;
  std::vector<Vec2> left_wall;
  std::vector<Vec2> right_wall;
  std::vector<double> arclength;  // per centerline point, arclength[0] == 0
  double total_length = 0.0;
  bool closed = true;

  // Signed curvature at each centerline point (circumcircle of the point
  // and its two neighbors; left turns positive).
  std::vector<double> point_curvature;

  // FNV-1a hash of the geometry, used by the wire protocol handshake.
  uint64_t content_hash = 0;

  // Flattened wall segments with inward normals and the arclength of the
  // nearest centerline point, precomputed for contact queries.
  struct WallSegment {
    Vec2 a, b;
    Vec2 inward;             // unit normal pointing into the corridor
    double anchor_progress;  // arclength of the segment midpoint's projection
  };
  std::vector<WallSegment> wall_segments;

  int num_points() const { return static_cast<int>(centerline.size()); }
  // Number of centerline segments (includes the seam segment when closed).
  int num_segments() const {
    return closed ? num_points() : num_points() - 1;
  }
  Vec2 segment_start(int i) const { return centerline[i]; }
  Vec2 segment_end(int i) const {
    return centerline[(i + 1) % num_points()];
  }
  double segment_arclength(int i) const { return arclength[i]; }
  double segment_length(int i) const {
    double next = (i + 1 < num_points()) ? arclength[i + 1] : total_length;
    return next - arclength[i];
  }
  double half_width_at(double progress) const;
};

struct CenterlineProjection {
  double progress = 0.0;        // arclength meters in [0, total_length)
  double lateral_offset = 0.0;  // signed meters, positive = left of travel
  double tangent_heading = 0.0; // radians
};

struct WallContact {
  Vec2 normal;        // unit, pointing into the track
  double penetration; // meters, >= 0 (0 = touching)
  Vec2 point;         // deepest footprint vertex
};

struct TrackLoadOptions {
  // Maximum turning angle between consecutive centerline segments.
  double max_turn_angle = 0.35;
  // Minimum clearance between a centerline point and either wall.
  double min_wall_clearance = 0.5;
};

// Parses the `track-v1` text format. Walls are generated by lateral offset
// of the centerline unless the file provides explicit [left_wall] /
// [right_wall] sections. Throws ConfigError with a descriptive message on
// parse failures and invariant violations.
TrackDefinition load_track(const std::string& path,
                           const TrackLoadOptions& opts = {});

// Builds a TrackDefinition from in-memory samples (used by tests and the
// track fixtures). Runs the same validation as load_track.
TrackDefinition build_track(std::vector<Vec2> centerline,
                            std::vector<double> half_width, bool closed,
                            std::vector<Vec2> left_wall = {},
                            std::vector<Vec2> right_wall = {},
                            const TrackLoadOptions& opts = {});

// Signed inverse radius of the circle through three pairwise-distinct
// points: positive for a left (counterclockwise) turn, negative for a
// right turn, zero when collinear. Throws std::invalid_argument when two
// points coincide.
double circum_curvature(Vec2 p_prev, Vec2 p, Vec2 p_next);

// Projects a position onto the centerline, searching segments within
// +-window meters of arclength around `hint` and falling back to a global
// search when the local window finds nothing within `max_distance`.
// Returns nullopt when the position is farther than `max_distance` from
// every segment (out of world).
std::optional<CenterlineProjection> project(
    const TrackDefinition& track, Vec2 position, double hint,
    double window = 25.0, double max_distance = 100.0);

// Global brute-force projection over all segments. Reference
// implementation for the windowed search; also its fallback.
std::optional<CenterlineProjection> project_global(
    const TrackDefinition& track, Vec2 position, double max_distance = 100.0);

// Heading of the centerline tangent at the given progress.
double tangent_at(const TrackDefinition& track, double progress);

// Centerline position at the given progress (piecewise linear).
Vec2 position_at(const TrackDefinition& track, double progress);

// Piecewise-linear interpolation of per-point curvature in arclength,
// continuous across the lap seam for closed tracks.
double curvature_at(const TrackDefinition& track, double progress);

// Distances to the nearest wall intersection along rays at the given
// angles relative to `heading`, clamped to max_range. Rays that hit
// nothing return max_range.
std::vector<double> raycast(const TrackDefinition& track, Vec2 origin,
                            double heading,
                            const std::vector<double>& relative_angles,
                            double max_range);

// Deepest wall intersection of a convex footprint polygon, or nullopt when
// the footprint is fully inside the corridor. Touching (penetration 0)
// counts as contact.
std::optional<WallContact> wall_contact(const TrackDefinition& track,
                                        const std::vector<Vec2>& footprint);

// Wraps an arclength coordinate into [0, total_length).
double wrap_progress(const TrackDefinition& track, double s);

}  // namespace apex
