#pragma once

#include <string>
#include <vector>

#include "apex/evaluation.hpp"
#include "apex/track.hpp"

namespace apex {

// One point of the evaluation-lap-time-over-training curve.
struct LapPoint {
  int epoch = 0;
  double lap_ms = 0.0;
};

// CSV writers emit floats with 17 significant digits so re-ingesting
// reproduces every value exactly. Each writer returns the path written and
// throws ConfigError when the file cannot be created.
std::string write_trajectory_csv(const LapRecord& lap,
                                 const std::string& path);
std::vector<LapTick> read_trajectory_csv(const std::string& path);

std::string write_lap_table_csv(const std::vector<LapRecord>& laps,
                                const std::string& path);

// Schema: perturbation_kind, magnitude, lap_time_ms, delta_ms,
// wall_contacts, dnf.
std::string write_robustness_csv(const std::vector<RobustnessRow>& rows,
                                 const std::string& path);

// Pulls (epoch, eval_lap_ms) pairs out of a training metrics CSV, skipping
// epochs without an evaluation and DNF entries.
std::vector<LapPoint> read_metrics_lap_curve(const std::string& metrics_path);

// Self-contained SVG plots.
std::string write_lap_curve_svg(const std::vector<LapPoint>& points,
                                const std::string& path);
std::string write_trajectory_svg(const TrackDefinition* track,
                                 const LapRecord& lap,
                                 const std::string& path);
std::string write_robustness_svg(const std::vector<RobustnessRow>& rows,
                                 const std::string& path);

// Writes every artifact derivable from the given records into out_dir and
// returns the produced paths. Throws ConfigError("nothing to export") when
// every input is empty.
std::vector<std::string> export_results(
    const std::vector<LapRecord>& laps,
    const std::vector<RobustnessRow>& robustness,
    const std::vector<LapPoint>& lap_curve, const TrackDefinition* track,
    const std::string& out_dir);

}  // namespace apex
