#include "apex/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "apex/error.hpp"

namespace apex {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write: " + path);
  return out;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// strtod rather than std::stod: stod raises out_of_range on subnormals,
// which would make the 17-digit CSVs unreadable for tiny values.
double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ConfigError(where + ": malformed number '" + s + "'");
  }
  return v;
}

// Blue (slow) to red (fast) color ramp.
std::string speed_color(double speed, double lo, double hi) {
  double t = hi > lo ? std::clamp((speed - lo) / (hi - lo), 0.0, 1.0) : 0.0;
  int r = static_cast<int>(std::lround(40 + 215 * t));
  int g = static_cast<int>(std::lround(60 + 40 * (1.0 - std::abs(2 * t - 1))));
  int b = static_cast<int>(std::lround(255 - 215 * t));
  char buf[32];
  std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", r, g, b);
  return buf;
}

struct SvgCanvas {
  std::ostringstream body;
  double width, height;

  SvgCanvas(double w, double h) : width(w), height(h) {}

  std::string finish() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
    return out.str();
  }

  void line(double x1, double y1, double x2, double y2,
            const std::string& color, double width_px) {
    body << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2
         << "\" y2=\"" << y2 << "\" stroke=\"" << color
         << "\" stroke-width=\"" << width_px << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& color, double width_px) {
    if (pts.size() < 2) return;
    body << "<polyline fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"" << width_px << "\" points=\"";
    for (const auto& [x, y] : pts) body << x << "," << y << " ";
    body << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& color = "black") {
    body << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
         << "\" font-family=\"monospace\" fill=\"" << color << "\">" << s
         << "</text>\n";
  }

  void circle(double x, double y, double r, const std::string& color) {
    body << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << r
         << "\" fill=\"" << color << "\"/>\n";
  }
};

}  // namespace

std::string write_trajectory_csv(const LapRecord& lap,
                                 const std::string& path) {
  auto out = open_out(path);
  out << "tick,time_s,x,y,progress,speed,steer,throttle,wall\n";
  for (const auto& t : lap.trajectory) {
    out << t.tick << ',' << g17(t.time) << ',' << g17(t.position.x) << ','
        << g17(t.position.y) << ',' << g17(t.progress) << ',' << g17(t.speed)
        << ',' << g17(t.applied.steer) << ',' << g17(t.applied.throttle)
        << ',' << (t.wall_contact ? 1 : 0) << '\n';
  }
  return path;
}

std::vector<LapTick> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory csv: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError(path + ": missing header");
  }
  std::vector<LapTick> ticks;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv(line);
    std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != 9) throw ConfigError(where + ": expected 9 fields");
    LapTick t;
    t.tick = static_cast<int>(parse_double(f[0], where));
    t.time = parse_double(f[1], where);
    t.position = {parse_double(f[2], where), parse_double(f[3], where)};
    t.progress = parse_double(f[4], where);
    t.speed = parse_double(f[5], where);
    t.applied = {parse_double(f[6], where), parse_double(f[7], where)};
    t.wall_contact = parse_double(f[8], where) != 0.0;
    ticks.push_back(t);
  }
  return ticks;
}

std::string write_lap_table_csv(const std::vector<LapRecord>& laps,
                                const std::string& path) {
  auto out = open_out(path);
  out << "lap_index,lap_time_ms,wall_contact_ticks,dnf\n";
  for (const auto& lap : laps) {
    out << lap.lap_index << ',' << g17(lap.lap_time_ms) << ','
        << lap.wall_contact_ticks << ',' << (lap.dnf ? 1 : 0) << '\n';
  }
  return path;
}

std::string write_robustness_csv(const std::vector<RobustnessRow>& rows,
                                 const std::string& path) {
  auto out = open_out(path);
  out << "perturbation_kind,magnitude,lap_time_ms,delta_ms,wall_contacts,"
         "dnf\n";
  for (const auto& r : rows) {
    std::string magnitude =
        (r.spec.kind == "car" || r.spec.kind == "track") ? r.spec.substitute
                                                         : g17(r.spec.magnitude);
    out << r.spec.kind << ',' << magnitude << ',' << g17(r.lap_time_ms) << ','
        << g17(r.delta_ms) << ',' << r.wall_contacts << ',' << (r.dnf ? 1 : 0)
        << '\n';
  }
  return path;
}

std::vector<LapPoint> read_metrics_lap_curve(const std::string& metrics_path) {
  std::ifstream in(metrics_path);
  if (!in) throw ConfigError("cannot open metrics csv: " + metrics_path);
  std::string line;
  std::vector<LapPoint> points;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() < 8) continue;
    const std::string& lap = f[7];
    if (lap.empty() || lap == "dnf") continue;
    points.push_back({static_cast<int>(parse_double(f[0], metrics_path)),
                      parse_double(lap, metrics_path)});
  }
  return points;
}

std::string write_lap_curve_svg(const std::vector<LapPoint>& points,
                                const std::string& path) {
  const double w = 800, h = 500, margin = 60;
  SvgCanvas svg(w, h);
  if (!points.empty()) {
    double min_ms = points[0].lap_ms, max_ms = points[0].lap_ms;
    int min_e = points[0].epoch, max_e = points[0].epoch;
    for (const auto& p : points) {
      min_ms = std::min(min_ms, p.lap_ms);
      max_ms = std::max(max_ms, p.lap_ms);
      min_e = std::min(min_e, p.epoch);
      max_e = std::max(max_e, p.epoch);
    }
    if (max_ms == min_ms) max_ms = min_ms + 1.0;
    if (max_e == min_e) max_e = min_e + 1;
    auto px = [&](double e) {
      return margin + (e - min_e) / (max_e - min_e) * (w - 2 * margin);
    };
    auto py = [&](double ms) {
      return h - margin - (ms - min_ms) / (max_ms - min_ms) * (h - 2 * margin);
    };
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : points) pts.push_back({px(p.epoch), py(p.lap_ms)});
    svg.polyline(pts, "rgb(30,90,200)", 2.0);
    for (const auto& [x, y] : pts) svg.circle(x, y, 2.5, "rgb(30,90,200)");
    svg.text(margin, margin - 20, "evaluation lap time (ms) vs epoch", 14);
    svg.text(margin, h - margin + 30, "epoch " + std::to_string(min_e));
    svg.text(w - margin - 80, h - margin + 30,
             "epoch " + std::to_string(max_e));
    svg.text(8, py(max_ms) + 4, g17(max_ms).substr(0, 8));
    svg.text(8, py(min_ms) + 4, g17(min_ms).substr(0, 8));
  } else {
    svg.text(margin, h / 2, "no evaluation points", 14);
  }
  svg.line(margin, h - margin, w - margin, h - margin, "black", 1.0);
  svg.line(margin, margin, margin, h - margin, "black", 1.0);
  auto out = open_out(path);
  out << svg.finish();
  return path;
}

std::string write_trajectory_svg(const TrackDefinition* track,
                                 const LapRecord& lap,
                                 const std::string& path) {
  const double w = 800, h = 800, margin = 40;
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  auto grow = [&](Vec2 p) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  if (track) {
    for (Vec2 p : track->left_wall) grow(p);
    for (Vec2 p : track->right_wall) grow(p);
    for (Vec2 p : track->centerline) grow(p);
  }
  for (const auto& t : lap.trajectory) grow(t.position);
  if (min_x > max_x) {
    min_x = min_y = 0.0;
    max_x = max_y = 1.0;
  }
  double span = std::max(max_x - min_x, max_y - min_y);
  if (span <= 0.0) span = 1.0;
  auto px = [&](double x) { return margin + (x - min_x) / span * (w - 2 * margin); };
  // SVG y grows downward; world y grows upward.
  auto py = [&](double y) { return h - margin - (y - min_y) / span * (h - 2 * margin); };

  SvgCanvas svg(w, h);
  if (track) {
    auto wall = [&](const std::vector<Vec2>& pts) {
      std::vector<std::pair<double, double>> poly;
      for (Vec2 p : pts) poly.push_back({px(p.x), py(p.y)});
      if (track->closed && !pts.empty()) {
        poly.push_back({px(pts[0].x), py(pts[0].y)});
      }
      svg.polyline(poly, "rgb(120,120,120)", 1.5);
    };
    wall(track->left_wall);
    wall(track->right_wall);
  }
  double lo = 1e300, hi = -1e300;
  for (const auto& t : lap.trajectory) {
    lo = std::min(lo, t.speed);
    hi = std::max(hi, t.speed);
  }
  for (size_t i = 1; i < lap.trajectory.size(); ++i) {
    const auto& a = lap.trajectory[i - 1];
    const auto& b = lap.trajectory[i];
    svg.line(px(a.position.x), py(a.position.y), px(b.position.x),
             py(b.position.y), speed_color(b.speed, lo, hi), 2.0);
  }
  if (!lap.trajectory.empty()) {
    svg.text(margin, 24,
             "lap trajectory, speed " + g17(lo).substr(0, 5) + " (blue) to " +
                 g17(hi).substr(0, 5) + " m/s (red)",
             14);
  } else {
    svg.text(margin, 24, "empty trajectory", 14);
  }
  auto out = open_out(path);
  out << svg.finish();
  return path;
}

std::string write_robustness_svg(const std::vector<RobustnessRow>& rows,
                                 const std::string& path) {
  const double w = 800, h = 500, margin = 60;
  SvgCanvas svg(w, h);
  std::map<std::string, std::vector<const RobustnessRow*>> by_kind;
  for (const auto& r : rows) by_kind[r.spec.kind].push_back(&r);

  double max_delta = 1.0, min_delta = 0.0;
  for (const auto& r : rows) {
    if (!r.dnf) {
      max_delta = std::max(max_delta, r.delta_ms);
      min_delta = std::min(min_delta, r.delta_ms);
    }
  }
  auto py = [&](double d) {
    return h - margin -
           (d - min_delta) / (max_delta - min_delta) * (h - 2 * margin);
  };
  const char* colors[] = {"rgb(200,60,40)", "rgb(30,90,200)", "rgb(30,150,60)",
                          "rgb(150,60,180)", "rgb(200,140,20)"};
  int kind_idx = 0;
  for (const auto& [kind, series] : by_kind) {
    const std::string color = colors[kind_idx % 5];
    double max_mag = 1.0;
    for (const auto* r : series) max_mag = std::max(max_mag, r->spec.magnitude);
    std::vector<std::pair<double, double>> pts;
    for (const auto* r : series) {
      double x = margin + r->spec.magnitude / max_mag * (w - 2 * margin);
      if (r->dnf) {
        svg.text(x - 4, margin + 14 * kind_idx + 12, "x", 14, color);
      } else {
        pts.push_back({x, py(r->delta_ms)});
      }
    }
    std::sort(pts.begin(), pts.end());
    svg.polyline(pts, color, 2.0);
    for (const auto& [x, y] : pts) svg.circle(x, y, 2.5, color);
    svg.text(w - margin - 120, margin + 16 * kind_idx, kind, 13, color);
    ++kind_idx;
  }
  svg.text(margin, margin - 20, "lap-time loss (ms) vs perturbation", 14);
  svg.line(margin, h - margin, w - margin, h - margin, "black", 1.0);
  svg.line(margin, margin, margin, h - margin, "black", 1.0);
  svg.line(margin, py(0.0), w - margin, py(0.0), "rgb(180,180,180)", 0.8);
  auto out = open_out(path);
  out << svg.finish();
  return path;
}

std::vector<std::string> export_results(
    const std::vector<LapRecord>& laps,
    const std::vector<RobustnessRow>& robustness,
    const std::vector<LapPoint>& lap_curve, const TrackDefinition* track,
    const std::string& out_dir) {
  if (laps.empty() && robustness.empty() && lap_curve.empty()) {
    throw ConfigError("nothing to export");
  }
  std::filesystem::create_directories(out_dir);
  auto at = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  std::vector<std::string> written;
  if (!laps.empty()) {
    written.push_back(write_lap_table_csv(laps, at("laps.csv")));
    for (size_t i = 0; i < laps.size(); ++i) {
      written.push_back(write_trajectory_csv(
          laps[i], at("trajectory_" + std::to_string(i) + ".csv")));
    }
    written.push_back(write_trajectory_svg(track, laps[0], at("trajectory.svg")));
  }
  if (!robustness.empty()) {
    written.push_back(write_robustness_csv(robustness, at("robustness.csv")));
    written.push_back(write_robustness_svg(robustness, at("robustness.svg")));
  }
  if (!lap_curve.empty()) {
    written.push_back(write_lap_curve_svg(lap_curve, at("lap_curve.svg")));
  }
  return written;
}

}  // namespace apex
