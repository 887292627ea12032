#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "apex/error.hpp"
#include "apex/export.hpp"

using namespace apex;
using doctest::Contains;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path root;
  TempDir() {
    root = fs::temp_directory_path() /
           ("apex_export_test_" + std::to_string(getpid()));
    fs::create_directories(root);
  }
  ~TempDir() { fs::remove_all(root); }
  std::string at(const std::string& name) const {
    return (root / name).string();
  }
};

bool bits_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

LapRecord awkward_lap() {
  LapRecord lap;
  lap.lap_index = 2;
  lap.lap_time_ms = 4321.0 / 3.0;
  lap.wall_contact_ticks = 1;
  // values chosen to expose any formatting that loses precision
  lap.trajectory = {
      {0, 1.0 / 60.0, {std::numbers::pi, -0.0}, 0.1, 9.99999999999999, {0.523598775598298873, 1.0}, false},
      {1, 2.0 / 60.0, {1e300, 5e-324}, 1e-17, 2.0 / 3.0, {-0.0300000000000000002, -1.0}, true},
      {2, 3.0 / 60.0, {-123.456, 654.321}, 99.9, 0.0, {0.0, 0.0}, false},
  };
  return lap;
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string whole_file(const std::string& path) {
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return all;
}

}  // namespace

TEST_CASE("trajectory csv round-trips every tick bit for bit") {
  TempDir tmp;
  LapRecord lap = awkward_lap();
  std::string path = write_trajectory_csv(lap, tmp.at("traj.csv"));
  CHECK(path == tmp.at("traj.csv"));
  CHECK(first_line(path) ==
        "tick,time_s,x,y,progress,speed,steer,throttle,wall");

  std::vector<LapTick> back = read_trajectory_csv(path);
  REQUIRE(back.size() == lap.trajectory.size());
  for (size_t i = 0; i < back.size(); ++i) {
    const LapTick& a = lap.trajectory[i];
    const LapTick& b = back[i];
    CHECK(b.tick == a.tick);
    CHECK(bits_equal(b.time, a.time));
    CHECK(bits_equal(b.position.x, a.position.x));
    CHECK(bits_equal(b.position.y, a.position.y));
    CHECK(bits_equal(b.progress, a.progress));
    CHECK(bits_equal(b.speed, a.speed));
    CHECK(bits_equal(b.applied.steer, a.applied.steer));
    CHECK(bits_equal(b.applied.throttle, a.applied.throttle));
    CHECK(b.wall_contact == a.wall_contact);
  }
}

TEST_CASE("trajectory csv reader reports precise diagnostics") {
  TempDir tmp;

  CHECK_THROWS_WITH_AS(read_trajectory_csv(tmp.at("missing.csv")),
                       Contains("cannot open"), ConfigError);

  std::ofstream(tmp.at("empty.csv"));
  CHECK_THROWS_WITH_AS(read_trajectory_csv(tmp.at("empty.csv")),
                       Contains("missing header"), ConfigError);

  std::ofstream(tmp.at("short.csv"))
      << "tick,time_s,x,y,progress,speed,steer,throttle,wall\n"
      << "0,0.016,1,2,3,4,0.1,0.5\n";  // 8 fields
  CHECK_THROWS_WITH_AS(read_trajectory_csv(tmp.at("short.csv")),
                       Contains(":2: expected 9 fields"), ConfigError);

  std::ofstream(tmp.at("junk.csv"))
      << "tick,time_s,x,y,progress,speed,steer,throttle,wall\n"
      << "0,sixteen,1,2,3,4,0.1,0.5,0\n";
  CHECK_THROWS_WITH_AS(read_trajectory_csv(tmp.at("junk.csv")),
                       Contains("malformed number 'sixteen'"), ConfigError);
}

TEST_CASE("lap table csv lists one row per record") {
  TempDir tmp;
  LapRecord done = awkward_lap();
  LapRecord dnf;
  dnf.lap_index = 3;
  dnf.dnf = true;
  std::string path = write_lap_table_csv({done, dnf}, tmp.at("laps.csv"));
  std::string text = whole_file(path);
  CHECK(first_line(path) == "lap_index,lap_time_ms,wall_contact_ticks,dnf");
  CHECK(text.find("2,1440.3333333333333,1,0\n") != std::string::npos);
  CHECK(text.find("3,0,0,1\n") != std::string::npos);
}

TEST_CASE("robustness csv puts transfers in the magnitude column") {
  TempDir tmp;
  RobustnessRow noise{{"noise", 0.05, ""}, 21000.0, 1234.5, 7, false};
  RobustnessRow transfer{{"car", 0.0, "fast"}, 0.0, 0.0, 0, true};
  std::string path =
      write_robustness_csv({noise, transfer}, tmp.at("rob.csv"));
  std::string text = whole_file(path);
  CHECK(first_line(path) ==
        "perturbation_kind,magnitude,lap_time_ms,delta_ms,wall_contacts,dnf");
  CHECK(text.find("noise,0.050000000000000003,21000,1234.5,7,0\n") !=
        std::string::npos);
  CHECK(text.find("car,fast,0,0,0,1\n") != std::string::npos);
}

TEST_CASE("the lap curve reader keeps only evaluated, finished epochs") {
  TempDir tmp;
  std::ofstream(tmp.at("metrics.csv"))
      << "epoch,wall_clock_s,buffer_size,q1_loss,q2_loss,value_loss,"
         "policy_loss,eval_lap_ms,wall_contact_fraction\n"
      << "1,3.7,1600,1942.7,1932.0,1.79,-7.86,,0.15\n"       // not evaluated
      << "2,7.3,3200,1720.1,1709.4,2.37,-17.2,23456.75,0.8\n"
      << "3,11.0,4800,1500.0,1490.0,2.0,-20.0,dnf,0.5\n"     // dnf skipped
      << "4,15.0,6400,1400.0,1390.0,1.9,-22.0,21000.25,0.3\n";
  std::vector<LapPoint> pts = read_metrics_lap_curve(tmp.at("metrics.csv"));
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].epoch == 2);
  CHECK(pts[0].lap_ms == 23456.75);
  CHECK(pts[1].epoch == 4);
  CHECK(pts[1].lap_ms == 21000.25);

  CHECK_THROWS_WITH_AS(read_metrics_lap_curve(tmp.at("nope.csv")),
                       Contains("cannot open"), ConfigError);
}

TEST_CASE("svg writers emit well-formed documents") {
  TempDir tmp;

  std::vector<LapPoint> curve = {{2, 23000.0}, {4, 21000.0}, {6, 19500.0}};
  std::string curve_svg = whole_file(write_lap_curve_svg(curve, tmp.at("c.svg")));
  CHECK(curve_svg.rfind("<svg", 0) == 0);
  CHECK(curve_svg.find("</svg>") != std::string::npos);
  CHECK(curve_svg.find("polyline") != std::string::npos);
  CHECK(curve_svg.find("epoch 2") != std::string::npos);
  CHECK(curve_svg.find("epoch 6") != std::string::npos);

  std::string empty_svg =
      whole_file(write_lap_curve_svg({}, tmp.at("e.svg")));
  CHECK(empty_svg.find("no evaluation points") != std::string::npos);

  TrackDefinition t = load_track(APEX_SOURCE_DIR "/tracks/circle_r50.track");
  std::string traj_svg = whole_file(
      write_trajectory_svg(&t, awkward_lap(), tmp.at("t.svg")));
  CHECK(traj_svg.rfind("<svg", 0) == 0);
  CHECK(traj_svg.find("</svg>") != std::string::npos);
  CHECK(traj_svg.find("lap trajectory") != std::string::npos);

  // track pointer is optional
  std::string bare_svg = whole_file(
      write_trajectory_svg(nullptr, awkward_lap(), tmp.at("b.svg")));
  CHECK(bare_svg.find("</svg>") != std::string::npos);

  RobustnessRow row{{"noise", 0.05, ""}, 21000.0, 500.0, 3, false};
  RobustnessRow dnf{{"delay_ms", 150.0, ""}, 0.0, 0.0, 0, true};
  std::string rob_svg =
      whole_file(write_robustness_svg({row, dnf}, tmp.at("r.svg")));
  CHECK(rob_svg.find("noise") != std::string::npos);
  CHECK(rob_svg.find("delay_ms") != std::string::npos);
  CHECK(rob_svg.find("</svg>") != std::string::npos);
}

TEST_CASE("export_results writes the full artifact set") {
  TempDir tmp;

  CHECK_THROWS_WITH_AS(export_results({}, {}, {}, nullptr, tmp.at("out")),
                       Contains("nothing to export"), ConfigError);

  TrackDefinition t = load_track(APEX_SOURCE_DIR "/tracks/circle_r50.track");
  LapRecord lap = awkward_lap();
  RobustnessRow row{{"noise", 0.02, ""}, 21000.0, 100.0, 1, false};
  std::vector<LapPoint> curve = {{2, 23000.0}, {4, 22000.0}};

  std::vector<std::string> files =
      export_results({lap, lap}, {row}, curve, &t, tmp.at("out"));
  // laps.csv + 2 trajectories + trajectory.svg + robustness csv/svg + curve
  CHECK(files.size() == 7);
  for (const auto& f : files) {
    CHECK(fs::exists(f));
    CHECK(fs::file_size(f) > 0);
  }

  // a laps-only export still works and emits no robustness artifacts
  std::vector<std::string> only =
      export_results({lap}, {}, {}, nullptr, tmp.at("out2"));
  CHECK(only.size() == 3);
}

TEST_CASE("writers refuse unwritable destinations") {
  CHECK_THROWS_WITH_AS(
      write_lap_table_csv({}, "/nonexistent_dir/laps.csv"),
      Contains("cannot write"), ConfigError);
}
