#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "apex/config.hpp"
#include "apex/error.hpp"

using namespace apex;
using doctest::Contains;

namespace {

const std::string kTracksDir = APEX_SOURCE_DIR "/tracks";

// Minimal valid body; tests splice extra lines into it.
std::string base_text() {
  return "[run]\n"
         "track = circle_r50.track\n";
}

RunConfig parse(const std::string& text) {
  return parse_config(text, "test.cfg", kTracksDir);
}

}  // namespace

TEST_CASE("defaults survive a minimal config and the track path resolves") {
  RunConfig c = parse(base_text());
  CHECK(c.seed == 1);
  CHECK(c.epochs == 300);
  CHECK(c.workers == 4);
  CHECK(!c.synchronous);
  CHECK(c.car_id == "slow");
  CHECK(c.track_path == kTracksDir + "/circle_r50.track");
  CHECK(c.episode.duration == 100.0);
  CHECK(c.episode.command_hz == 10);
  CHECK(c.episode.physics_hz == 60);
  CHECK(c.episode.num_cars == 20);
  CHECK(c.episode.initial_speed == doctest::Approx(100.0 / 3.6));
  CHECK(c.sac.gamma == 0.98);
  CHECK(c.sac.batch_size == 4096);
  CHECK(c.sac.updates_per_epoch == 5120);
  CHECK(c.sac.buffer_capacity == 4000000);
  CHECK(c.sac.reward_scale == 100.0);
  CHECK(c.sac.nstep == 5);
  CHECK(c.sac.tau == 0.005);
  CHECK(c.sac.lr == 3e-4);
  CHECK(c.reward.gamma == c.sac.gamma);        // kept in sync by the parser
  CHECK(c.sac.obs_dim == c.observation.dim());  // likewise
  CHECK(c.sac.obs_dim == 32);
}

TEST_CASE("every section parses and initial speed accepts km/h or m/s") {
  std::string text =
      "[run]\n"
      "seed = 42\n"
      "epochs = 7\n"
      "workers = 2\n"
      "synchronous = true\n"
      "track = circle_r50.track\n"
      "car = fast\n"
      "out_dir = somewhere\n"
      "[episode]\n"
      "duration_s = 40\n"
      "command_hz = 20\n"
      "cars_per_worker = 4\n"
      "initial_speed_kmh = 36\n"
      "rate_limited = true\n"
      "[observation]\n"
      "rangefinders = 9\n"
      "curvatures = 5\n"
      "max_range_m = 80\n"
      "lookahead_start_s = 0.5\n"
      "lookahead_end_s = 2.0\n"
      "[reward]\n"
      "wall_penalty_scale = 0.001\n"
      "[sac]\n"
      "gamma = 0.95\n"
      "batch_size = 64\n"
      "updates_per_epoch = 32\n"
      "reward_scale = 50\n"
      "nstep = 3\n"
      "tau = 0.01\n"
      "learning_rate = 0.001\n"
      "buffer_capacity = 10000\n"
      "bootstrap = q\n"
      "[eval]\n"
      "period_epochs = 5\n"
      "fairness = false\n"
      "timeout_s = 120\n";
  RunConfig c = parse(text);
  CHECK(c.seed == 42);
  CHECK(c.synchronous);
  CHECK(c.car_id == "fast");
  CHECK(c.episode.initial_speed == doctest::Approx(10.0));  // 36 km/h
  CHECK(c.episode.command_hz == 20);
  CHECK(c.observation.num_rangefinders == 9);
  CHECK(c.observation.dim() == 9 + 5 + 9);  // v, a, heading, steer, contact
  CHECK(c.sac.obs_dim == c.observation.dim());
  CHECK(c.sac.bootstrap == SacConfig::Bootstrap::kTargetQ);
  CHECK(c.reward.wall_penalty_scale == 0.001);
  CHECK(c.reward.gamma == 0.95);
  CHECK(!c.eval_fairness);
  CHECK(c.eval_timeout == 120.0);

  // m/s spelling lands unconverted
  RunConfig m = parse(base_text() + "[episode]\ninitial_speed_mps = 12.5\n");
  CHECK(m.episode.initial_speed == 12.5);
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
  std::string text =
      "# leading comment\n"
      "\n"
      "  [run]  \n"
      "  track   =   circle_r50.track   # trailing comment\n"
      "\n"
      "  epochs=5\n";
  RunConfig c = parse(text);
  CHECK(c.epochs == 5);
  CHECK(c.track_path == kTracksDir + "/circle_r50.track");
}

TEST_CASE("the resolved snapshot reparses to the identical configuration") {
  std::string text = base_text() +
                     "seed = 987654321\n"
                     "car = fast\n"
                     "[episode]\n"
                     "duration_s = 39.5\n"
                     "initial_speed_kmh = 53\n"
                     "[sac]\n"
                     "gamma = 0.971\n"
                     "learning_rate = 0.00037\n"
                     "bootstrap = q\n"
                     "[reward]\n"
                     "wall_penalty_scale = 0.00051\n";
  RunConfig a = parse(text);
  std::string snapshot = resolved_config_text(a);

  // the snapshot stores speed in m/s so reparsing cannot re-convert
  CHECK(snapshot.find("initial_speed_mps = ") != std::string::npos);
  CHECK(snapshot.find("initial_speed_kmh") == std::string::npos);

  RunConfig b = parse_config(snapshot, "snapshot", ".");
  CHECK(b.seed == a.seed);
  CHECK(b.epochs == a.epochs);
  CHECK(b.workers == a.workers);
  CHECK(b.synchronous == a.synchronous);
  CHECK(b.track_path == a.track_path);
  CHECK(b.car_id == a.car_id);
  CHECK(b.out_dir == a.out_dir);
  CHECK(b.episode.duration == a.episode.duration);
  CHECK(b.episode.command_hz == a.episode.command_hz);
  CHECK(b.episode.num_cars == a.episode.num_cars);
  CHECK(b.episode.initial_speed == a.episode.initial_speed);  // bit-exact
  CHECK(b.episode.rate_limited == a.episode.rate_limited);
  CHECK(b.observation.num_rangefinders == a.observation.num_rangefinders);
  CHECK(b.observation.num_curvatures == a.observation.num_curvatures);
  CHECK(b.observation.max_range == a.observation.max_range);
  CHECK(b.observation.lookahead_start == a.observation.lookahead_start);
  CHECK(b.observation.lookahead_end == a.observation.lookahead_end);
  CHECK(b.reward.wall_penalty_scale == a.reward.wall_penalty_scale);
  CHECK(b.reward.gamma == a.reward.gamma);
  CHECK(b.sac.gamma == a.sac.gamma);
  CHECK(b.sac.batch_size == a.sac.batch_size);
  CHECK(b.sac.updates_per_epoch == a.sac.updates_per_epoch);
  CHECK(b.sac.reward_scale == a.sac.reward_scale);
  CHECK(b.sac.nstep == a.sac.nstep);
  CHECK(b.sac.tau == a.sac.tau);
  CHECK(b.sac.lr == a.sac.lr);  // 0.00037 round-trips at 17 digits
  CHECK(b.sac.buffer_capacity == a.sac.buffer_capacity);
  CHECK(b.sac.bootstrap == a.sac.bootstrap);
  CHECK(b.eval_period_epochs == a.eval_period_epochs);
  CHECK(b.eval_fairness == a.eval_fairness);
  CHECK(b.eval_timeout == a.eval_timeout);

  // and the snapshot of the reparse is textually identical
  CHECK(resolved_config_text(b) == snapshot);
}

TEST_CASE("syntax errors carry origin and line number") {
  auto msg = [](const std::string& text) -> doctest::String {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };

  CHECK_THROWS_WITH_AS(parse("[run]\nbogus = 1\ntrack = circle_r50.track\n"),
                       Contains("test.cfg:2"), ConfigError);
  CHECK(msg("[run]\nbogus = 1\n") == Contains("unknown key 'bogus'"));
  CHECK(msg("[nope]\nx = 1\n") == Contains("unknown section [nope]"));
  CHECK(msg("track = t\n") == Contains("key before any [section]"));
  CHECK(msg("[run]\nepochs 5\n") == Contains("expected 'key = value'"));
  CHECK(msg("[run]\nepochs =\n") == Contains("empty value"));
  CHECK(msg("[run\ntrack = t\n") == Contains("malformed section header"));
  CHECK(msg("[run]\nepochs = five\n") == Contains("malformed number"));
  CHECK(msg("[run]\nepochs = 2.5\n") == Contains("expected an integer"));
  CHECK(msg("[run]\nsynchronous = maybe\n") == Contains("expected true/false"));
  CHECK(msg("[sac]\nbootstrap = mc\n") == Contains("bootstrap must be"));
  CHECK(msg("[run]\nepochs = 1\nepochs = 2\n") ==
        Contains("duplicate key 'epochs'"));
  CHECK(msg("[episode]\ninitial_speed_kmh = 36\ninitial_speed_mps = 10\n") ==
        Contains("initial speed given twice"));
}

TEST_CASE("validation rejects out-of-range hyperparameters") {
  CHECK_THROWS_WITH_AS(parse(base_text() + "[sac]\ngamma = 1.5\n"),
                       Contains("gamma must be in (0, 1)"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base_text() + "[sac]\ntau = 0\n"),
                       Contains("tau"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base_text() + "[episode]\ncommand_hz = 7\n"),
                       Contains("command_hz must divide 60"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base_text() + "[episode]\nduration_s = -1\n"),
                       Contains("duration"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base_text() + "[episode]\ncars_per_worker = 0\n"),
                       Contains("cars_per_worker"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base_text() + "[run]\ncar = medium\n"),
                       Contains("car must be 'slow' or 'fast'"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(base_text() + "[sac]\nbuffer_capacity = 10\nbatch_size = 256\n"),
      Contains("buffer_capacity"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base_text() + "[observation]\nrangefinders = 1\n"),
                       Contains("rangefinders"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(base_text() +
            "[observation]\nlookahead_start_s = 3\nlookahead_end_s = 2\n"),
      Contains("lookahead window"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(base_text() + "[reward]\nwall_penalty_scale = -1\n"),
                       Contains("wall_penalty_scale"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("[run]\nepochs = 3\n"),
                       Contains("track path is required"), ConfigError);
}

TEST_CASE("a missing track file names the resolved path") {
  std::string want = "track not found: " + kTracksDir + "/no_such.track";
  CHECK_THROWS_WITH_AS(parse("[run]\ntrack = no_such.track\n"),
                       Contains(want.c_str()), ConfigError);
}

TEST_CASE("car archetype lookup") {
  RunConfig slow = parse(base_text());
  CHECK(slow.car().max_engine_force == CarConfig::slow().max_engine_force);
  RunConfig fast = parse(base_text() + "car = fast\n");
  CHECK(fast.car().max_engine_force == CarConfig::fast().max_engine_force);
  CHECK(fast.car().max_engine_force > slow.car().max_engine_force);
}

TEST_CASE("the shipped desk configuration loads") {
  RunConfig c = load_config(APEX_SOURCE_DIR "/configs/desk_oval.cfg");
  CHECK(c.workers == 1);
  CHECK(c.episode.num_cars == 4);
  CHECK(c.sac.batch_size == 256);
  CHECK(c.sac.updates_per_epoch == 128);
  CHECK(c.epochs == 300);
  CHECK(c.sac.buffer_capacity == 100000);
  CHECK(c.episode.initial_speed == doctest::Approx(5.0));  // 18 km/h
  CHECK(c.reward.wall_penalty_scale == 5e-4);
  CHECK(c.track_path.find("oval_200.track") != std::string::npos);

  CHECK_THROWS_WITH_AS(load_config("/nonexistent/x.cfg"),
                       Contains("cannot open config"), ConfigError);
}
