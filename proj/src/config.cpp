#include "apex/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "apex/error.hpp"

namespace apex {

CarConfig RunConfig::car() const {
  if (car_id == "slow") return CarConfig::slow();
  if (car_id == "fast") return CarConfig::fast();
  throw ConfigError("unknown car archetype: " + car_id);
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Parser {
  std::string origin;
  std::string base_dir;
  RunConfig cfg;
  std::set<std::string> seen;

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }

  double number(int line, const std::string& key,
                const std::string& value) const {
    const char* s = value.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !std::isfinite(v)) {
      fail(line, "malformed number for '" + key + "': " + value);
    }
    return v;
  }

  int integer(int line, const std::string& key,
              const std::string& value) const {
    double v = number(line, key, value);
    if (v != std::floor(v) || std::abs(v) > 2e9) {
      fail(line, "expected an integer for '" + key + "': " + value);
    }
    return static_cast<int>(v);
  }

  uint64_t unsigned64(int line, const std::string& key,
                      const std::string& value) const {
    const char* s = value.c_str();
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') {
      fail(line, "expected an unsigned integer for '" + key + "': " + value);
    }
    return v;
  }

  bool boolean(int line, const std::string& key,
               const std::string& value) const {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail(line, "expected true/false for '" + key + "': " + value);
  }

  void apply(int line, const std::string& section, const std::string& key,
             const std::string& value) {
    if (!seen.insert(section + "/" + key).second) {
      fail(line, "duplicate key '" + key + "' in section [" + section + "]");
    }
    if (section == "run") {
      if (key == "seed") cfg.seed = unsigned64(line, key, value);
      else if (key == "epochs") cfg.epochs = integer(line, key, value);
      else if (key == "workers") cfg.workers = integer(line, key, value);
      else if (key == "synchronous") cfg.synchronous = boolean(line, key, value);
      else if (key == "track") cfg.track_path = value;
      else if (key == "car") cfg.car_id = value;
      else if (key == "out_dir") cfg.out_dir = value;
      else fail(line, "unknown key '" + key + "' in section [run]");
    } else if (section == "episode") {
      if (key == "duration_s") cfg.episode.duration = number(line, key, value);
      else if (key == "command_hz") cfg.episode.command_hz = integer(line, key, value);
      else if (key == "cars_per_worker") cfg.episode.num_cars = integer(line, key, value);
      else if (key == "initial_speed_kmh" || key == "initial_speed_mps") {
        if (!seen.insert("episode/initial_speed").second) {
          fail(line, "initial speed given twice");
        }
        double v = number(line, key, value);
        cfg.episode.initial_speed = key == "initial_speed_kmh" ? v / 3.6 : v;
      } else if (key == "rate_limited") cfg.episode.rate_limited = boolean(line, key, value);
      else fail(line, "unknown key '" + key + "' in section [episode]");
    } else if (section == "observation") {
      if (key == "rangefinders") cfg.observation.num_rangefinders = integer(line, key, value);
      else if (key == "curvatures") cfg.observation.num_curvatures = integer(line, key, value);
      else if (key == "max_range_m") cfg.observation.max_range = number(line, key, value);
      else if (key == "lookahead_start_s") cfg.observation.lookahead_start = number(line, key, value);
      else if (key == "lookahead_end_s") cfg.observation.lookahead_end = number(line, key, value);
      else fail(line, "unknown key '" + key + "' in section [observation]");
    } else if (section == "reward") {
      if (key == "wall_penalty_scale") cfg.reward.wall_penalty_scale = number(line, key, value);
      else fail(line, "unknown key '" + key + "' in section [reward]");
    } else if (section == "sac") {
      if (key == "gamma") cfg.sac.gamma = number(line, key, value);
      else if (key == "batch_size") cfg.sac.batch_size = integer(line, key, value);
      else if (key == "updates_per_epoch") cfg.sac.updates_per_epoch = integer(line, key, value);
      else if (key == "reward_scale") cfg.sac.reward_scale = number(line, key, value);
      else if (key == "nstep") cfg.sac.nstep = integer(line, key, value);
      else if (key == "tau") cfg.sac.tau = number(line, key, value);
      else if (key == "learning_rate") cfg.sac.lr = number(line, key, value);
      else if (key == "buffer_capacity")
        cfg.sac.buffer_capacity = static_cast<size_t>(unsigned64(line, key, value));
      else if (key == "bootstrap") {
        if (value == "value") cfg.sac.bootstrap = SacConfig::Bootstrap::kTargetValue;
        else if (value == "q") cfg.sac.bootstrap = SacConfig::Bootstrap::kTargetQ;
        else fail(line, "bootstrap must be 'value' or 'q': " + value);
      } else fail(line, "unknown key '" + key + "' in section [sac]");
    } else if (section == "eval") {
      if (key == "period_epochs") cfg.eval_period_epochs = integer(line, key, value);
      else if (key == "fairness") cfg.eval_fairness = boolean(line, key, value);
      else if (key == "timeout_s") cfg.eval_timeout = number(line, key, value);
      else fail(line, "unknown key '" + key + "' in section [eval]");
    } else {
      fail(line, "unknown section [" + section + "]");
    }
  }
};

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin,
                       const std::string& base_dir) {
  Parser p;
  p.origin = origin;
  p.base_dir = base_dir;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') p.fail(line_no, "malformed section header: " + raw);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) p.fail(line_no, "empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) p.fail(line_no, "expected 'key = value': " + raw);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) p.fail(line_no, "empty key");
    if (value.empty()) p.fail(line_no, "empty value for '" + key + "'");
    if (section.empty()) p.fail(line_no, "key before any [section]: " + key);
    p.apply(line_no, section, key, value);
  }

  RunConfig& cfg = p.cfg;
  if (!cfg.track_path.empty()) {
    std::filesystem::path t(cfg.track_path);
    if (t.is_relative()) {
      cfg.track_path = (std::filesystem::path(base_dir) / t).lexically_normal()
                           .string();
    }
  }
  cfg.reward.gamma = cfg.sac.gamma;
  cfg.sac.obs_dim = cfg.observation.dim();
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string base = std::filesystem::path(path).parent_path().string();
  if (base.empty()) base = ".";
  return parse_config(buf.str(), path, base);
}

void validate_config(const RunConfig& c) {
  check(c.epochs >= 1, "epochs must be >= 1");
  check(c.workers >= 1, "workers must be >= 1");
  check(c.car_id == "slow" || c.car_id == "fast",
        "car must be 'slow' or 'fast', got '" + c.car_id + "'");
  check(!c.track_path.empty(), "track path is required");
  if (!std::filesystem::exists(c.track_path)) {
    throw ConfigError("track not found: " + c.track_path);
  }
  check(c.episode.duration > 0.0, "episode duration must be positive");
  check(c.episode.physics_hz == 60, "physics rate is fixed at 60 Hz");
  check(c.episode.command_hz >= 1 && 60 % c.episode.command_hz == 0,
        "command_hz must divide 60");
  check(c.episode.num_cars >= 1, "cars_per_worker must be >= 1");
  check(c.episode.initial_speed >= 0.0 &&
            std::isfinite(c.episode.initial_speed),
        "initial speed must be finite and non-negative");
  check(c.observation.num_rangefinders >= 2, "rangefinders must be >= 2");
  check(c.observation.num_curvatures >= 1, "curvatures must be >= 1");
  check(c.observation.max_range > 0.0, "max_range_m must be positive");
  check(c.observation.lookahead_start >= 0.0 &&
            c.observation.lookahead_end >= c.observation.lookahead_start,
        "lookahead window must satisfy 0 <= start <= end");
  check(c.reward.wall_penalty_scale >= 0.0,
        "wall_penalty_scale must be non-negative");
  check(c.sac.gamma > 0.0 && c.sac.gamma < 1.0, "gamma must be in (0, 1)");
  check(c.sac.batch_size >= 1, "batch_size must be >= 1");
  check(c.sac.updates_per_epoch >= 0, "updates_per_epoch must be >= 0");
  check(c.sac.reward_scale > 0.0, "reward_scale must be positive");
  check(c.sac.nstep >= 1, "nstep must be >= 1");
  check(c.sac.tau > 0.0 && c.sac.tau < 1.0, "tau must be in (0, 1)");
  check(c.sac.lr > 0.0, "learning_rate must be positive");
  check(c.sac.buffer_capacity >=
            static_cast<size_t>(c.sac.batch_size + c.sac.nstep),
        "buffer_capacity must hold at least one batch of windows");
  check(c.sac.obs_dim == c.observation.dim(),
        "internal: sac.obs_dim out of sync with the observation layout");
  check(c.eval_period_epochs >= 1, "eval period_epochs must be >= 1");
  check(c.eval_timeout > 0.0, "eval timeout_s must be positive");
}

std::string resolved_config_text(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "[run]\n";
  out << "seed = " << c.seed << "\n";
  out << "epochs = " << c.epochs << "\n";
  out << "workers = " << c.workers << "\n";
  out << "synchronous = " << b(c.synchronous) << "\n";
  out << "track = " << c.track_path << "\n";
  out << "car = " << c.car_id << "\n";
  out << "out_dir = " << c.out_dir << "\n";
  out << "\n[episode]\n";
  out << "duration_s = " << c.episode.duration << "\n";
  out << "command_hz = " << c.episode.command_hz << "\n";
  out << "cars_per_worker = " << c.episode.num_cars << "\n";
  out << "initial_speed_mps = " << c.episode.initial_speed << "\n";
  out << "rate_limited = " << b(c.episode.rate_limited) << "\n";
  out << "\n[observation]\n";
  out << "rangefinders = " << c.observation.num_rangefinders << "\n";
  out << "curvatures = " << c.observation.num_curvatures << "\n";
  out << "max_range_m = " << c.observation.max_range << "\n";
  out << "lookahead_start_s = " << c.observation.lookahead_start << "\n";
  out << "lookahead_end_s = " << c.observation.lookahead_end << "\n";
  out << "\n[reward]\n";
  out << "wall_penalty_scale = " << c.reward.wall_penalty_scale << "\n";
  out << "\n[sac]\n";
  out << "gamma = " << c.sac.gamma << "\n";
  out << "batch_size = " << c.sac.batch_size << "\n";
  out << "updates_per_epoch = " << c.sac.updates_per_epoch << "\n";
  out << "reward_scale = " << c.sac.reward_scale << "\n";
  out << "nstep = " << c.sac.nstep << "\n";
  out << "tau = " << c.sac.tau << "\n";
  out << "learning_rate = " << c.sac.lr << "\n";
  out << "buffer_capacity = " << c.sac.buffer_capacity << "\n";
  out << "bootstrap = "
      << (c.sac.bootstrap == SacConfig::Bootstrap::kTargetValue ? "value"
                                                                : "q")
      << "\n";
  out << "\n[eval]\n";
  out << "period_epochs = " << c.eval_period_epochs << "\n";
  out << "fairness = " << b(c.eval_fairness) << "\n";
  out << "timeout_s = " << c.eval_timeout << "\n";
  return out.str();
}

}  // namespace apex
