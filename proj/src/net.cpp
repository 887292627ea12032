#include "apex/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>

#include "apex/error.hpp"

namespace apex {

namespace {

void write_all(int fd, const std::vector<uint8_t>& bytes) {
  size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = ::send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      throw ProtocolError("socket write failed");
    }
    off += static_cast<size_t>(n);
  }
}

void read_exact(int fd, uint8_t* out, size_t n) {
  size_t off = 0;
  while (off < n) {
    ssize_t r = ::recv(fd, out + off, n - off, 0);
    if (r == 0) throw ProtocolError("connection closed");
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("socket read failed");
    }
    off += static_cast<size_t>(r);
  }
}

constexpr uint32_t kMaxFrameBytes = 1u << 26;

std::vector<uint8_t> read_frame_fd(int fd) {
  uint8_t head[4];
  read_exact(fd, head, 4);
  uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= uint32_t(head[i]) << (8 * i);
  if (len == 0 || len > kMaxFrameBytes) {
    throw ProtocolError("bad frame length");
  }
  std::vector<uint8_t> payload(len);
  read_exact(fd, payload.data(), len);
  return payload;
}

void enable_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

CarStateWire to_wire(const CarState& s, double progress) {
  CarStateWire w;
  w.position = s.position;
  w.heading = s.heading;
  w.v[0] = s.vx;
  w.v[1] = s.vy;
  w.v[2] = 0.0;
  w.accel[0] = s.ax;
  w.accel[1] = s.ay;
  w.accel[2] = 0.0;
  w.yaw_rate = s.yaw_rate;
  w.last_steering = s.last_steering;
  w.wall_contact = s.wall_contact ? 1 : 0;
  w.progress = progress;
  return w;
}

// Bridges the episode engine to the socket: every act() sends the live
// cars' states and blocks until the client answers with a COMMAND frame.
class RemoteController : public Controller {
 public:
  RemoteController(int fd, int ticks_per_command)
      : fd_(fd), ticks_per_command_(ticks_per_command) {}

  void act(const std::vector<ControlView>& views,
           std::vector<Action>& actions) override {
    StateFrame state;
    state.tick = static_cast<uint64_t>(boundary_) * ticks_per_command_;
    state.cars.reserve(views.size());
    for (const auto& v : views) {
      state.cars.push_back(to_wire(*v.state, v.projection->progress));
    }
    write_all(fd_, encode_state(state));

    CommandFrame cmd = decode_command(read_frame_fd(fd_));
    if (cmd.tick != state.tick) {
      throw ProtocolError("command answers tick " + std::to_string(cmd.tick) +
                          ", expected " + std::to_string(state.tick));
    }
    if (!cmd.commands.empty() && cmd.commands.size() != views.size()) {
      throw ProtocolError("command count does not match live car count");
    }
    actions.resize(views.size());
    for (size_t i = 0; i < views.size(); ++i) {
      if (!cmd.commands.empty()) latched_[views[i].car] = cmd.commands[i];
      actions[i] = latched_[views[i].car];  // default-constructed = zeros
    }
    ++boundary_;
  }

  int boundaries() const { return boundary_; }

 private:
  int fd_;
  int ticks_per_command_;
  int boundary_ = 0;
  std::map<int, Action> latched_;
};

void run_remote_episode(int fd, const ResetFrame& reset,
                        const TrackDefinition& track, const CarConfig& car,
                        const ServeOptions& opts) {
  EpisodeConfig episode;
  episode.duration = reset.duration;
  episode.command_hz = static_cast<int>(reset.command_hz);
  episode.physics_hz = 60;
  episode.num_cars = static_cast<int>(reset.num_cars);
  episode.initial_speed = reset.initial_speed;
  episode.rate_limited = reset.rate_limited != 0;
  if (reset.num_cars > 4096) throw ProtocolError("reset: too many cars");

  const int ticks_per_command = episode.command_hz > 0
                                    ? episode.physics_hz / episode.command_hz
                                    : 0;
  RemoteController controller(fd, ticks_per_command);

  // The observer tracks each live car's latest post-step sample so the
  // final state (after the last physics interval) can be reported.
  std::map<int, StepSample> last_sample;
  int last_step = -1;
  auto observer = [&](const StepSample& s) {
    last_sample[s.car] = s;
    last_step = std::max(last_step, s.step);
    return true;
  };

  try {
    run_episode(track, car, episode, controller, /*episode_id_base=*/0,
                opts.observation, opts.reward, observer);
  } catch (const ConfigError& e) {
    throw ProtocolError(std::string("reset rejected: ") + e.what());
  }

  StateFrame final_state;
  final_state.tick = static_cast<uint64_t>(last_step + 1) * ticks_per_command;
  for (const auto& [car_idx, sample] : last_sample) {
    if (sample.step == last_step) {
      final_state.cars.push_back(to_wire(sample.state, sample.progress));
    }
  }
  write_all(fd, encode_state(final_state));
  write_all(fd, encode_bye());
}

void run_session(int fd, const TrackDefinition& track, const CarConfig& car,
                 const ServeOptions& opts) {
  HelloFrame hello;
  hello.version = kProtocolVersion;
  hello.track_hash = track.content_hash;
  hello.car_count = static_cast<uint32_t>(opts.default_cars);
  write_all(fd, encode_hello(hello));

  while (true) {
    std::vector<uint8_t> payload;
    try {
      payload = read_frame_fd(fd);
    } catch (const ProtocolError&) {
      return;  // peer went away between episodes; nothing to report
    }
    switch (frame_type(payload)) {
      case FrameType::kBye:
        return;
      case FrameType::kReset:
        run_remote_episode(fd, decode_reset(payload), track, car, opts);
        break;
      default:
        throw ProtocolError("expected RESET or BYE between episodes");
    }
  }
}

}  // namespace

void serve_remote(const TrackDefinition& track, const CarConfig& car,
                  const ServeOptions& opts) {
  int listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd < 0) throw ProtocolError("cannot create listen socket");
  int one = 1;
  ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(opts.port);
  if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(listen_fd, 4) < 0) {
    ::close(listen_fd);
    throw ProtocolError("cannot bind/listen on port " +
                        std::to_string(opts.port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (opts.on_listening) opts.on_listening(ntohs(addr.sin_port));

  int sessions = 0;
  while (opts.max_sessions == 0 || sessions < opts.max_sessions) {
    int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    enable_nodelay(fd);
    try {
      run_session(fd, track, car, opts);
    } catch (const std::exception& e) {
      try {
        write_all(fd, encode_error({e.what()}));
      } catch (const ProtocolError&) {
        // peer already gone; the error frame is best-effort
      }
    }
    ::close(fd);
    ++sessions;
  }
  ::close(listen_fd);
}

SimClient::SimClient(const std::string& host, uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ProtocolError("cannot create socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw ProtocolError("bad host address: " + host);
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(fd_);
    throw ProtocolError("cannot connect to " + host + ":" +
                        std::to_string(port));
  }
  enable_nodelay(fd_);
  hello_ = decode_hello(read_frame());
}

SimClient::~SimClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<uint8_t> SimClient::read_frame() { return read_frame_fd(fd_); }

void SimClient::write_frame(const std::vector<uint8_t>& bytes) {
  write_all(fd_, bytes);
}

void SimClient::read_bye() {
  auto payload = read_frame();
  if (frame_type(payload) == FrameType::kError) {
    throw ProtocolError("server: " + decode_error(payload).message);
  }
  if (frame_type(payload) != FrameType::kBye) {
    throw ProtocolError("expected BYE at episode end");
  }
  episode_open_ = false;
}

StateFrame SimClient::reset(const ResetFrame& config) {
  write_frame(encode_reset(config));
  auto payload = read_frame();
  if (frame_type(payload) == FrameType::kError) {
    throw ProtocolError("server: " + decode_error(payload).message);
  }
  StateFrame s = decode_state(payload);
  last_tick_ = s.tick;
  episode_open_ = true;
  steps_total_ = static_cast<int>(std::llround(config.duration *
                                               config.command_hz));
  steps_sent_ = 0;
  // A zero-step episode (or one with no live cars) ends immediately.
  if (steps_total_ == 0 || s.cars.empty()) read_bye();
  return s;
}

std::optional<StateFrame> SimClient::step(const std::vector<Action>& commands) {
  if (!episode_open_) return std::nullopt;
  CommandFrame cmd;
  cmd.tick = last_tick_;
  cmd.commands = commands;
  write_frame(encode_command(cmd));
  ++steps_sent_;
  auto payload = read_frame();
  if (frame_type(payload) == FrameType::kError) {
    throw ProtocolError("server: " + decode_error(payload).message);
  }
  StateFrame s = decode_state(payload);
  last_tick_ = s.tick;
  // The state answering the last command — or one in which every car has
  // faulted out — is final; the server follows it with BYE.
  if (steps_sent_ == steps_total_ || s.cars.empty()) read_bye();
  return s;
}

void SimClient::bye() {
  if (fd_ >= 0) {
    write_frame(encode_bye());
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace apex
