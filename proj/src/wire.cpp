#include "apex/wire.hpp"

#include <bit>
#include <cstring>

#include "apex/error.hpp"

namespace apex {

namespace {

class Writer {
 public:
  explicit Writer(FrameType type) {
    buf_.resize(4);  // length prefix patched in finish()
    u8(static_cast<uint8_t>(type));
  }

  void u8(uint8_t v) { buf_.push_back(v); }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }

  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }

  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

  void bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }

  std::vector<uint8_t> finish() {
    uint32_t len = static_cast<uint32_t>(buf_.size() - 4);
    for (int i = 0; i < 4; ++i) buf_[i] = uint8_t(len >> (8 * i));
    return std::move(buf_);
  }

 private:
  std::vector<uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<uint8_t>& payload) : p_(payload) {}

  uint8_t u8() {
    need(1);
    return p_[pos_++];
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(p_[pos_++]) << (8 * i);
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p_[pos_++]) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  size_t remaining() const { return p_.size() - pos_; }

  void expect_type(FrameType t) {
    uint8_t got = u8();
    if (got != static_cast<uint8_t>(t)) {
      throw ProtocolError("unexpected frame type " + std::to_string(got));
    }
  }

  void done() const {
    if (pos_ != p_.size()) throw ProtocolError("trailing bytes in frame");
  }

 private:
  void need(size_t n) const {
    if (p_.size() - pos_ < n) throw ProtocolError("truncated frame");
  }

  const std::vector<uint8_t>& p_;
  size_t pos_ = 0;
};

constexpr uint32_t kMaxCars = 4096;

}  // namespace

std::vector<uint8_t> encode_hello(const HelloFrame& f) {
  Writer w(FrameType::kHello);
  w.u32(f.version);
  w.u64(f.track_hash);
  w.u32(f.car_count);
  return w.finish();
}

std::vector<uint8_t> encode_state(const StateFrame& f) {
  Writer w(FrameType::kState);
  w.u64(f.tick);
  w.u32(static_cast<uint32_t>(f.cars.size()));
  for (const auto& c : f.cars) {
    w.f64(c.position.x);
    w.f64(c.position.y);
    w.f64(c.heading);
    for (double v : c.v) w.f64(v);
    for (double a : c.accel) w.f64(a);
    w.f64(c.yaw_rate);
    w.f64(c.last_steering);
    w.u8(c.wall_contact);
    w.f64(c.progress);
  }
  return w.finish();
}

std::vector<uint8_t> encode_command(const CommandFrame& f) {
  Writer w(FrameType::kCommand);
  w.u64(f.tick);
  w.u32(static_cast<uint32_t>(f.commands.size()));
  for (const auto& a : f.commands) {
    w.f64(a.steer);
    w.f64(a.throttle);
  }
  return w.finish();
}

std::vector<uint8_t> encode_reset(const ResetFrame& f) {
  Writer w(FrameType::kReset);
  w.f64(f.duration);
  w.u32(f.command_hz);
  w.u32(f.num_cars);
  w.f64(f.initial_speed);
  w.u8(f.rate_limited);
  return w.finish();
}

std::vector<uint8_t> encode_bye() { return Writer(FrameType::kBye).finish(); }

std::vector<uint8_t> encode_error(const ErrorFrame& f) {
  Writer w(FrameType::kError);
  w.u32(static_cast<uint32_t>(f.message.size()));
  w.bytes(f.message.data(), f.message.size());
  return w.finish();
}

FrameType frame_type(const std::vector<uint8_t>& payload) {
  if (payload.empty()) throw ProtocolError("empty frame");
  uint8_t t = payload[0];
  if (t < 1 || t > 6) {
    throw ProtocolError("unknown frame type " + std::to_string(t));
  }
  return static_cast<FrameType>(t);
}

HelloFrame decode_hello(const std::vector<uint8_t>& payload) {
  Reader r(payload);
  r.expect_type(FrameType::kHello);
  HelloFrame f;
  f.version = r.u32();
  f.track_hash = r.u64();
  f.car_count = r.u32();
  r.done();
  return f;
}

StateFrame decode_state(const std::vector<uint8_t>& payload) {
  Reader r(payload);
  r.expect_type(FrameType::kState);
  StateFrame f;
  f.tick = r.u64();
  uint32_t n = r.u32();
  if (n > kMaxCars) throw ProtocolError("state frame car count too large");
  f.cars.resize(n);
  for (auto& c : f.cars) {
    c.position.x = r.f64();
    c.position.y = r.f64();
    c.heading = r.f64();
    for (double& v : c.v) v = r.f64();
    for (double& a : c.accel) a = r.f64();
    c.yaw_rate = r.f64();
    c.last_steering = r.f64();
    c.wall_contact = r.u8();
    c.progress = r.f64();
  }
  r.done();
  return f;
}

CommandFrame decode_command(const std::vector<uint8_t>& payload) {
  Reader r(payload);
  r.expect_type(FrameType::kCommand);
  CommandFrame f;
  f.tick = r.u64();
  uint32_t n = r.u32();
  if (n > kMaxCars) throw ProtocolError("command frame car count too large");
  f.commands.resize(n);
  for (auto& a : f.commands) {
    a.steer = r.f64();
    a.throttle = r.f64();
  }
  r.done();
  return f;
}

ResetFrame decode_reset(const std::vector<uint8_t>& payload) {
  Reader r(payload);
  r.expect_type(FrameType::kReset);
  ResetFrame f;
  f.duration = r.f64();
  f.command_hz = r.u32();
  f.num_cars = r.u32();
  f.initial_speed = r.f64();
  f.rate_limited = r.u8();
  r.done();
  return f;
}

ErrorFrame decode_error(const std::vector<uint8_t>& payload) {
  Reader r(payload);
  r.expect_type(FrameType::kError);
  uint32_t n = r.u32();
  if (n != r.remaining()) throw ProtocolError("bad error frame length");
  ErrorFrame f;
  f.message = r.str(n);
  r.done();
  return f;
}

}  // namespace apex
