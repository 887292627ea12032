#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apex/car.hpp"
#include "apex/geom.hpp"

namespace apex {

inline constexpr uint32_t kProtocolVersion = 1;

// Frame layout: u32 payload length (little-endian, excluding itself),
// then the payload: u8 frame type followed by the type's body. All
// integers little-endian, all floats IEEE-754 binary64.
enum class FrameType : uint8_t {
  kHello = 1,    // server -> client on connect
  kState = 2,    // server -> client at every command boundary
  kCommand = 3,  // client -> server; empty command list = keep latched
  kReset = 4,    // client -> server: start an episode
  kBye = 5,      // either side: episode end (server) / session end (client)
  kError = 6,    // server -> client before closing on a violation
};

struct HelloFrame {
  uint32_t version = kProtocolVersion;
  uint64_t track_hash = 0;
  uint32_t car_count = 0;  // cars the server will simulate by default
};

struct CarStateWire {
  Vec2 position;
  double heading = 0.0;
  double v[3] = {0, 0, 0};      // body-frame velocity
  double accel[3] = {0, 0, 0};  // body-frame acceleration
  double yaw_rate = 0.0;
  double last_steering = 0.0;
  uint8_t wall_contact = 0;
  double progress = 0.0;
};

struct StateFrame {
  uint64_t tick = 0;  // physics tick index of this snapshot
  std::vector<CarStateWire> cars;
};

struct CommandFrame {
  uint64_t tick = 0;  // must echo the state frame being answered
  std::vector<Action> commands;  // empty = previous commands stay latched
};

struct ResetFrame {
  double duration = 100.0;
  uint32_t command_hz = 10;
  uint32_t num_cars = 1;
  double initial_speed = 100.0 / 3.6;
  uint8_t rate_limited = 0;
};

struct ErrorFrame {
  std::string message;
};

// Encoders produce the complete framed bytes (length prefix included).
std::vector<uint8_t> encode_hello(const HelloFrame& f);
std::vector<uint8_t> encode_state(const StateFrame& f);
std::vector<uint8_t> encode_command(const CommandFrame& f);
std::vector<uint8_t> encode_reset(const ResetFrame& f);
std::vector<uint8_t> encode_bye();
std::vector<uint8_t> encode_error(const ErrorFrame& f);

// Decoders take one frame's payload (type byte + body, no length prefix)
// and throw ProtocolError on truncation, trailing bytes, or a type
// mismatch.
FrameType frame_type(const std::vector<uint8_t>& payload);
HelloFrame decode_hello(const std::vector<uint8_t>& payload);
StateFrame decode_state(const std::vector<uint8_t>& payload);
CommandFrame decode_command(const std::vector<uint8_t>& payload);
ResetFrame decode_reset(const std::vector<uint8_t>& payload);
ErrorFrame decode_error(const std::vector<uint8_t>& payload);

}  // namespace apex
