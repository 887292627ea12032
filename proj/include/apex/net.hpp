#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "apex/car.hpp"
#include "apex/observation.hpp"
#include "apex/reward.hpp"
#include "apex/rollout.hpp"
#include "apex/track.hpp"
#include "apex/wire.hpp"

namespace apex {

struct ServeOptions {
  uint16_t port = 7447;   // 0 = ephemeral; actual port via on_listening
  int max_sessions = 0;   // 0 = accept connections forever
  std::function<void(uint16_t)> on_listening;
  int default_cars = 20;  // announced in HELLO; RESET sets the real count
  ObsConfig observation;
  RewardConfig reward;
};

// TCP lockstep simulation server. Per connection: sends HELLO, then for
// each RESET runs one episode over the same episode engine as in-process
// rollouts: at every command boundary the server sends a STATE frame and
// blocks for a COMMAND frame (an empty command list re-latches the previous
// commands, zeros initially). After the final physics tick it sends a last
// STATE followed by BYE. Faulted cars drop out of subsequent STATE frames,
// preserving the relative order of the survivors. A protocol violation is
// answered with an ERROR frame and the connection is closed.
void serve_remote(const TrackDefinition& track, const CarConfig& car,
                  const ServeOptions& opts);

// Test/client counterpart speaking the same protocol.
class SimClient {
 public:
  SimClient(const std::string& host, uint16_t port);
  ~SimClient();
  SimClient(const SimClient&) = delete;
  SimClient& operator=(const SimClient&) = delete;

  const HelloFrame& hello() const { return hello_; }

  // Starts an episode; returns the spawn STATE (tick 0).
  StateFrame reset(const ResetFrame& config);

  // Answers the last STATE with commands (empty = keep latched) and
  // returns the next STATE, or nullopt when the server ends the episode.
  std::optional<StateFrame> step(const std::vector<Action>& commands);

  // Ends the session.
  void bye();

 private:
  std::vector<uint8_t> read_frame();
  void write_frame(const std::vector<uint8_t>& bytes);
  void read_bye();

  int fd_ = -1;
  HelloFrame hello_;
  uint64_t last_tick_ = 0;
  bool episode_open_ = false;
  int steps_total_ = 0;
  int steps_sent_ = 0;
};

}  // namespace apex
