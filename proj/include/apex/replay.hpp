#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "apex/mat.hpp"
#include "apex/rng.hpp"

namespace apex {

struct Transition {
  std::vector<double> obs;
  std::array<double, 2> action{};  // network-space components in [-1, 1]
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;  // terminal (simulation fault); timeouts stay false
  uint64_t episode_id = 0;
  int step_index = 0;
};

// Bounded FIFO transition store with n-step window assembly. Windows
// follow chronological insertion order and never cross an episode
// boundary (episode id change or terminal flag). Callers must push each
// episode's transitions as one contiguous run (per car) so that insertion
// adjacency matches episode adjacency.
class ReplayBuffer {
 public:
  ReplayBuffer(int obs_dim, size_t capacity);

  int obs_dim() const { return obs_dim_; }
  size_t capacity() const { return capacity_; }
  size_t size() const { return count_; }

  // Appends, evicting the oldest entry when full. Throws TrainingFault on
  // observation dimension mismatch.
  void push(const Transition& t);

  struct NstepBatch {
    Mat obs;                      // B x obs_dim, window-start observations
    Mat action;                   // B x 2
    std::vector<double> reward;   // discounted m-step partial returns
    Mat next_obs;                 // B x obs_dim, bootstrap observations
    std::vector<uint8_t> done;    // windows ending in a terminal transition
    std::vector<int> m;           // realized window lengths, m <= n
  };

  // Uniformly samples window starts whose full window (m = min(n, steps to
  // episode end)) is present in the buffer; starts whose episode continues
  // past the newest stored transition are rejected and redrawn. Throws
  // TrainingFault when too little data is available.
  NstepBatch sample_nstep(int batch_size, int n, double gamma, Rng& rng) const;

  // Chronological access for tests: index 0 is the oldest stored entry.
  Transition transition_at(size_t chronological_index) const;

 private:
  size_t slot_of(size_t chronological_index) const;

  int obs_dim_;
  size_t capacity_;
  size_t count_ = 0;
  size_t next_slot_ = 0;  // ring write position

  // Struct-of-arrays storage to keep capacity * obs_dim memory flat.
  std::vector<double> obs_;
  std::vector<double> next_obs_;
  std::vector<std::array<double, 2>> action_;
  std::vector<double> reward_;
  std::vector<uint8_t> done_;
  std::vector<uint64_t> episode_;
  std::vector<int> step_;
};

}  // namespace apex
