#include "apex/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "apex/error.hpp"

namespace apex {

ReplayBuffer::ReplayBuffer(int obs_dim, size_t capacity)
    : obs_dim_(obs_dim), capacity_(capacity) {
  if (obs_dim <= 0 || capacity == 0) {
    throw TrainingFault("replay buffer needs positive dimensions");
  }
  obs_.resize(capacity * obs_dim);
  next_obs_.resize(capacity * obs_dim);
  action_.resize(capacity);
  reward_.resize(capacity);
  done_.resize(capacity);
  episode_.resize(capacity);
  step_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  if (static_cast<int>(t.obs.size()) != obs_dim_ ||
      static_cast<int>(t.next_obs.size()) != obs_dim_) {
    throw TrainingFault("transition observation dimension mismatch");
  }
  if (!std::isfinite(t.reward)) {
    throw TrainingFault("non-finite reward pushed to replay buffer");
  }
  size_t s = next_slot_;
  std::memcpy(&obs_[s * obs_dim_], t.obs.data(), obs_dim_ * sizeof(double));
  std::memcpy(&next_obs_[s * obs_dim_], t.next_obs.data(),
              obs_dim_ * sizeof(double));
  action_[s] = t.action;
  reward_[s] = t.reward;
  done_[s] = t.done ? 1 : 0;
  episode_[s] = t.episode_id;
  step_[s] = t.step_index;
  next_slot_ = (next_slot_ + 1) % capacity_;
  if (count_ < capacity_) ++count_;
}

size_t ReplayBuffer::slot_of(size_t chronological_index) const {
  size_t oldest = count_ < capacity_ ? 0 : next_slot_;
  return (oldest + chronological_index) % capacity_;
}

Transition ReplayBuffer::transition_at(size_t chronological_index) const {
  size_t s = slot_of(chronological_index);
  Transition t;
  t.obs.assign(&obs_[s * obs_dim_], &obs_[s * obs_dim_] + obs_dim_);
  t.next_obs.assign(&next_obs_[s * obs_dim_],
                    &next_obs_[s * obs_dim_] + obs_dim_);
  t.action = action_[s];
  t.reward = reward_[s];
  t.done = done_[s] != 0;
  t.episode_id = episode_[s];
  t.step_index = step_[s];
  return t;
}

ReplayBuffer::NstepBatch ReplayBuffer::sample_nstep(int batch_size, int n,
                                                    double gamma,
                                                    Rng& rng) const {
  if (count_ < static_cast<size_t>(batch_size)) {
    throw TrainingFault("replay buffer smaller than batch size");
  }
  NstepBatch batch;
  batch.obs.resize(batch_size, obs_dim_);
  batch.next_obs.resize(batch_size, obs_dim_);
  batch.action.resize(batch_size, 2);
  batch.reward.assign(batch_size, 0.0);
  batch.done.assign(batch_size, 0);
  batch.m.assign(batch_size, 0);

  size_t attempts_left = static_cast<size_t>(batch_size) * 1000;
  for (int b = 0; b < batch_size; ++b) {
    while (true) {
      if (attempts_left-- == 0) {
        throw TrainingFault("replay buffer holds too few valid window starts");
      }
      size_t start = rng.uniform_index(count_);
      // Walk the window forward. It ends early only at a terminal
      // transition or a within-buffer episode boundary; a window that runs
      // into the buffer head mid-episode has an unknown continuation and
      // the start is rejected.
      double agg = 0.0;
      double discount = 1.0;
      int m = 0;
      bool valid = true;
      for (int k = 0; k < n; ++k) {
        size_t s = slot_of(start + k);
        agg += discount * reward_[s];
        discount *= gamma;
        m = k + 1;
        if (done_[s]) break;          // terminal inside the window
        if (k + 1 == n) break;        // full window assembled
        if (start + k + 1 >= count_) {
          valid = false;              // head reached mid-episode
          break;
        }
        size_t succ = slot_of(start + k + 1);
        if (episode_[succ] != episode_[s] || step_[succ] != step_[s] + 1) {
          break;  // episode ended here (timeout); bootstrap continues
        }
      }
      if (!valid) continue;
      size_t s0 = slot_of(start);
      size_t sm = slot_of(start + m - 1);
      std::memcpy(batch.obs.row(b), &obs_[s0 * obs_dim_],
                  obs_dim_ * sizeof(double));
      std::memcpy(batch.next_obs.row(b), &next_obs_[sm * obs_dim_],
                  obs_dim_ * sizeof(double));
      batch.action.at(b, 0) = action_[s0][0];
      batch.action.at(b, 1) = action_[s0][1];
      batch.reward[b] = agg;
      batch.done[b] = done_[sm];
      batch.m[b] = m;
      break;
    }
  }
  return batch;
}

}  // namespace apex
