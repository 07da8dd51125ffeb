#pragma once

#include <cstddef>
#include <vector>

#include "adhrl/ndmath.hpp"
#include "adhrl/rng.hpp"

namespace adhrl {

struct Transition {
  VectorXd state;
  VectorXd action;
  double reward = 0.0;
  VectorXd next_state;
  bool terminal = false;  // horizon truncation is stored as false (bootstraps)
  double behavior_log_density = 0.0;
  int option_id = 0;
};

// FIFO ring buffer sampled uniformly with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim, int option_count);

  void push(const Transition& t);
  std::vector<Transition> sample_batch(std::size_t n, Rng& rng) const;
  const Transition& at(std::size_t i) const;  // 0 is the oldest live entry

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  void check(const Transition& t) const;

  std::size_t capacity_;
  int state_dim_, action_dim_, option_count_;
  std::vector<Transition> data_;
  std::size_t next_ = 0;  // ring write position once full
};

// Fixed-size aggregation buffer for the option-network training rounds.
// Fullness is the training trigger; pushes into a full buffer are rejected.
class OnPolicyBuffer {
 public:
  OnPolicyBuffer(std::size_t capacity, int state_dim, int action_dim, int option_count);

  bool push(const Transition& t);  // false if rejected (already full)
  void clear();
  bool is_full() const { return data_.size() >= capacity_; }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<Transition>& transitions() const { return data_; }

 private:
  void check(const Transition& t) const;

  std::size_t capacity_;
  int state_dim_, action_dim_, option_count_;
  std::vector<Transition> data_;
};

}  // namespace adhrl
