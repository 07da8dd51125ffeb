#include "adhrl/buffers.hpp"

#include <cmath>

#include "adhrl/errors.hpp"

namespace adhrl {

namespace {

void check_transition(const Transition& t, int state_dim, int action_dim,
                      int option_count, const char* who) {
  if (t.state.size() != state_dim || t.next_state.size() != state_dim)
    throw ContractViolation(std::string(who) + ": state dimension mismatch");
  if (t.action.size() != action_dim)
    throw ContractViolation(std::string(who) + ": action dimension mismatch");
  if (!t.state.allFinite() || !t.action.allFinite() || !t.next_state.allFinite() ||
      !std::isfinite(t.reward) || !std::isfinite(t.behavior_log_density))
    throw ContractViolation(std::string(who) + ": non-finite transition field");
  if (t.option_id < 0 || t.option_id >= option_count)
    throw ContractViolation(std::string(who) + ": option_id out of range");
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim,
                           int option_count)
    : capacity_(capacity),
      state_dim_(state_dim),
      action_dim_(action_dim),
      option_count_(option_count) {
  if (capacity_ == 0) throw ContractViolation("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::check(const Transition& t) const {
  check_transition(t, state_dim_, action_dim_, option_count_, "ReplayBuffer");
}

void ReplayBuffer::push(const Transition& t) {
  check(t);
  if (data_.size() < capacity_) {
    data_.push_back(t);
  } else {
    data_[next_] = t;  // overwrite the oldest entry
    next_ = (next_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw ContractViolation("ReplayBuffer::at: index out of range");
  if (data_.size() < capacity_) return data_[i];
  return data_[(next_ + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample_batch(std::size_t n, Rng& rng) const {
  if (data_.size() < n)
    throw InsufficientData("ReplayBuffer: requested " + std::to_string(n) +
                           " transitions but only " + std::to_string(data_.size()) +
                           " stored");
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(data_[rng.uniform_int(data_.size())]);
  return out;
}

OnPolicyBuffer::OnPolicyBuffer(std::size_t capacity, int state_dim, int action_dim,
                               int option_count)
    : capacity_(capacity),
      state_dim_(state_dim),
      action_dim_(action_dim),
      option_count_(option_count) {
  if (capacity_ == 0) throw ContractViolation("OnPolicyBuffer: capacity must be positive");
  data_.reserve(capacity_);
}

void OnPolicyBuffer::check(const Transition& t) const {
  check_transition(t, state_dim_, action_dim_, option_count_, "OnPolicyBuffer");
}

bool OnPolicyBuffer::push(const Transition& t) {
  check(t);
  if (is_full()) return false;
  data_.push_back(t);
  return true;
}

void OnPolicyBuffer::clear() { data_.clear(); }

}  // namespace adhrl
