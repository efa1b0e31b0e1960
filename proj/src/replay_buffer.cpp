#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "freemesh/sac.hpp"

namespace freemesh::sac {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity == 0 || obs_dim == 0 || act_dim == 0) {
    throw std::invalid_argument("replay buffer dimensions must be positive");
  }
}

void ReplayBuffer::add(std::span<const double> state, std::span<const double> action, double reward,
                       std::span<const double> next_state, bool done) {
  if (state.size() != obs_dim_ || next_state.size() != obs_dim_ || action.size() != act_dim_) {
    throw nn::ShapeError("transition does not match the buffer dimensions");
  }
  // Storage grows until it reaches capacity, then the cursor wraps.
  if (size_ < capacity_ && cursor_ == size_) {
    state_.insert(state_.end(), state.begin(), state.end());
    action_.insert(action_.end(), action.begin(), action.end());
    reward_.push_back(reward);
    next_state_.insert(next_state_.end(), next_state.begin(), next_state.end());
    done_.push_back(done ? 1.0 : 0.0);
    ++size_;
  } else {
    std::copy(state.begin(), state.end(), state_.begin() + static_cast<std::ptrdiff_t>(cursor_ * obs_dim_));
    std::copy(action.begin(), action.end(), action_.begin() + static_cast<std::ptrdiff_t>(cursor_ * act_dim_));
    reward_[cursor_] = reward;
    std::copy(next_state.begin(), next_state.end(),
              next_state_.begin() + static_cast<std::ptrdiff_t>(cursor_ * obs_dim_));
    done_[cursor_] = done ? 1.0 : 0.0;
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay slot " + std::to_string(i) + " is empty");
  Transition t;
  const auto so = static_cast<std::ptrdiff_t>(i * obs_dim_);
  const auto ao = static_cast<std::ptrdiff_t>(i * act_dim_);
  t.state.assign(state_.begin() + so, state_.begin() + so + static_cast<std::ptrdiff_t>(obs_dim_));
  t.action.assign(action_.begin() + ao, action_.begin() + ao + static_cast<std::ptrdiff_t>(act_dim_));
  t.reward = reward_[i];
  t.next_state.assign(next_state_.begin() + so, next_state_.begin() + so + static_cast<std::ptrdiff_t>(obs_dim_));
  t.done = done_[i];
  return t;
}

Batch ReplayBuffer::sample(std::size_t m, std::mt19937_64& rng) const {
  if (m == 0) throw std::invalid_argument("batch size must be positive");
  if (m > size_) {
    throw std::invalid_argument("cannot draw " + std::to_string(m) + " distinct transitions from " +
                                std::to_string(size_));
  }
  // Floyd's algorithm: m distinct indices in O(m).
  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::unordered_set<std::size_t> seen;
  seen.reserve(2 * m);
  for (std::size_t j = size_ - m; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    std::size_t t = pick(rng);
    if (!seen.insert(t).second) {
      t = j;
      seen.insert(t);
    }
    picked.push_back(t);
  }
  return gather(picked);
}

Batch ReplayBuffer::gather(std::span<const std::size_t> indices) const {
  const auto m = static_cast<Eigen::Index>(indices.size());
  const auto od = static_cast<Eigen::Index>(obs_dim_);
  const auto ad = static_cast<Eigen::Index>(act_dim_);
  Batch b;
  b.state.resize(od, m);
  b.action.resize(ad, m);
  b.reward.resize(1, m);
  b.next_state.resize(od, m);
  b.done.resize(1, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const std::size_t i = indices[static_cast<std::size_t>(c)];
    if (i >= size_) throw std::out_of_range("replay slot " + std::to_string(i) + " is empty");
    for (Eigen::Index r = 0; r < od; ++r) {
      b.state(r, c) = state_[i * obs_dim_ + static_cast<std::size_t>(r)];
      b.next_state(r, c) = next_state_[i * obs_dim_ + static_cast<std::size_t>(r)];
    }
    for (Eigen::Index r = 0; r < ad; ++r) b.action(r, c) = action_[i * act_dim_ + static_cast<std::size_t>(r)];
    b.reward(0, c) = reward_[i];
    b.done(0, c) = done_[i];
  }
  b.indices.assign(indices.begin(), indices.end());
  return b;
}

}  // namespace freemesh::sac
