#include "courtforge/replay_buffer.hpp"

#include <algorithm>

#include "courtforge/errors.hpp"

namespace courtforge {

Batch make_batch(const std::vector<Transition>& transitions) {
    const auto n = static_cast<Eigen::Index>(transitions.size());
    Batch b;
    b.states.resize(kStateDim, n);
    b.next_states.resize(kStateDim, n);
    b.rewards.resize(n);
    b.dones.resize(n);
    b.actions.reserve(transitions.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Transition& t = transitions[static_cast<std::size_t>(i)];
        b.states.col(i) = t.state;
        b.next_states.col(i) = t.next_state;
        b.actions.push_back(t.action);
        b.rewards(i) = t.reward;
        b.dones(i) = t.done ? 1.0 : 0.0;
    }
    return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : ring_(capacity) {
    if (capacity == 0) throw ValidationError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
    ring_[head_] = t;
    head_ = (head_ + 1) % ring_.size();
    size_ = std::min(size_ + 1, ring_.size());
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
    if (logical >= size_) throw ContractViolation("ReplayBuffer::at: index out of range");
    const std::size_t oldest = (head_ + ring_.size() - size_) % ring_.size();
    return ring_[(oldest + logical) % ring_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
    if (n > size_) throw ContractViolation("ReplayBuffer::sample: not enough transitions");
    // Floyd's algorithm: n distinct draws from [0, size) with n RNG calls.
    std::vector<std::size_t> picked;
    picked.reserve(n);
    for (std::size_t j = size_ - n; j < size_; ++j) {
        std::uniform_int_distribution<std::size_t> dist(0, j);
        const std::size_t t = dist(rng);
        const bool seen = std::find(picked.begin(), picked.end(), t) != picked.end();
        picked.push_back(seen ? j : t);
    }
    return picked;
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
    const auto idx = sample_indices(n, rng);
    Batch b;
    const auto cols = static_cast<Eigen::Index>(n);
    b.states.resize(kStateDim, cols);
    b.next_states.resize(kStateDim, cols);
    b.rewards.resize(cols);
    b.dones.resize(cols);
    b.actions.reserve(n);
    for (Eigen::Index i = 0; i < cols; ++i) {
        const Transition& t = at(idx[static_cast<std::size_t>(i)]);
        b.states.col(i) = t.state;
        b.next_states.col(i) = t.next_state;
        b.actions.push_back(t.action);
        b.rewards(i) = t.reward;
        b.dones(i) = t.done ? 1.0 : 0.0;
    }
    return b;
}

}  // namespace courtforge
