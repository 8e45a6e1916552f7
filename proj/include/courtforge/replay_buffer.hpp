#pragma once

#include <cstddef>
#include <vector>

#include "courtforge/actions.hpp"
#include "courtforge/match_engine.hpp"
#include "courtforge/rng.hpp"

namespace courtforge {

struct Transition {
    StateVector state = StateVector::Zero();
    ActionId action = ActionId::ServeFlatWide;
    double reward = 0.0;
    StateVector next_state = StateVector::Zero();
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

// Column-major minibatch: one transition per column.
struct Batch {
    Eigen::MatrixXd states;       // kStateDim x B
    Eigen::MatrixXd next_states;  // kStateDim x B
    std::vector<ActionId> actions;
    Eigen::VectorXd rewards;
    Eigen::VectorXd dones;  // 1.0 for terminal

    Eigen::Index size() const noexcept { return states.cols(); }
};

Batch make_batch(const std::vector<Transition>& transitions);

// Fixed-capacity ring; the oldest transition is evicted first. Logical index 0
// is always the oldest live entry.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t);

    std::size_t size() const noexcept { return size_; }
    std::size_t capacity() const noexcept { return ring_.size(); }
    bool empty() const noexcept { return size_ == 0; }

    const Transition& at(std::size_t logical) const;

    // n distinct logical indices drawn uniformly; requires n <= size().
    std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
    Batch sample(std::size_t n, Rng& rng) const;

private:
    std::vector<Transition> ring_;
    std::size_t head_ = 0;  // next write slot
    std::size_t size_ = 0;
};

}  // namespace courtforge
