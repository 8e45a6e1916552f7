#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtforge/actions.hpp"
#include "courtforge/byte_io.hpp"
#include "courtforge/match_engine.hpp"
#include "courtforge/nn.hpp"
#include "courtforge/replay_buffer.hpp"
#include "courtforge/rng.hpp"

namespace courtforge {

enum class Variant : std::uint8_t { DuelingDDQN = 0, VanillaDQN = 1 };

std::string_view name_of(Variant v) noexcept;
std::optional<Variant> variant_from_name(std::string_view name) noexcept;

using QVector = Eigen::Matrix<double, kNumActions, 1>;

// Dueling: trunk 18-128-128 (ReLU), value head 128-64-1, advantage head
// 128-64-10, recombined as V + A - mean(A). Vanilla: one 18-128-128-10 chain.
class QNetwork {
public:
    using Layout = std::vector<std::vector<nn::LayerSpec>>;
    using Params = nn::ParameterSet<double>;

    static Layout layout(Variant v);
    static QNetwork create(Variant v, Rng& rng);

    QNetwork(Variant v, std::vector<Params> segments);

    Variant variant() const noexcept { return variant_; }
    std::span<const Params> segments() const noexcept { return segments_; }
    std::span<Params> mutable_segments() noexcept { return segments_; }

    Eigen::MatrixXd q_values(const Eigen::MatrixXd& states) const;  // 10 x B
    QVector q_values(const StateVector& state) const;

    struct Pass {
        Eigen::MatrixXd q;
        std::vector<nn::Tape<double>> tapes;  // one per segment
    };
    Pass forward(const Eigen::MatrixXd& states) const;
    // Gradients per segment for d(loss)/d(q) = q_grad.
    std::vector<nn::Gradients<double>> backward(const Pass& pass, const Eigen::MatrixXd& q_grad) const;

    bool operator==(const QNetwork& other) const;

private:
    Variant variant_;
    std::vector<Params> segments_;
};

// Q = V + (A - mean_a A), column-wise.
Eigen::MatrixXd dueling_aggregate(const Eigen::MatrixXd& value, const Eigen::MatrixXd& advantage);

// Valid actions recovered from an (optionally normalized) observation.
ActionSet valid_actions_from_observation(const Eigen::Ref<const Eigen::VectorXd>& obs);

// Greedy ties resolve to the lowest id. Throws ContractViolation on an empty set.
ActionId select_action(const Eigen::Ref<const Eigen::VectorXd>& q, ActionSet valid,
                       double epsilon, Rng& rng);
ActionId greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q, ActionSet valid);

// y = r + gamma (1 - done) Q_target(s', argmax_a Q_online(s', a)).
Eigen::VectorXd compute_targets(const Batch& batch, const QNetwork& online, const QNetwork& target,
                                double gamma, bool mask_targets = false);
// y = r + gamma (1 - done) max_a Q_target(s', a).
Eigen::VectorXd vanilla_targets(const Batch& batch, const QNetwork& target, double gamma,
                                bool mask_targets = false);

struct AgentConfig {
    Variant variant = Variant::DuelingDDQN;
    double gamma = 0.99;
    std::size_t batch_size = 128;
    std::size_t buffer_capacity = 20000;
    int target_update = 5;  // episodes between hard target syncs
    bool mask_targets = false;
    double clip_norm = 1.0;
    nn::AdamConfig adam{};

    void validate() const;
};

struct AgentMeta {
    Variant variant = Variant::DuelingDDQN;
    std::uint64_t config_hash = 0;
    std::uint64_t episode = 0;
};

class Agent {
public:
    Agent(const AgentConfig& config, std::uint64_t seed);

    const AgentConfig& config() const noexcept { return config_; }

    ActionId act(const StateVector& obs, ActionSet valid, double epsilon);
    void remember(const Transition& t) { buffer_.push(t); }

    // Loss of the update, or nullopt when the buffer holds fewer than a batch.
    std::optional<double> learn_step();
    void hard_update_target() { target_ = online_; }

    const QNetwork& online() const noexcept { return online_; }
    const QNetwork& target() const noexcept { return target_; }
    QNetwork& mutable_online() noexcept { return online_; }
    const ReplayBuffer& buffer() const noexcept { return buffer_; }
    const std::vector<nn::AdamState<double>>& optimizer() const noexcept { return adam_; }
    Rng& rng() noexcept { return rng_; }

    // Full training state: networks, optimizer moments, replay contents and RNG.
    Bytes serialize(const AgentMeta& meta, std::span<const std::uint8_t> extra = {}) const;
    // Replaces this agent's state. Variant and layer dims must match config().
    // Returns the stored meta; `extra` receives the caller payload.
    AgentMeta restore(std::span<const std::uint8_t> bytes, Bytes* extra = nullptr,
                      const std::string& context = "agent checkpoint");

private:
    AgentConfig config_;
    Rng rng_;
    QNetwork online_;
    QNetwork target_;
    std::vector<nn::AdamState<double>> adam_;
    ReplayBuffer buffer_;
};

struct PolicySnapshot {
    AgentMeta meta;
    QNetwork network;
};

// Reads only what greedy evaluation needs from an agent checkpoint.
PolicySnapshot load_policy(const std::string& path);
PolicySnapshot load_policy(std::span<const std::uint8_t> bytes, const std::string& context);

}  // namespace courtforge
