#include "courtforge/agent.hpp"

#include <sstream>

#include "courtforge/errors.hpp"
#include "courtforge/nn_checkpoint.hpp"

namespace courtforge {

using nn::Activation;
using nn::LayerSpec;

std::string_view name_of(Variant v) noexcept {
    return v == Variant::DuelingDDQN ? "dueling_ddqn" : "vanilla_dqn";
}

std::optional<Variant> variant_from_name(std::string_view name) noexcept {
    if (name == "dueling_ddqn" || name == "dueling") return Variant::DuelingDDQN;
    if (name == "vanilla_dqn" || name == "vanilla") return Variant::VanillaDQN;
    return std::nullopt;
}

QNetwork::Layout QNetwork::layout(Variant v) {
    if (v == Variant::DuelingDDQN) {
        return {
            {{kStateDim, 128, Activation::ReLU}, {128, 128, Activation::ReLU}},
            {{128, 64, Activation::ReLU}, {64, 1, Activation::Identity}},
            {{128, 64, Activation::ReLU}, {64, kNumActions, Activation::Identity}},
        };
    }
    return {{{kStateDim, 128, Activation::ReLU},
             {128, 128, Activation::ReLU},
             {128, kNumActions, Activation::Identity}}};
}

QNetwork QNetwork::create(Variant v, Rng& rng) {
    std::vector<Params> segs;
    for (const auto& specs : layout(v)) segs.push_back(nn::init_params<double>(specs, rng));
    return QNetwork(v, std::move(segs));
}

QNetwork::QNetwork(Variant v, std::vector<Params> segments)
    : variant_(v), segments_(std::move(segments)) {
    const Layout want = layout(v);
    if (want.size() != segments_.size()) {
        throw ValidationError("QNetwork: wrong number of segments for " + std::string(name_of(v)));
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (segments_[i].specs() != want[i]) {
            throw ValidationError("QNetwork: segment " + std::to_string(i) +
                                  " layer dims do not match " + std::string(name_of(v)));
        }
    }
}

Eigen::MatrixXd dueling_aggregate(const Eigen::MatrixXd& value, const Eigen::MatrixXd& advantage) {
    const Eigen::RowVectorXd mean = advantage.colwise().mean();
    Eigen::MatrixXd q = advantage;
    q.rowwise() += value.row(0) - mean;
    return q;
}

Eigen::MatrixXd QNetwork::q_values(const Eigen::MatrixXd& states) const {
    if (variant_ == Variant::VanillaDQN) return nn::predict(segments_[0], states);
    const Eigen::MatrixXd h = nn::predict(segments_[0], states);
    return dueling_aggregate(nn::predict(segments_[1], h), nn::predict(segments_[2], h));
}

QVector QNetwork::q_values(const StateVector& state) const {
    const Eigen::MatrixXd q = q_values(Eigen::MatrixXd(state));
    return q.col(0);
}

QNetwork::Pass QNetwork::forward(const Eigen::MatrixXd& states) const {
    Pass pass;
    if (variant_ == Variant::VanillaDQN) {
        auto f = nn::forward(segments_[0], states);
        pass.q = std::move(f.output);
        pass.tapes.push_back(std::move(f.tape));
        return pass;
    }
    auto trunk = nn::forward(segments_[0], states);
    auto value = nn::forward(segments_[1], trunk.output);
    auto adv = nn::forward(segments_[2], trunk.output);
    pass.q = dueling_aggregate(value.output, adv.output);
    pass.tapes.push_back(std::move(trunk.tape));
    pass.tapes.push_back(std::move(value.tape));
    pass.tapes.push_back(std::move(adv.tape));
    return pass;
}

std::vector<nn::Gradients<double>> QNetwork::backward(const Pass& pass,
                                                      const Eigen::MatrixXd& q_grad) const {
    if (pass.tapes.size() != segments_.size()) {
        throw ContractViolation("QNetwork::backward: pass does not belong to this network");
    }
    std::vector<nn::Gradients<double>> grads(segments_.size());
    if (variant_ == Variant::VanillaDQN) {
        grads[0] = nn::backward(segments_[0], pass.tapes[0], q_grad).grads;
        return grads;
    }
    // dQ_a/dV = 1, dQ_a/dA_b = [a == b] - 1/n
    const Eigen::RowVectorXd col_sum = q_grad.colwise().sum();
    const Eigen::MatrixXd value_grad = col_sum;
    Eigen::MatrixXd adv_grad = q_grad;
    adv_grad.rowwise() -= col_sum / static_cast<double>(kNumActions);

    auto v = nn::backward(segments_[1], pass.tapes[1], value_grad);
    auto a = nn::backward(segments_[2], pass.tapes[2], adv_grad);
    const Eigen::MatrixXd trunk_grad = v.input_grad + a.input_grad;
    grads[0] = nn::backward(segments_[0], pass.tapes[0], trunk_grad).grads;
    grads[1] = std::move(v.grads);
    grads[2] = std::move(a.grads);
    return grads;
}

bool QNetwork::operator==(const QNetwork& other) const {
    if (variant_ != other.variant_ || segments_.size() != other.segments_.size()) return false;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (!(segments_[i] == other.segments_[i])) return false;
    }
    return true;
}

ActionSet valid_actions_from_observation(const Eigen::Ref<const Eigen::VectorXd>& obs) {
    if (obs.size() != kStateDim) throw ContractViolation("observation must have 18 entries");
    if (obs(state_index::rally_len) > 0.0) return ActionSet::for_phase(Phase::Rally);
    return ActionSet::for_phase(obs(state_index::serving) > 0.5 ? Phase::Serve : Phase::Return);
}

ActionId greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q, ActionSet valid) {
    if (valid.empty()) throw ContractViolation("select_action: empty valid-action set");
    int best = -1;
    for (int i = 0; i < kNumActions; ++i) {
        if (!valid.contains_index(i)) continue;
        if (best < 0 || q(i) > q(best)) best = i;
    }
    return action_from_index(best);
}

ActionId select_action(const Eigen::Ref<const Eigen::VectorXd>& q, ActionSet valid,
                       double epsilon, Rng& rng) {
    if (valid.empty()) throw ContractViolation("select_action: empty valid-action set");
    if (q.size() != kNumActions) throw ContractViolation("select_action: q must have 10 entries");
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng) < epsilon) {
            std::uniform_int_distribution<int> pick(0, valid.size() - 1);
            return valid.nth(pick(rng));
        }
    }
    return greedy_action(q, valid);
}

namespace {

int argmax_column(const Eigen::MatrixXd& q, Eigen::Index col, ActionSet allowed) {
    int best = -1;
    for (int i = 0; i < kNumActions; ++i) {
        if (!allowed.contains_index(i)) continue;
        if (best < 0 || q(i, col) > q(best, col)) best = i;
    }
    return best;
}

ActionSet target_action_set(const Batch& batch, Eigen::Index col, bool mask) {
    static constexpr ActionSet kAll = [] {
        ActionSet s;
        for (int i = 0; i < kNumActions; ++i) s.add(action_from_index(i));
        return s;
    }();
    return mask ? valid_actions_from_observation(batch.next_states.col(col)) : kAll;
}

}  // namespace

Eigen::VectorXd compute_targets(const Batch& batch, const QNetwork& online, const QNetwork& target,
                                double gamma, bool mask_targets) {
    const Eigen::MatrixXd q_online = online.q_values(batch.next_states);
    const Eigen::MatrixXd q_target = target.q_values(batch.next_states);
    Eigen::VectorXd y(batch.size());
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        const int a_star = argmax_column(q_online, j, target_action_set(batch, j, mask_targets));
        y(j) = batch.rewards(j) + gamma * (1.0 - batch.dones(j)) * q_target(a_star, j);
    }
    return y;
}

Eigen::VectorXd vanilla_targets(const Batch& batch, const QNetwork& target, double gamma,
                                bool mask_targets) {
    const Eigen::MatrixXd q_target = target.q_values(batch.next_states);
    Eigen::VectorXd y(batch.size());
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        const int a_max = argmax_column(q_target, j, target_action_set(batch, j, mask_targets));
        y(j) = batch.rewards(j) + gamma * (1.0 - batch.dones(j)) * q_target(a_max, j);
    }
    return y;
}

void AgentConfig::validate() const {
    std::string bad;
    if (!(gamma > 0.0 && gamma <= 1.0)) bad += " gamma";
    if (batch_size < 1) bad += " batch_size";
    if (buffer_capacity < 1) bad += " buffer_capacity";
    if (batch_size > buffer_capacity) bad += " batch_size>buffer_capacity";
    if (target_update < 1) bad += " target_update";
    if (!(clip_norm > 0.0)) bad += " clip_norm";
    if (!(adam.learning_rate >= 0.0)) bad += " lr";
    if (!bad.empty()) throw ValidationError("invalid agent config:" + bad);
}

Agent::Agent(const AgentConfig& config, std::uint64_t seed)
    : config_(config),
      rng_(seed),
      online_(QNetwork::create(config.variant, rng_)),
      target_(online_),
      buffer_(config.buffer_capacity) {
    config_.validate();
    for (const auto& seg : online_.segments()) adam_.push_back(nn::AdamState<double>::zeros_for(seg));
}

ActionId Agent::act(const StateVector& obs, ActionSet valid, double epsilon) {
    if (valid.empty()) throw ContractViolation("act: empty valid-action set");
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng_) < epsilon) {
            std::uniform_int_distribution<int> pick(0, valid.size() - 1);
            return valid.nth(pick(rng_));
        }
    }
    return greedy_action(online_.q_values(obs), valid);
}

std::optional<double> Agent::learn_step() {
    if (buffer_.size() < config_.batch_size) return std::nullopt;
    const Batch batch = buffer_.sample(config_.batch_size, rng_);

    const Eigen::VectorXd y =
        config_.variant == Variant::DuelingDDQN
            ? compute_targets(batch, online_, target_, config_.gamma, config_.mask_targets)
            : vanilla_targets(batch, target_, config_.gamma, config_.mask_targets);

    const QNetwork::Pass pass = online_.forward(batch.states);
    Eigen::VectorXd pred(batch.size());
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        pred(j) = pass.q(index_of(batch.actions[static_cast<std::size_t>(j)]), j);
    }
    const auto loss = nn::huber_loss<double>(pred, y);

    Eigen::MatrixXd q_grad = Eigen::MatrixXd::Zero(kNumActions, batch.size());
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        q_grad(index_of(batch.actions[static_cast<std::size_t>(j)]), j) = loss.grad(j);
    }
    auto grads = online_.backward(pass, q_grad);
    nn::clip_gradients(std::span<nn::Gradients<double>>(grads), config_.clip_norm);

    auto segs = online_.mutable_segments();
    for (std::size_t k = 0; k < segs.size(); ++k) nn::adam_step(segs[k], grads[k], adam_[k], config_.adam);
    return loss.loss;
}

// Agent checkpoint:
//   "CFAG" u32 version u8 variant u64 config_hash u64 episode
//   blob online network (CFNN, with optimizer)  blob target network (CFNN)
//   text rng state
//   u64 capacity u64 size, transitions oldest first
//   blob caller payload
//   u64 checksum
namespace {

constexpr std::string_view kAgentMagic = "CFAG";
constexpr std::uint32_t kAgentFormatVersion = 1;

nn::NetworkCheckpoint<double> network_checkpoint(const QNetwork& net,
                                                 const std::vector<nn::AdamState<double>>* adam) {
    nn::NetworkCheckpoint<double> ck;
    ck.segments.assign(net.segments().begin(), net.segments().end());
    if (adam) ck.optimizer = *adam;
    return ck;
}

void write_state(ByteWriter& w, const StateVector& s) {
    for (int i = 0; i < kStateDim; ++i) w.f64(s[i]);
}

StateVector read_state(ByteReader& r) {
    StateVector s;
    for (int i = 0; i < kStateDim; ++i) s[i] = r.f64();
    return s;
}

struct AgentHeader {
    AgentMeta meta;
    std::span<const std::uint8_t> online;
    std::span<const std::uint8_t> target;
};

AgentHeader read_header(ByteReader& r) {
    r.verify_seal();
    r.expect_magic(kAgentMagic);
    const std::uint32_t version = r.u32();
    if (version != kAgentFormatVersion) {
        r.fail("unsupported agent checkpoint version " + std::to_string(version));
    }
    AgentHeader h;
    const std::uint8_t variant = r.u8();
    if (variant > 1) r.fail("unknown variant code");
    h.meta.variant = static_cast<Variant>(variant);
    h.meta.config_hash = r.u64();
    h.meta.episode = r.u64();
    h.online = r.blob();
    h.target = r.blob();
    return h;
}

}  // namespace

Bytes Agent::serialize(const AgentMeta& meta, std::span<const std::uint8_t> extra) const {
    ByteWriter w;
    w.magic(kAgentMagic);
    w.u32(kAgentFormatVersion);
    w.u8(static_cast<std::uint8_t>(config_.variant));
    w.u64(meta.config_hash);
    w.u64(meta.episode);
    w.blob(nn::serialize_network(network_checkpoint(online_, &adam_)));
    w.blob(nn::serialize_network(network_checkpoint(target_, nullptr)));
    std::ostringstream rng_text;
    rng_text << rng_;
    w.text(rng_text.str());
    w.u64(buffer_.capacity());
    w.u64(buffer_.size());
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        const Transition& t = buffer_.at(i);
        write_state(w, t.state);
        w.u8(static_cast<std::uint8_t>(index_of(t.action)));
        w.f64(t.reward);
        write_state(w, t.next_state);
        w.u8(t.done ? 1 : 0);
    }
    w.blob(extra);
    w.seal();
    return w.take();
}

AgentMeta Agent::restore(std::span<const std::uint8_t> bytes, Bytes* extra,
                         const std::string& context) {
    ByteReader r(bytes, context);
    const AgentHeader h = read_header(r);
    if (h.meta.variant != config_.variant) {
        throw ValidationError(context + ": checkpoint variant " + std::string(name_of(h.meta.variant)) +
                              " does not match configured " + std::string(name_of(config_.variant)));
    }
    const QNetwork::Layout want = QNetwork::layout(config_.variant);
    auto online_ck = nn::deserialize_network<double>(h.online, &want, context + " (online)");
    auto target_ck = nn::deserialize_network<double>(h.target, &want, context + " (target)");
    if (!online_ck.optimizer) r.fail("online network lacks optimizer state");

    Rng rng;
    std::istringstream rng_text(r.text());
    if (!(rng_text >> rng)) r.fail("bad RNG state");

    const std::uint64_t capacity = r.u64();
    const std::uint64_t size = r.u64();
    if (capacity != config_.buffer_capacity) {
        throw ValidationError(context + ": replay capacity " + std::to_string(capacity) +
                              " does not match configured " + std::to_string(config_.buffer_capacity));
    }
    if (size > capacity) r.fail("replay size exceeds capacity");
    ReplayBuffer buffer(config_.buffer_capacity);
    for (std::uint64_t i = 0; i < size; ++i) {
        Transition t;
        t.state = read_state(r);
        const std::uint8_t a = r.u8();
        if (!is_valid_action_index(a)) r.fail("bad action id in replay");
        t.action = action_from_index(a);
        t.reward = r.f64();
        t.next_state = read_state(r);
        t.done = r.u8() != 0;
        buffer.push(t);
    }
    const auto payload = r.blob();
    r.expect_end();

    online_ = QNetwork(config_.variant, std::move(online_ck.segments));
    target_ = QNetwork(config_.variant, std::move(target_ck.segments));
    adam_ = std::move(*online_ck.optimizer);
    buffer_ = std::move(buffer);
    rng_ = rng;
    if (extra) extra->assign(payload.begin(), payload.end());
    return h.meta;
}

PolicySnapshot load_policy(std::span<const std::uint8_t> bytes, const std::string& context) {
    ByteReader r(bytes, context);
    const AgentHeader h = read_header(r);
    const QNetwork::Layout want = QNetwork::layout(h.meta.variant);
    auto online_ck = nn::deserialize_network<double>(h.online, &want, context + " (online)");
    return PolicySnapshot{h.meta, QNetwork(h.meta.variant, std::move(online_ck.segments))};
}

PolicySnapshot load_policy(const std::string& path) {
    const Bytes data = read_file(path);
    return load_policy(data, path);
}

}  // namespace courtforge
