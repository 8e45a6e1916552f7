#pragma once

// Minimal dense network: affine layers with ReLU/identity activations,
// reverse-mode gradients over a cached tape, smooth-L1 loss, global-norm
// clipping and Adam. Batches are column-major: one sample per column.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "courtforge/errors.hpp"

namespace courtforge::nn {

enum class Activation : std::uint8_t { Identity = 0, ReLU = 1 };

struct LayerSpec {
    int in_dim = 0;
    int out_dim = 0;
    Activation activation = Activation::Identity;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

std::string to_string(const LayerSpec& spec);

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct DenseLayer {
    Matrix<Scalar> weight;  // out x in
    Vector<Scalar> bias;    // out
    Activation activation = Activation::Identity;

    LayerSpec spec() const {
        return {static_cast<int>(weight.cols()), static_cast<int>(weight.rows()), activation};
    }
};

template <typename Scalar>
struct LayerGradient {
    Matrix<Scalar> weight;
    Vector<Scalar> bias;
};

template <typename Scalar>
using Gradients = std::vector<LayerGradient<Scalar>>;

// Ordered layers of one feed-forward chain. Every mutable access bumps the
// generation counter so tapes recorded against older weights are rejected.
template <typename Scalar>
class ParameterSet {
public:
    ParameterSet() = default;

    explicit ParameterSet(std::vector<DenseLayer<Scalar>> layers) : layers_(std::move(layers)) {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& l = layers_[i];
            if (l.weight.rows() < 1 || l.weight.cols() < 1 || l.bias.size() != l.weight.rows()) {
                throw ContractViolation("ParameterSet: layer " + std::to_string(i) +
                                        " has inconsistent shapes");
            }
            if (i > 0 && layers_[i - 1].weight.rows() != l.weight.cols()) {
                throw ContractViolation("ParameterSet: layer " + std::to_string(i) +
                                        " input does not match previous output");
            }
        }
    }

    ParameterSet(const ParameterSet& other) : layers_(other.layers_), generation_(0) {}
    ParameterSet& operator=(const ParameterSet& other) {
        layers_ = other.layers_;
        ++generation_;
        return *this;
    }
    ParameterSet(ParameterSet&&) noexcept = default;
    ParameterSet& operator=(ParameterSet&& other) noexcept {
        layers_ = std::move(other.layers_);
        ++generation_;
        return *this;
    }

    std::span<const DenseLayer<Scalar>> layers() const noexcept { return layers_; }
    std::span<DenseLayer<Scalar>> mutable_layers() noexcept {
        ++generation_;
        return layers_;
    }
    const DenseLayer<Scalar>& layer(std::size_t i) const { return layers_.at(i); }
    std::size_t size() const noexcept { return layers_.size(); }
    bool empty() const noexcept { return layers_.empty(); }

    int input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
    int output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

    std::vector<LayerSpec> specs() const {
        std::vector<LayerSpec> out;
        out.reserve(layers_.size());
        for (const auto& l : layers_) out.push_back(l.spec());
        return out;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    std::uint64_t generation() const noexcept { return generation_; }

    bool operator==(const ParameterSet& other) const {
        if (layers_.size() != other.layers_.size()) return false;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& a = layers_[i];
            const auto& b = other.layers_[i];
            if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
                a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<DenseLayer<Scalar>> layers_;
    std::uint64_t generation_ = 0;
};

template <typename Scalar>
struct Tape {
    std::vector<Matrix<Scalar>> inputs;  // input to each layer
    std::vector<Matrix<Scalar>> pre;     // pre-activation of each layer
    const ParameterSet<Scalar>* owner = nullptr;
    std::uint64_t generation = 0;
};

template <typename Scalar>
struct ForwardPass {
    Matrix<Scalar> output;
    Tape<Scalar> tape;
};

template <typename Scalar>
struct BackwardPass {
    Gradients<Scalar> grads;
    Matrix<Scalar> input_grad;
};

namespace detail {

template <typename Derived>
void apply_activation(Activation act, Eigen::MatrixBase<Derived>& z) {
    if (act == Activation::ReLU) z = z.cwiseMax(typename Derived::Scalar(0));
}

template <typename Scalar>
void require_input(const ParameterSet<Scalar>& params, Eigen::Index rows) {
    if (params.empty()) throw ContractViolation("forward: empty parameter set");
    if (rows != params.input_dim()) {
        throw ContractViolation("forward: input has " + std::to_string(rows) +
                                " rows, network expects " + std::to_string(params.input_dim()));
    }
}

}  // namespace detail

template <typename Scalar>
ParameterSet<Scalar> init_params(std::span<const LayerSpec> specs, std::mt19937_64& rng) {
    std::vector<DenseLayer<Scalar>> layers;
    layers.reserve(specs.size());
    for (const LayerSpec& s : specs) {
        if (s.in_dim < 1 || s.out_dim < 1) throw ContractViolation("init_params: non-positive dims");
        const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(s.in_dim));
        std::uniform_real_distribution<Scalar> dist(-bound, bound);
        DenseLayer<Scalar> l;
        l.activation = s.activation;
        l.weight.resize(s.out_dim, s.in_dim);
        l.bias.resize(s.out_dim);
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j)
            for (Eigen::Index i = 0; i < l.weight.rows(); ++i) l.weight(i, j) = dist(rng);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = dist(rng);
        layers.push_back(std::move(l));
    }
    return ParameterSet<Scalar>(std::move(layers));
}

// Inference without a tape.
template <typename Scalar>
Matrix<Scalar> predict(const ParameterSet<Scalar>& params, const Matrix<Scalar>& input) {
    detail::require_input(params, input.rows());
    Matrix<Scalar> a = input;
    for (const auto& l : params.layers()) {
        Matrix<Scalar> z(l.weight.rows(), a.cols());
        z.noalias() = l.weight * a;
        z.colwise() += l.bias;
        detail::apply_activation(l.activation, z);
        a = std::move(z);
    }
    return a;
}

template <typename Scalar>
ForwardPass<Scalar> forward(const ParameterSet<Scalar>& params, const Matrix<Scalar>& input) {
    detail::require_input(params, input.rows());
    ForwardPass<Scalar> out;
    out.tape.owner = &params;
    out.tape.generation = params.generation();
    out.tape.inputs.reserve(params.size());
    out.tape.pre.reserve(params.size());
    Matrix<Scalar> a = input;
    for (const auto& l : params.layers()) {
        Matrix<Scalar> z(l.weight.rows(), a.cols());
        z.noalias() = l.weight * a;
        z.colwise() += l.bias;
        out.tape.inputs.push_back(std::move(a));
        out.tape.pre.push_back(z);
        detail::apply_activation(l.activation, z);
        a = std::move(z);
    }
    out.output = std::move(a);
    return out;
}

template <typename Scalar>
BackwardPass<Scalar> backward(const ParameterSet<Scalar>& params, const Tape<Scalar>& tape,
                              const Matrix<Scalar>& output_grad) {
    if (tape.owner != &params || tape.generation != params.generation() ||
        tape.inputs.size() != params.size()) {
        throw ContractViolation("backward: tape was not recorded against these parameters");
    }
    const auto& last = tape.pre.back();
    if (output_grad.rows() != last.rows() || output_grad.cols() != last.cols()) {
        throw ContractViolation("backward: output gradient shape mismatch");
    }
    BackwardPass<Scalar> out;
    out.grads.resize(params.size());
    Matrix<Scalar> delta = output_grad;
    for (std::size_t k = params.size(); k-- > 0;) {
        const auto& l = params.layer(k);
        if (l.activation == Activation::ReLU) {
            delta = (tape.pre[k].array() > Scalar(0)).select(delta, Scalar(0));
        }
        out.grads[k].weight.noalias() = delta * tape.inputs[k].transpose();
        out.grads[k].bias = delta.rowwise().sum();
        Matrix<Scalar> next(l.weight.cols(), delta.cols());
        next.noalias() = l.weight.transpose() * delta;
        delta = std::move(next);
    }
    out.input_grad = std::move(delta);
    return out;
}

template <typename Scalar>
struct LossResult {
    Scalar loss = 0;
    Vector<Scalar> grad;  // d loss / d pred
};

// Smooth L1 with transition at 1, mean over elements.
template <typename Scalar>
LossResult<Scalar> huber_loss(const Vector<Scalar>& pred, const Vector<Scalar>& target) {
    if (pred.size() != target.size() || pred.size() == 0) {
        throw ContractViolation("huber_loss: prediction and target lengths differ or are empty");
    }
    const Scalar n = static_cast<Scalar>(pred.size());
    LossResult<Scalar> out;
    out.grad.resize(pred.size());
    Scalar total = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const Scalar e = pred(i) - target(i);
        const Scalar ae = std::abs(e);
        if (ae <= Scalar(1)) {
            total += Scalar(0.5) * e * e;
            out.grad(i) = e / n;
        } else {
            total += ae - Scalar(0.5);
            out.grad(i) = (e > 0 ? Scalar(1) : Scalar(-1)) / n;
        }
    }
    out.loss = total / n;
    return out;
}

template <typename Scalar>
Gradients<Scalar> zeros_like(const ParameterSet<Scalar>& params) {
    Gradients<Scalar> g(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& l = params.layer(k);
        g[k].weight = Matrix<Scalar>::Zero(l.weight.rows(), l.weight.cols());
        g[k].bias = Vector<Scalar>::Zero(l.bias.size());
    }
    return g;
}

template <typename Scalar>
Scalar squared_norm(const Gradients<Scalar>& g) {
    Scalar s = 0;
    for (const auto& l : g) s += l.weight.squaredNorm() + l.bias.squaredNorm();
    return s;
}

template <typename Scalar>
Scalar global_norm(std::span<const Gradients<Scalar>> groups) {
    Scalar s = 0;
    for (const auto& g : groups) s += squared_norm(g);
    return std::sqrt(s);
}

// Rescales every group by max_norm / norm when the joint l2 norm exceeds
// max_norm. Returns the norm measured before clipping.
template <typename Scalar>
Scalar clip_gradients(std::span<Gradients<Scalar>> groups, Scalar max_norm) {
    const Scalar norm = global_norm(std::span<const Gradients<Scalar>>(groups));
    if (norm > max_norm && norm > 0) {
        const Scalar scale = max_norm / norm;
        for (auto& g : groups) {
            for (auto& l : g) {
                l.weight *= scale;
                l.bias *= scale;
            }
        }
    }
    return norm;
}

template <typename Scalar>
Scalar clip_gradients(Gradients<Scalar>& grads, Scalar max_norm) {
    return clip_gradients(std::span<Gradients<Scalar>>(&grads, 1), max_norm);
}

struct AdamConfig {
    double learning_rate = 0.0005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
    Gradients<Scalar> m;
    Gradients<Scalar> v;
    std::uint64_t t = 0;

    static AdamState zeros_for(const ParameterSet<Scalar>& params) {
        return AdamState{zeros_like(params), zeros_like(params), 0};
    }

    bool operator==(const AdamState& o) const {
        if (t != o.t || m.size() != o.m.size() || v.size() != o.v.size()) return false;
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (m[k].weight != o.m[k].weight || m[k].bias != o.m[k].bias ||
                v[k].weight != o.v[k].weight || v[k].bias != o.v[k].bias) {
                return false;
            }
        }
        return true;
    }
};

// One bias-corrected Adam update; increments state.t.
template <typename Scalar>
void adam_step(ParameterSet<Scalar>& params, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, const AdamConfig& cfg = {}) {
    if (grads.size() != params.size() || state.m.size() != params.size() ||
        state.v.size() != params.size()) {
        throw ContractViolation("adam_step: gradient/state layout does not match parameters");
    }
    state.t += 1;
    const Scalar b1 = static_cast<Scalar>(cfg.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg.beta2);
    const Scalar lr = static_cast<Scalar>(cfg.learning_rate);
    const Scalar eps = static_cast<Scalar>(cfg.epsilon);
    const Scalar t = static_cast<Scalar>(state.t);
    const Scalar correction1 = Scalar(1) - std::pow(b1, t);
    const Scalar correction2 = Scalar(1) - std::pow(b2, t);

    auto layers = params.mutable_layers();
    const auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = b1 * m + (Scalar(1) - b1) * g;
        v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / correction1) /
                         ((v.array() / correction2).sqrt() + eps);
    };
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (grads[k].weight.rows() != layers[k].weight.rows() ||
            grads[k].weight.cols() != layers[k].weight.cols() ||
            grads[k].bias.size() != layers[k].bias.size()) {
            throw ContractViolation("adam_step: gradient shape mismatch at layer " +
                                    std::to_string(k));
        }
        update(layers[k].weight, grads[k].weight, state.m[k].weight, state.v[k].weight);
        update(layers[k].bias, grads[k].bias, state.m[k].bias, state.v[k].bias);
    }
}

inline std::string to_string(const LayerSpec& spec) {
    return std::to_string(spec.in_dim) + "->" + std::to_string(spec.out_dim) +
           (spec.activation == Activation::ReLU ? " relu" : " identity");
}

}  // namespace courtforge::nn
