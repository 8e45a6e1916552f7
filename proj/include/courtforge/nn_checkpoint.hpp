#pragma once

// Network checkpoint layout (all integers little-endian):
//   "CFNN"  u32 version
//   u32 segment count; per segment: u32 layer count; per layer: u32 in, u32 out, u8 activation
//   f64 payload: per segment, per layer: weight row-major (out x in), then bias
//   u8 has_optimizer; if set, per segment: u64 t; per layer: m.weight m.bias v.weight v.bias
//   u64 FNV-1a checksum of all preceding bytes

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtforge/byte_io.hpp"
#include "courtforge/errors.hpp"
#include "courtforge/nn.hpp"

namespace courtforge::nn {

inline constexpr std::string_view kNetworkMagic = "CFNN";
inline constexpr std::uint32_t kNetworkFormatVersion = 1;

template <typename Scalar>
struct NetworkCheckpoint {
    std::vector<ParameterSet<Scalar>> segments;
    std::optional<std::vector<AdamState<Scalar>>> optimizer;
};

namespace detail {

template <typename Derived>
void write_matrix(ByteWriter& w, const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(static_cast<double>(m(i, j)));
}

template <typename Derived>
void read_matrix(ByteReader& r, Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = r.f64();
            if (!std::isfinite(v)) r.fail("non-finite parameter value");
            m(i, j) = static_cast<Scalar>(v);
        }
}

}  // namespace detail

template <typename Scalar>
Bytes serialize_network(const NetworkCheckpoint<Scalar>& ck) {
    ByteWriter w;
    w.magic(kNetworkMagic);
    w.u32(kNetworkFormatVersion);
    w.u32(static_cast<std::uint32_t>(ck.segments.size()));
    for (const auto& seg : ck.segments) {
        w.u32(static_cast<std::uint32_t>(seg.size()));
        for (const LayerSpec& s : seg.specs()) {
            w.u32(static_cast<std::uint32_t>(s.in_dim));
            w.u32(static_cast<std::uint32_t>(s.out_dim));
            w.u8(static_cast<std::uint8_t>(s.activation));
        }
    }
    for (const auto& seg : ck.segments) {
        for (const auto& l : seg.layers()) {
            detail::write_matrix(w, l.weight);
            detail::write_matrix(w, l.bias);
        }
    }
    w.u8(ck.optimizer ? 1 : 0);
    if (ck.optimizer) {
        if (ck.optimizer->size() != ck.segments.size()) {
            throw ContractViolation("serialize_network: optimizer state count != segment count");
        }
        for (const auto& st : *ck.optimizer) {
            w.u64(st.t);
            for (std::size_t k = 0; k < st.m.size(); ++k) {
                detail::write_matrix(w, st.m[k].weight);
                detail::write_matrix(w, st.m[k].bias);
                detail::write_matrix(w, st.v[k].weight);
                detail::write_matrix(w, st.v[k].bias);
            }
        }
    }
    w.seal();
    return w.take();
}

// `expected`, when given, is the layer layout the caller requires; any
// mismatch is a ValidationError naming the first differing layer.
template <typename Scalar>
NetworkCheckpoint<Scalar> deserialize_network(
    std::span<const std::uint8_t> bytes,
    const std::vector<std::vector<LayerSpec>>* expected = nullptr,
    const std::string& context = "network checkpoint") {
    ByteReader r(bytes, context);
    r.verify_seal();
    r.expect_magic(kNetworkMagic);
    const std::uint32_t version = r.u32();
    if (version != kNetworkFormatVersion) {
        r.fail("unsupported format version " + std::to_string(version) + " (expected " +
               std::to_string(kNetworkFormatVersion) + ")");
    }
    const std::uint32_t n_segments = r.u32();
    if (n_segments > 64) r.fail("implausible segment count");
    std::vector<std::vector<LayerSpec>> layout(n_segments);
    for (auto& seg : layout) {
        const std::uint32_t n_layers = r.u32();
        if (n_layers > 1024) r.fail("implausible layer count");
        for (std::uint32_t k = 0; k < n_layers; ++k) {
            LayerSpec s;
            s.in_dim = static_cast<int>(r.u32());
            s.out_dim = static_cast<int>(r.u32());
            const std::uint8_t act = r.u8();
            if (act > 1) r.fail("unknown activation code");
            s.activation = static_cast<Activation>(act);
            if (s.in_dim < 1 || s.out_dim < 1 || s.in_dim > (1 << 20) || s.out_dim > (1 << 20)) {
                r.fail("bad layer dimensions");
            }
            seg.push_back(s);
        }
    }
    if (expected) {
        if (expected->size() != layout.size()) {
            throw ValidationError(context + ": checkpoint has " + std::to_string(layout.size()) +
                                  " network segments, expected " + std::to_string(expected->size()));
        }
        for (std::size_t i = 0; i < layout.size(); ++i) {
            const auto& want = (*expected)[i];
            const auto& got = layout[i];
            const std::size_t n = std::max(want.size(), got.size());
            for (std::size_t k = 0; k < n; ++k) {
                const std::string w = k < want.size() ? to_string(want[k]) : "<none>";
                const std::string g = k < got.size() ? to_string(got[k]) : "<none>";
                if (w != g) {
                    throw ValidationError(context + ": segment " + std::to_string(i) + " layer " +
                                          std::to_string(k) + " is " + g + ", expected " + w);
                }
            }
        }
    }

    NetworkCheckpoint<Scalar> ck;
    for (const auto& seg : layout) {
        std::vector<DenseLayer<Scalar>> layers;
        for (const LayerSpec& s : seg) {
            DenseLayer<Scalar> l;
            l.activation = s.activation;
            l.weight.resize(s.out_dim, s.in_dim);
            l.bias.resize(s.out_dim);
            detail::read_matrix(r, l.weight);
            detail::read_matrix(r, l.bias);
            layers.push_back(std::move(l));
        }
        try {
            ck.segments.emplace_back(std::move(layers));
        } catch (const ContractViolation& e) {
            r.fail(e.what());
        }
    }
    const std::uint8_t has_opt = r.u8();
    if (has_opt > 1) r.fail("bad optimizer flag");
    if (has_opt) {
        std::vector<AdamState<Scalar>> states;
        for (const auto& seg : ck.segments) {
            AdamState<Scalar> st = AdamState<Scalar>::zeros_for(seg);
            st.t = r.u64();
            for (std::size_t k = 0; k < st.m.size(); ++k) {
                detail::read_matrix(r, st.m[k].weight);
                detail::read_matrix(r, st.m[k].bias);
                detail::read_matrix(r, st.v[k].weight);
                detail::read_matrix(r, st.v[k].bias);
            }
            states.push_back(std::move(st));
        }
        ck.optimizer = std::move(states);
    }
    r.expect_end();
    return ck;
}

template <typename Scalar>
void save_network(const std::string& path, const NetworkCheckpoint<Scalar>& ck) {
    write_file_atomic(path, serialize_network(ck));
}

template <typename Scalar>
NetworkCheckpoint<Scalar> load_network(const std::string& path,
                                       const std::vector<std::vector<LayerSpec>>* expected = nullptr) {
    const Bytes data = read_file(path);
    return deserialize_network<Scalar>(data, expected, path);
}

}  // namespace courtforge::nn
