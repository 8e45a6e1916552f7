#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string_view>

namespace courtforge {

inline constexpr int kNumActions = 10;

enum class ActionId : std::uint8_t {
    ServeFlatWide = 0,
    ServeFlatT = 1,
    ServeKickBody = 2,
    ReturnAggressive = 3,
    ReturnNeutral = 4,
    ReturnBlock = 5,
    RallyAggressive = 6,
    RallyNeutral = 7,
    ApproachNet = 8,
    DefensiveLob = 9,
};

enum class Phase : std::uint8_t { Serve, Return, Rally };

constexpr int index_of(ActionId a) noexcept { return static_cast<int>(a); }

constexpr ActionId action_from_index(int i) noexcept { return static_cast<ActionId>(i); }

constexpr bool is_valid_action_index(int i) noexcept { return i >= 0 && i < kNumActions; }

constexpr Phase phase_of(ActionId a) noexcept {
    const int i = index_of(a);
    if (i <= 2) return Phase::Serve;
    if (i <= 5) return Phase::Return;
    return Phase::Rally;
}

inline constexpr std::array<std::string_view, kNumActions> kActionNames = {
    "serve_flat_wide",   "serve_flat_T",   "serve_kick_body", "return_aggressive",
    "return_neutral",    "return_block",   "rally_aggressive", "rally_neutral",
    "approach_net",      "defensive_lob",
};

constexpr std::string_view name_of(ActionId a) noexcept { return kActionNames[index_of(a)]; }

constexpr std::string_view name_of(Phase p) noexcept {
    switch (p) {
        case Phase::Serve: return "serve";
        case Phase::Return: return "return";
        case Phase::Rally: return "rally";
    }
    return "?";
}

inline std::optional<ActionId> action_from_name(std::string_view name) noexcept {
    for (int i = 0; i < kNumActions; ++i) {
        if (kActionNames[i] == name) return action_from_index(i);
    }
    return std::nullopt;
}

// High-risk / high-reward actions. These earn the winner bonus and the reduced
// error penalty in the reward function.
constexpr bool is_aggressive(ActionId a) noexcept {
    switch (a) {
        case ActionId::ServeFlatWide:
        case ActionId::ServeFlatT:
        case ActionId::ReturnAggressive:
        case ActionId::RallyAggressive:
        case ActionId::ApproachNet:
            return true;
        default:
            return false;
    }
}

// Fixed-capacity set of action ids, ordered by id.
class ActionSet {
public:
    constexpr ActionSet() = default;

    static constexpr ActionSet for_phase(Phase p) noexcept {
        ActionSet s;
        switch (p) {
            case Phase::Serve: s.add_range(0, 3); break;
            case Phase::Return: s.add_range(3, 6); break;
            case Phase::Rally: s.add_range(6, 10); break;
        }
        return s;
    }

    constexpr bool contains(ActionId a) const noexcept { return (mask_ >> index_of(a)) & 1u; }
    constexpr bool contains_index(int i) const noexcept {
        return is_valid_action_index(i) && ((mask_ >> i) & 1u);
    }
    constexpr int size() const noexcept { return std::popcount(mask_); }
    constexpr bool empty() const noexcept { return mask_ == 0; }
    constexpr std::uint16_t mask() const noexcept { return mask_; }

    constexpr void add(ActionId a) noexcept { mask_ |= static_cast<std::uint16_t>(1u << index_of(a)); }

    // k-th member in id order; k must be < size().
    constexpr ActionId nth(int k) const noexcept {
        for (int i = 0; i < kNumActions; ++i) {
            if ((mask_ >> i) & 1u) {
                if (k == 0) return action_from_index(i);
                --k;
            }
        }
        return action_from_index(kNumActions - 1);
    }

    friend constexpr bool operator==(ActionSet, ActionSet) = default;

private:
    constexpr void add_range(int lo, int hi) noexcept {
        for (int i = lo; i < hi; ++i) mask_ |= static_cast<std::uint16_t>(1u << i);
    }

    std::uint16_t mask_ = 0;
};

}  // namespace courtforge
