#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "courtforge/actions.hpp"
#include "courtforge/match_state.hpp"
#include "courtforge/rng.hpp"

namespace courtforge {

enum class PointEvent : std::uint8_t { AgentWins, AgentLoses, Continue };

std::string_view name_of(PointEvent e) noexcept;

struct OutcomeTriple {
    double p_win = 0.0;
    double p_lose = 0.0;
    double p_cont = 1.0;

    bool is_normalized(double tol = 1e-9) const noexcept;
    friend bool operator==(const OutcomeTriple&, const OutcomeTriple&) = default;
};

struct ModifierSet {
    double m_opp = 1.0;
    double m_fatigue = 1.0;
    double m_pressure = 1.0;
    double m_rally = 1.0;
};

// Base outcome table plus fatigue constants. `standard()` holds the calibrated
// defaults; a plain-text override can replace them for calibration runs.
struct DynamicsTables {
    std::array<OutcomeTriple, kNumActions> base{};
    std::array<double, kNumActions> intensity{};
    double beta = 0.002;
    double recovery = 0.025;
    double base_increment = 0.020;
    double max_fatigue = 1.0;
    double probability_ceiling = 0.95;

    static const DynamicsTables& standard();

    // Override format, one action per line (# starts a comment):
    //   <action_name> <p_win> <p_lose> <p_cont> [<intensity>]
    // plus optional scalar lines `beta <v>`, `recovery <v>`.
    // Actions not mentioned keep their standard values.
    static DynamicsTables parse(std::istream& in, const std::string& origin);
    static DynamicsTables load(const std::string& path);
};

OutcomeTriple base_outcome(ActionId action,
                           const DynamicsTables& tables = DynamicsTables::standard());

ModifierSet context_modifiers(const MatchState& state, double skill);

OutcomeTriple contextual_outcome(ActionId action, const MatchState& state, double skill,
                                 const DynamicsTables& tables = DynamicsTables::standard());

// Categorical draw. Throws ContractViolation for a triple that is not a simplex.
PointEvent sample_outcome(const OutcomeTriple& triple, Rng& rng);

double update_fatigue(double f, ActionId action, int rally_len,
                      const DynamicsTables& tables = DynamicsTables::standard());

double recover(double f, const DynamicsTables& tables = DynamicsTables::standard());

// Court position and ball depth bookkeeping. Serves and returns reset both
// players to the baseline with a neutral ball; approach_net moves the agent to
// the net; defensive_lob pushes the ball deep and the opponent back; an
// aggressive groundstroke lands short or deep with equal odds.
MatchState advance_tactical_state(MatchState state, ActionId action, Rng& rng);

}  // namespace courtforge
