#include "courtforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "courtforge/errors.hpp"

namespace courtforge {

std::string_view name_of(PointEvent e) noexcept {
    switch (e) {
        case PointEvent::AgentWins: return "AgentWins";
        case PointEvent::AgentLoses: return "AgentLoses";
        case PointEvent::Continue: return "Continue";
    }
    return "?";
}

bool OutcomeTriple::is_normalized(double tol) const noexcept {
    const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    return in_unit(p_win) && in_unit(p_lose) && in_unit(p_cont) &&
           std::abs(p_win + p_lose + p_cont - 1.0) <= tol;
}

namespace {

DynamicsTables make_standard() {
    DynamicsTables t;
    // p_cont is written as 1 - p_win - p_lose so the golden values are exactly
    // what that expression produces in double precision.
    const auto row = [](double w, double l) { return OutcomeTriple{w, l, 1.0 - w - l}; };
    t.base = {
        row(0.42, 0.13),  // serve_flat_wide
        row(0.40, 0.12),  // serve_flat_T
        row(0.28, 0.08),  // serve_kick_body
        row(0.20, 0.18),  // return_aggressive
        row(0.14, 0.10),  // return_neutral
        row(0.09, 0.06),  // return_block
        row(0.16, 0.15),  // rally_aggressive
        row(0.09, 0.07),  // rally_neutral
        row(0.14, 0.13),  // approach_net
        row(0.06, 0.05),  // defensive_lob
    };
    t.intensity = {0.022, 0.022, 0.018, 0.024, 0.020, 0.016, 0.028, 0.020, 0.030, 0.018};
    return t;
}

void require_probability(double p, const std::string& where) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(where + ": probability outside [0,1]");
}

}  // namespace

const DynamicsTables& DynamicsTables::standard() {
    static const DynamicsTables tables = make_standard();
    return tables;
}

DynamicsTables DynamicsTables::parse(std::istream& in, const std::string& origin) {
    DynamicsTables t = standard();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string key;
        if (!(row >> key)) continue;
        const std::string where = origin + ":" + std::to_string(line_no);

        if (key == "beta" || key == "recovery") {
            double v = 0.0;
            if (!(row >> v) || v < 0.0) throw ValidationError(where + ": bad value for " + key);
            (key == "beta" ? t.beta : t.recovery) = v;
            continue;
        }
        const auto action = action_from_name(key);
        if (!action) throw ValidationError(where + ": unknown action '" + key + "'");

        double w = 0.0, l = 0.0, c = 0.0;
        if (!(row >> w >> l >> c)) throw ValidationError(where + ": expected p_win p_lose p_cont");
        require_probability(w, where);
        require_probability(l, where);
        require_probability(c, where);
        if (std::abs(w + l + c - 1.0) > 1e-6) {
            throw ValidationError(where + ": p_win + p_lose + p_cont must equal 1");
        }
        t.base[index_of(*action)] = OutcomeTriple{w, l, 1.0 - w - l};
        double alpha = 0.0;
        if (row >> alpha) {
            if (alpha < 0.0 || alpha > 1.0) throw ValidationError(where + ": bad intensity");
            t.intensity[index_of(*action)] = alpha;
        }
    }
    return t;
}

DynamicsTables DynamicsTables::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open dynamics table");
    return parse(in, path);
}

OutcomeTriple base_outcome(ActionId action, const DynamicsTables& tables) {
    return tables.base[index_of(action)];
}

ModifierSet context_modifiers(const MatchState& state, double skill) {
    ModifierSet m;
    m.m_opp = 1.0 - 0.5 * (skill - 0.5);
    m.m_fatigue = 1.0 - 0.3 * (state.f_p - state.f_o);
    m.m_pressure = (state.p_pts >= 3 && state.o_pts >= 3) ? 0.95 : 1.0;
    if (state.rally_len > 15) {
        m.m_rally = 0.95;
    } else if (state.rally_len > 8) {
        m.m_rally = 0.98;
    } else {
        m.m_rally = 1.0;
    }
    return m;
}

OutcomeTriple contextual_outcome(ActionId action, const MatchState& state, double skill,
                                 const DynamicsTables& tables) {
    const OutcomeTriple base = base_outcome(action, tables);
    const ModifierSet m = context_modifiers(state, skill);

    // Skill and fatigue push the error probability by the mirrored factor;
    // pressure and rally length act on the winner probability only.
    double win = base.p_win * m.m_opp * m.m_fatigue * m.m_pressure * m.m_rally;
    double lose = base.p_lose * (2.0 - m.m_opp) * (2.0 - m.m_fatigue);
    const double ceiling = tables.probability_ceiling;
    win = std::clamp(win, 0.0, ceiling);
    lose = std::clamp(lose, 0.0, ceiling);

    if (win + lose > 1.0) {
        const double total = win + lose;
        win /= total;
        lose = 1.0 - win;
        return OutcomeTriple{win, lose, 0.0};
    }
    return OutcomeTriple{win, lose, 1.0 - win - lose};
}

PointEvent sample_outcome(const OutcomeTriple& triple, Rng& rng) {
    if (!triple.is_normalized()) {
        throw ContractViolation("sample_outcome: outcome triple is not a probability simplex");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    if (u < triple.p_win) return PointEvent::AgentWins;
    if (u < triple.p_win + triple.p_lose) return PointEvent::AgentLoses;
    return PointEvent::Continue;
}

double update_fatigue(double f, ActionId action, int rally_len, const DynamicsTables& tables) {
    return std::min(tables.max_fatigue,
                    f + tables.intensity[index_of(action)] + tables.beta * rally_len);
}

double recover(double f, const DynamicsTables& tables) {
    return std::max(0.0, f - tables.recovery);
}

MatchState advance_tactical_state(MatchState state, ActionId action, Rng& rng) {
    switch (phase_of(action)) {
        case Phase::Serve:
        case Phase::Return:
            state.pos_p = CourtPosition::Baseline;
            state.pos_o = CourtPosition::Baseline;
            state.ball_depth = BallDepth::Neutral;
            return state;
        case Phase::Rally:
            break;
    }
    switch (action) {
        case ActionId::ApproachNet:
            state.pos_p = CourtPosition::Net;
            break;
        case ActionId::DefensiveLob:
            state.ball_depth = BallDepth::Deep;
            state.pos_o = CourtPosition::Baseline;
            break;
        case ActionId::RallyAggressive: {
            std::bernoulli_distribution deep(0.5);
            state.ball_depth = deep(rng) ? BallDepth::Deep : BallDepth::Short;
            break;
        }
        default:
            break;
    }
    return state;
}

}  // namespace courtforge
