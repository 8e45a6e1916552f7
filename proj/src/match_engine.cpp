#include "courtforge/match_engine.hpp"

#include <algorithm>
#include <sstream>

#include "courtforge/errors.hpp"

namespace courtforge {

std::string_view name_of(StepLabel l) noexcept {
    switch (l) {
        case StepLabel::AgentPointWin: return "AgentPointWin";
        case StepLabel::AgentPointLoss: return "AgentPointLoss";
        case StepLabel::Continue: return "Continue";
        case StepLabel::Truncated: return "Truncated";
    }
    return "?";
}

ScoreSnapshot ScoreSnapshot::of(const MatchState& s) {
    return ScoreSnapshot{s.p_sets, s.o_sets, s.p_games, s.o_games, s.p_pts,
                         s.o_pts,  s.tiebreak, s.tb_p, s.tb_o};
}

std::string ScoreSnapshot::points_text() const {
    if (tiebreak) return "TB " + std::to_string(tb_p) + "-" + std::to_string(tb_o);
    static constexpr const char* kCalls[] = {"0", "15", "30", "40", "Ad"};
    if (p_pts == 4) return "Ad-40";
    if (o_pts == 4) return "40-Ad";
    return std::string(kCalls[p_pts]) + "-" + kCalls[o_pts];
}

std::string ScoreSnapshot::to_string() const {
    std::ostringstream os;
    os << "sets " << p_sets << "-" << o_sets << " games " << p_games << "-" << o_games << " "
       << points_text();
    return os.str();
}

int sets_to_win(int best_of) { return (best_of + 1) / 2; }

ActionSet valid_actions(const MatchState& state) {
    if (state.rally_len > 0) return ActionSet::for_phase(Phase::Rally);
    return ActionSet::for_phase(state.serving ? Phase::Serve : Phase::Return);
}

namespace {

// Tiebreak point k (0-based): first server takes point 0, then each side
// serves two in a row.
bool tiebreak_server_is_agent(bool first_server_agent, int points_played) {
    const bool first_serves = ((points_played + 1) / 2) % 2 == 0;
    return first_serves ? first_server_agent : !first_server_agent;
}

void sync_flags(MatchState& s) {
    s.deuce = !s.tiebreak && s.p_pts == 3 && s.o_pts == 3;
    s.adv_p = !s.tiebreak && s.p_pts == 4;
    s.adv_o = !s.tiebreak && s.o_pts == 4;
    s.ad_side = s.tiebreak ? ((s.tb_p + s.tb_o) % 2 == 1) : ((s.p_pts + s.o_pts) % 2 == 1);
}

void award_set(MatchState& s, bool agent) {
    (agent ? s.p_sets : s.o_sets) += 1;
    s.p_games = 0;
    s.o_games = 0;
}

// Game over; `s.serving` still names the server of the finished game.
void award_game(MatchState& s, bool agent) {
    (agent ? s.p_games : s.o_games) += 1;
    s.p_pts = 0;
    s.o_pts = 0;
    s.serving = !s.serving;

    const int mine = s.p_games, theirs = s.o_games;
    if ((mine >= 6 || theirs >= 6) && std::abs(mine - theirs) >= 2) {
        award_set(s, mine > theirs);
    } else if (mine == 6 && theirs == 6) {
        s.tiebreak = true;
        s.tb_p = 0;
        s.tb_o = 0;
        s.tb_first_server_agent = s.serving;
    }
}

void score_regular_point(MatchState& s, bool agent_won) {
    int& winner = agent_won ? s.p_pts : s.o_pts;
    int& loser = agent_won ? s.o_pts : s.p_pts;
    if (loser == 4) {
        loser = 3;  // advantage cancelled, back to deuce
    } else if (winner == 4 || (winner == 3 && loser <= 2)) {
        award_game(s, agent_won);
    } else {
        ++winner;  // includes 3-3 -> advantage (4-3)
    }
}

void score_tiebreak_point(MatchState& s, bool agent_won) {
    (agent_won ? s.tb_p : s.tb_o) += 1;
    const int lead = s.tb_p - s.tb_o;
    if ((s.tb_p >= 7 || s.tb_o >= 7) && std::abs(lead) >= 2) {
        const bool agent = lead > 0;
        (agent ? s.p_games : s.o_games) += 1;  // 7-6
        s.tiebreak = false;
        s.tb_p = 0;
        s.tb_o = 0;
        s.serving = !s.tb_first_server_agent;
        award_set(s, agent);
        return;
    }
    s.serving = tiebreak_server_is_agent(s.tb_first_server_agent, s.tb_p + s.tb_o);
}

}  // namespace

MatchState apply_point_outcome(MatchState s, bool agent_won, int best_of,
                               const DynamicsTables& tables) {
    (void)best_of;  // sets simply stop accumulating once the caller sees a winner
    if (s.tiebreak) {
        score_tiebreak_point(s, agent_won);
    } else {
        score_regular_point(s, agent_won);
    }
    sync_flags(s);
    s.f_p = recover(s.f_p, tables);
    s.f_o = recover(s.f_o, tables);
    s.rally_len = 0;
    return s;
}

std::optional<Side> match_winner(const MatchState& s, int best_of) {
    const int need = sets_to_win(best_of);
    if (s.p_sets >= need) return Side::Agent;
    if (s.o_sets >= need) return Side::Opponent;
    return std::nullopt;
}

bool is_agent_game_point(const MatchState& s) {
    if (s.tiebreak) return s.tb_p >= 6 && s.tb_p - s.tb_o >= 1;
    return s.p_pts == 4 || (s.p_pts == 3 && s.o_pts <= 2);
}

bool is_agent_break_point(const MatchState& s) {
    return !s.tiebreak && !s.serving && is_agent_game_point(s);
}

StateVector encode_state(const MatchState& s) {
    namespace ix = state_index;
    StateVector v;
    v[ix::p_pts] = s.p_pts;
    v[ix::o_pts] = s.o_pts;
    v[ix::p_games] = s.p_games;
    v[ix::o_games] = s.o_games;
    v[ix::p_sets] = s.p_sets;
    v[ix::o_sets] = s.o_sets;
    v[ix::serving] = s.serving;
    v[ix::deuce] = s.deuce;
    v[ix::adv_p] = s.adv_p;
    v[ix::adv_o] = s.adv_o;
    v[ix::tiebreak] = s.tiebreak;
    v[ix::f_p] = s.f_p;
    v[ix::f_o] = s.f_o;
    v[ix::ad_side] = s.ad_side;
    v[ix::rally_len] = s.rally_len;
    v[ix::pos_p] = static_cast<int>(s.pos_p);
    v[ix::pos_o] = static_cast<int>(s.pos_o);
    v[ix::ball_depth] = static_cast<int>(s.ball_depth);
    return v;
}

StateVector normalize_state(const StateVector& raw) {
    namespace ix = state_index;
    StateVector v = raw;
    v[ix::p_pts] /= 4.0;
    v[ix::o_pts] /= 4.0;
    v[ix::p_games] /= 7.0;
    v[ix::o_games] /= 7.0;
    v[ix::p_sets] /= 2.0;
    v[ix::o_sets] /= 2.0;
    v[ix::rally_len] = std::min(raw[ix::rally_len] / 20.0, 1.0);
    v[ix::pos_p] /= 2.0;
    v[ix::pos_o] /= 2.0;
    v[ix::ball_depth] /= 2.0;
    return v;
}

Side resolve_truncation(const MatchState& s, int best_of) {
    if (match_winner(s, best_of)) {
        throw ContractViolation("resolve_truncation: match is already decided");
    }
    if (s.p_sets != s.o_sets) return s.p_sets > s.o_sets ? Side::Agent : Side::Opponent;
    if (s.p_games != s.o_games) return s.p_games > s.o_games ? Side::Agent : Side::Opponent;
    const int mine = s.tiebreak ? s.tb_p : s.p_pts;
    const int theirs = s.tiebreak ? s.tb_o : s.o_pts;
    return mine > theirs ? Side::Agent : Side::Opponent;
}

TennisEnv::TennisEnv(EnvParams params) : params_(std::move(params)) {
    if (!(params_.skill_min <= params_.skill_max)) {
        throw ValidationError("skill bounds are inverted");
    }
}

StateVector TennisEnv::reset(const MatchConfig& config) {
    if (!(config.opponent_skill >= params_.skill_min &&
          config.opponent_skill <= params_.skill_max)) {
        throw ValidationError("opponent_skill " + std::to_string(config.opponent_skill) +
                              " outside [" + std::to_string(params_.skill_min) + ", " +
                              std::to_string(params_.skill_max) + "]");
    }
    if (config.max_steps < 1) throw ValidationError("max_steps must be >= 1");
    if (config.best_of != 1 && config.best_of != 3) {
        throw ValidationError("best_of must be 1 or 3");
    }
    config_ = config;
    state_ = MatchState{};
    rng_.seed(config.seed);
    done_ = false;
    return observation();
}

StateVector TennisEnv::observation() const {
    const StateVector raw = encode_state(state_);
    return params_.normalize ? normalize_state(raw) : raw;
}

void TennisEnv::require_live(ActionId action) const {
    if (done_) throw ContractViolation("step called on a finished episode; call reset()");
    const ActionSet valid = courtforge::valid_actions(state_);
    if (!valid.contains(action)) {
        const Phase phase = state_.rally_len > 0 ? Phase::Rally
                            : state_.serving     ? Phase::Serve
                                                 : Phase::Return;
        throw ContractViolation("action " + std::string(name_of(action)) +
                                " is not valid in the " + std::string(name_of(phase)) +
                                " phase");
    }
}

StepResult TennisEnv::step(ActionId action) {
    require_live(action);
    const OutcomeTriple triple =
        contextual_outcome(action, state_, config_.opponent_skill, params_.tables);
    return step_with_event(action, sample_outcome(triple, rng_));
}

StepResult TennisEnv::step_with_event(ActionId action, PointEvent event) {
    require_live(action);

    RewardContext ctx;
    ctx.event = event;
    ctx.action = action;
    ctx.rally_len = state_.rally_len;
    ctx.is_game_point = is_agent_game_point(state_);
    ctx.is_break_point = is_agent_break_point(state_);

    StepResult result;
    result.agent_served = state_.serving;
    result.point_event = event;

    state_.f_p = update_fatigue(state_.f_p, action, state_.rally_len, params_.tables);
    state_.f_o = update_fatigue(state_.f_o, action, state_.rally_len, params_.tables);
    state_ = advance_tactical_state(state_, action, rng_);

    if (event == PointEvent::Continue) {
        state_.rally_len += 1;
        result.label = StepLabel::Continue;
    } else {
        const bool agent_won = event == PointEvent::AgentWins;
        if (agent_won && ctx.is_game_point && !state_.tiebreak) {
            ctx.held_serve = state_.serving;
            ctx.broke_serve = !state_.serving;
        }
        state_ = apply_point_outcome(state_, agent_won, config_.best_of, params_.tables);
        result.label = agent_won ? StepLabel::AgentPointWin : StepLabel::AgentPointLoss;
    }
    state_.step_count += 1;

    if (const auto winner = match_winner(state_, config_.best_of)) {
        done_ = true;
        result.winner = winner;
    } else if (state_.step_count >= config_.max_steps) {
        done_ = true;
        ctx.truncated_incomplete = true;
        result.winner = resolve_truncation(state_, config_.best_of);
        result.label = StepLabel::Truncated;
    }

    result.reward = step_reward(ctx, params_.reward);
    result.done = done_;
    result.state_vec = observation();
    result.score = ScoreSnapshot::of(state_);
    return result;
}

}  // namespace courtforge
