#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>

#include "courtforge/actions.hpp"
#include "courtforge/dynamics.hpp"
#include "courtforge/match_state.hpp"
#include "courtforge/reward.hpp"
#include "courtforge/rng.hpp"

namespace courtforge {

inline constexpr int kStateDim = 18;

template <typename Scalar>
using StateVectorT = Eigen::Matrix<Scalar, kStateDim, 1>;
using StateVector = StateVectorT<double>;

// Positions of the encoded fields.
namespace state_index {
inline constexpr int p_pts = 0, o_pts = 1, p_games = 2, o_games = 3, p_sets = 4, o_sets = 5;
inline constexpr int serving = 6, deuce = 7, adv_p = 8, adv_o = 9, tiebreak = 10;
inline constexpr int f_p = 11, f_o = 12, ad_side = 13, rally_len = 14;
inline constexpr int pos_p = 15, pos_o = 16, ball_depth = 17;
}  // namespace state_index

enum class Side : std::uint8_t { Agent, Opponent };

struct MatchConfig {
    double opponent_skill = 0.50;
    int best_of = 3;
    int max_steps = 750;
    std::uint64_t seed = 0;
};

struct EnvParams {
    double skill_min = 0.35;
    double skill_max = 0.60;
    bool normalize = false;  // scale the observation for network input
    RewardConfig reward{};
    DynamicsTables tables = DynamicsTables::standard();
};

enum class StepLabel : std::uint8_t { AgentPointWin, AgentPointLoss, Continue, Truncated };

std::string_view name_of(StepLabel l) noexcept;

struct ScoreSnapshot {
    int p_sets = 0, o_sets = 0;
    int p_games = 0, o_games = 0;
    int p_pts = 0, o_pts = 0;
    bool tiebreak = false;
    int tb_p = 0, tb_o = 0;

    static ScoreSnapshot of(const MatchState& s);
    // Game score in tennis notation: "40-30", "Ad-40", "40-40"; tiebreak "TB 5-3".
    std::string points_text() const;
    std::string to_string() const;
};

struct StepResult {
    StateVector state_vec = StateVector::Zero();
    double reward = 0.0;
    bool done = false;
    StepLabel label = StepLabel::Continue;
    PointEvent point_event = PointEvent::Continue;
    bool agent_served = false;  // server of the point this step belonged to
    std::optional<Side> winner;  // set when done
    ScoreSnapshot score;
};

int sets_to_win(int best_of);

ActionSet valid_actions(const MatchState& state);

// Scores one concluded point. Handles deuce/advantage, games, sets, tiebreaks,
// server rotation, per-point fatigue recovery, and resets the rally.
MatchState apply_point_outcome(MatchState state, bool agent_won, int best_of = 3,
                               const DynamicsTables& tables = DynamicsTables::standard());

std::optional<Side> match_winner(const MatchState& state, int best_of);

// Agent wins the game (or tiebreak) if it wins the next point.
bool is_agent_game_point(const MatchState& state);
bool is_agent_break_point(const MatchState& state);

StateVector encode_state(const MatchState& state);
StateVector normalize_state(const StateVector& raw);

// Winner of a match cut off at the step cap: sets, then games in the current
// set, then current points. A full tie goes to the opponent.
Side resolve_truncation(const MatchState& state, int best_of = 3);

class TennisEnv {
public:
    explicit TennisEnv(EnvParams params = {});

    StateVector reset(const MatchConfig& config);

    StepResult step(ActionId action);
    // Same as step() but with the point event supplied instead of sampled.
    StepResult step_with_event(ActionId action, PointEvent event);

    const MatchState& state() const noexcept { return state_; }
    const MatchConfig& config() const noexcept { return config_; }
    const EnvParams& params() const noexcept { return params_; }
    ActionSet valid_actions() const { return courtforge::valid_actions(state_); }
    bool done() const noexcept { return done_; }
    StateVector observation() const;

    // Test hook: replace the internal state of a live episode.
    void set_state(const MatchState& state) { state_ = state; }

private:
    void require_live(ActionId action) const;

    EnvParams params_;
    MatchConfig config_;
    MatchState state_;
    Rng rng_;
    bool done_ = true;
};

}  // namespace courtforge
