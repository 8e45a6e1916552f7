#pragma once

#include "courtforge/actions.hpp"
#include "courtforge/dynamics.hpp"

namespace courtforge {

// Reward constants. Defaults are the calibrated values; every field is
// exposed through the run config.
struct RewardConfig {
    double win_base = 1.0;
    double bonus_critical = 0.7;    // game point or break point won
    double bonus_break = 0.8;       // break point converted
    double bonus_hold = 0.3;        // point that holds serve
    double bonus_rally = 0.4;       // rally longer than rally_bonus_threshold
    int rally_bonus_threshold = 6;
    double bonus_aggressive = 0.4;  // winner struck with an aggressive action
    double lose_base = -1.0;
    double offset_aggressive = 0.2; // softer penalty for aggressive errors
    double continue_reward = 0.05;
    double truncation_penalty = -2.0;
};

struct RewardContext {
    PointEvent event = PointEvent::Continue;
    ActionId action = ActionId::RallyNeutral;
    int rally_len = 0;
    // Winning this point would win the game for the agent (tiebreak included).
    bool is_game_point = false;
    // Game point for the agent while the opponent serves.
    bool is_break_point = false;
    // The point concluded and held the agent's serve.
    bool held_serve = false;
    // The point concluded and broke the opponent's serve.
    bool broke_serve = false;
    bool truncated_incomplete = false;
};

double point_won_reward(const RewardContext& ctx, const RewardConfig& cfg = {});
double point_lost_reward(const RewardContext& ctx, const RewardConfig& cfg = {});
double continuation_reward(const RewardConfig& cfg = {});
double truncation_penalty(const RewardConfig& cfg = {});

// Dispatches on ctx.event and adds the truncation penalty when flagged.
double step_reward(const RewardContext& ctx, const RewardConfig& cfg = {});

}  // namespace courtforge
