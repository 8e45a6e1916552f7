#include "courtforge/reward.hpp"

#include "courtforge/errors.hpp"

namespace courtforge {

double point_won_reward(const RewardContext& ctx, const RewardConfig& cfg) {
    if (ctx.event != PointEvent::AgentWins) {
        throw ContractViolation("point_won_reward: event is not AgentWins");
    }
    double r = cfg.win_base;
    if (ctx.is_game_point || ctx.is_break_point) r += cfg.bonus_critical;
    if (ctx.broke_serve) r += cfg.bonus_break;
    if (ctx.held_serve) r += cfg.bonus_hold;
    if (ctx.rally_len > cfg.rally_bonus_threshold) r += cfg.bonus_rally;
    if (is_aggressive(ctx.action)) r += cfg.bonus_aggressive;
    return r;
}

double point_lost_reward(const RewardContext& ctx, const RewardConfig& cfg) {
    if (ctx.event != PointEvent::AgentLoses) {
        throw ContractViolation("point_lost_reward: event is not AgentLoses");
    }
    return cfg.lose_base + (is_aggressive(ctx.action) ? cfg.offset_aggressive : 0.0);
}

double continuation_reward(const RewardConfig& cfg) { return cfg.continue_reward; }

double truncation_penalty(const RewardConfig& cfg) { return cfg.truncation_penalty; }

double step_reward(const RewardContext& ctx, const RewardConfig& cfg) {
    double r = 0.0;
    switch (ctx.event) {
        case PointEvent::AgentWins: r = point_won_reward(ctx, cfg); break;
        case PointEvent::AgentLoses: r = point_lost_reward(ctx, cfg); break;
        case PointEvent::Continue: r = continuation_reward(cfg); break;
    }
    if (ctx.truncated_incomplete) r += truncation_penalty(cfg);
    return r;
}

}  // namespace courtforge
