#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "courtforge/actions.hpp"
#include "courtforge/agent.hpp"
#include "courtforge/dynamics.hpp"
#include "courtforge/match_engine.hpp"

namespace courtforge {

// One environment step of a logged evaluation match.
struct StepRow {
    int match = 0;
    int step = 0;
    double skill = 0.0;
    ActionId action = ActionId::ServeFlatWide;
    bool agent_served = false;
    PointEvent event = PointEvent::Continue;
    double reward = 0.0;
    bool done = false;
    std::optional<Side> winner;  // set on the final row

    friend bool operator==(const StepRow&, const StepRow&) = default;
};

struct MatchRecord {
    bool won = false;
    double total_reward = 0.0;
    int steps = 0;
    std::array<int, kNumActions> action_counts{};
    int serve_points = 0, serve_won = 0;
    int return_points = 0, return_won = 0;

    friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

// Rows of one match, in step order, folded into a record.
MatchRecord record_from_rows(std::span<const StepRow> rows);

struct ServeReturnStats {
    std::optional<double> serve_win_pct;   // absent when no point was served
    std::optional<double> return_win_pct;  // absent when no point was returned
};

ServeReturnStats serve_return_stats(std::span<const StepRow> rows);

struct EvalReport {
    double skill = 0.0;
    int matches = 0;
    int wins = 0;
    double win_rate = 0.0;
    double reward_mean = 0.0;
    double reward_std = 0.0;  // population std of per-match total reward
    double mean_length = 0.0;
    int serve_points = 0, serve_won = 0;
    int return_points = 0, return_won = 0;
    std::optional<double> serve_win_pct;
    std::optional<double> return_win_pct;
    std::array<int, kNumActions> action_counts{};

    int phase_total(Phase p) const noexcept;
    // Share of `a` among actions of its phase; absent when that phase never ran.
    std::optional<double> share(ActionId a) const noexcept;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport summarize(double skill, std::span<const MatchRecord> records);

struct EvalSetup {
    EnvParams env{.normalize = true};
    int best_of = 3;
    int max_steps = 750;
    int threads = 1;
};

std::uint64_t match_seed(std::uint64_t seed, int match) noexcept;
std::uint64_t sweep_seed(std::uint64_t seed, int skill_index) noexcept;

// Plays one greedy match and returns its rows.
std::vector<StepRow> play_greedy_match(const QNetwork& net, const EvalSetup& setup, double skill,
                                       std::uint64_t seed, int match_index);

// n greedy matches at a fixed skill. Match i is seeded from match_seed(seed, i).
// When `log` is given it receives every row in match order.
EvalReport evaluate(const QNetwork& net, const EvalSetup& setup, double skill, int n_matches,
                    std::uint64_t seed, std::vector<StepRow>* log = nullptr);

std::vector<EvalReport> skill_sweep(const QNetwork& net, const EvalSetup& setup,
                                    std::span<const double> skills, int n_matches, std::uint64_t seed,
                                    std::vector<StepRow>* log = nullptr);

// Rebuilds per-skill reports from logged rows; skills appear in first-seen order.
std::vector<EvalReport> reports_from_log(std::span<const StepRow> rows);

struct DefensiveShares {
    std::optional<double> return_block;   // share of return_block among return actions
    std::optional<double> defensive_lob;  // share of defensive_lob among rally actions
};

DefensiveShares defensive_shares(const std::array<int, kNumActions>& counts);

struct DefensiveBiasRow {
    double skill = 0.0;
    DefensiveShares shares;
    std::optional<double> reference_block;
    std::optional<double> reference_lob;
    std::optional<double> delta_block;
    std::optional<double> delta_lob;
};

// Published shares for the skills where they exist, as fractions.
std::optional<std::pair<double, double>> reference_defensive_shares(double skill) noexcept;

std::vector<DefensiveBiasRow> defensive_bias_report(std::span<const EvalReport> reports);

}  // namespace courtforge
