#include "courtforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "courtforge/errors.hpp"

namespace courtforge {

MatchRecord record_from_rows(std::span<const StepRow> rows) {
    MatchRecord r;
    for (const StepRow& row : rows) {
        r.total_reward += row.reward;
        ++r.action_counts[index_of(row.action)];
        ++r.steps;
        if (row.event != PointEvent::Continue) {
            const bool won = row.event == PointEvent::AgentWins;
            if (row.agent_served) {
                ++r.serve_points;
                r.serve_won += won;
            } else {
                ++r.return_points;
                r.return_won += won;
            }
        }
        if (row.done) r.won = row.winner == Side::Agent;
    }
    return r;
}

ServeReturnStats serve_return_stats(std::span<const StepRow> rows) {
    const MatchRecord r = record_from_rows(rows);
    ServeReturnStats s;
    if (r.serve_points > 0) s.serve_win_pct = double(r.serve_won) / r.serve_points;
    if (r.return_points > 0) s.return_win_pct = double(r.return_won) / r.return_points;
    return s;
}

int EvalReport::phase_total(Phase p) const noexcept {
    int total = 0;
    for (int i = 0; i < kNumActions; ++i) {
        if (phase_of(action_from_index(i)) == p) total += action_counts[i];
    }
    return total;
}

std::optional<double> EvalReport::share(ActionId a) const noexcept {
    const int total = phase_total(phase_of(a));
    if (total == 0) return std::nullopt;
    return double(action_counts[index_of(a)]) / total;
}

EvalReport summarize(double skill, std::span<const MatchRecord> records) {
    EvalReport rep;
    rep.skill = skill;
    rep.matches = static_cast<int>(records.size());
    if (records.empty()) return rep;
    double reward_sum = 0.0, length_sum = 0.0;
    for (const MatchRecord& m : records) {
        rep.wins += m.won;
        reward_sum += m.total_reward;
        length_sum += m.steps;
        rep.serve_points += m.serve_points;
        rep.serve_won += m.serve_won;
        rep.return_points += m.return_points;
        rep.return_won += m.return_won;
        for (int i = 0; i < kNumActions; ++i) rep.action_counts[i] += m.action_counts[i];
    }
    const double n = static_cast<double>(records.size());
    rep.win_rate = rep.wins / n;
    rep.reward_mean = reward_sum / n;
    rep.mean_length = length_sum / n;
    double sq = 0.0;
    for (const MatchRecord& m : records) sq += (m.total_reward - rep.reward_mean) * (m.total_reward - rep.reward_mean);
    rep.reward_std = std::sqrt(sq / n);
    if (rep.serve_points > 0) rep.serve_win_pct = double(rep.serve_won) / rep.serve_points;
    if (rep.return_points > 0) rep.return_win_pct = double(rep.return_won) / rep.return_points;
    return rep;
}

std::uint64_t match_seed(std::uint64_t seed, int match) noexcept {
    return derive_seed(seed, 3, static_cast<std::uint64_t>(match));
}

std::uint64_t sweep_seed(std::uint64_t seed, int skill_index) noexcept {
    return derive_seed(seed, 4, static_cast<std::uint64_t>(skill_index));
}

std::vector<StepRow> play_greedy_match(const QNetwork& net, const EvalSetup& setup, double skill,
                                       std::uint64_t seed, int match_index) {
    TennisEnv env(setup.env);
    StateVector obs = env.reset({.opponent_skill = skill,
                                 .best_of = setup.best_of,
                                 .max_steps = setup.max_steps,
                                 .seed = match_seed(seed, match_index)});
    std::vector<StepRow> rows;
    rows.reserve(static_cast<std::size_t>(setup.max_steps));
    while (!env.done()) {
        const ActionSet valid = env.valid_actions();
        const ActionId a = greedy_action(net.q_values(obs), valid);
        const StepResult r = env.step(a);
        rows.push_back({.match = match_index,
                        .step = static_cast<int>(rows.size()),
                        .skill = skill,
                        .action = a,
                        .agent_served = r.agent_served,
                        .event = r.point_event,
                        .reward = r.reward,
                        .done = r.done,
                        .winner = r.winner});
        obs = r.state_vec;
    }
    return rows;
}

EvalReport evaluate(const QNetwork& net, const EvalSetup& setup, double skill, int n_matches,
                    std::uint64_t seed, std::vector<StepRow>* log) {
    if (n_matches < 1) throw ValidationError("evaluate: n_matches must be >= 1");
    if (setup.threads < 1) throw ValidationError("evaluate: threads must be >= 1");
    std::vector<std::vector<StepRow>> per_match(static_cast<std::size_t>(n_matches));
    const int workers = std::min(setup.threads, n_matches);
    if (workers == 1) {
        for (int i = 0; i < n_matches; ++i) per_match[i] = play_greedy_match(net, setup, skill, seed, i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < n_matches; i += workers) {
                    per_match[i] = play_greedy_match(net, setup, skill, seed, i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    std::vector<MatchRecord> records;
    records.reserve(per_match.size());
    for (const auto& rows : per_match) {
        records.push_back(record_from_rows(rows));
        if (log) log->insert(log->end(), rows.begin(), rows.end());
    }
    return summarize(skill, records);
}

std::vector<EvalReport> skill_sweep(const QNetwork& net, const EvalSetup& setup,
                                    std::span<const double> skills, int n_matches, std::uint64_t seed,
                                    std::vector<StepRow>* log) {
    std::vector<EvalReport> out;
    out.reserve(skills.size());
    for (std::size_t k = 0; k < skills.size(); ++k) {
        out.push_back(evaluate(net, setup, skills[k], n_matches, sweep_seed(seed, static_cast<int>(k)), log));
    }
    return out;
}

std::vector<EvalReport> reports_from_log(std::span<const StepRow> rows) {
    std::vector<double> skills;
    std::vector<std::vector<MatchRecord>> records;
    std::size_t begin = 0;
    while (begin < rows.size()) {
        std::size_t end = begin;
        while (end < rows.size() && !rows[end].done) ++end;
        if (end == rows.size()) throw ValidationError("match log ends inside a match");
        const double skill = rows[begin].skill;
        for (std::size_t i = begin; i <= end; ++i) {
            if (rows[i].skill != skill || rows[i].match != rows[begin].match) {
                throw ValidationError("match log row " + std::to_string(i) + " breaks its match");
            }
        }
        auto it = std::find(skills.begin(), skills.end(), skill);
        std::size_t slot = static_cast<std::size_t>(it - skills.begin());
        if (it == skills.end()) {
            skills.push_back(skill);
            records.emplace_back();
        }
        records[slot].push_back(record_from_rows(rows.subspan(begin, end - begin + 1)));
        begin = end + 1;
    }
    std::vector<EvalReport> out;
    for (std::size_t k = 0; k < skills.size(); ++k) out.push_back(summarize(skills[k], records[k]));
    return out;
}

DefensiveShares defensive_shares(const std::array<int, kNumActions>& counts) {
    EvalReport tmp;
    tmp.action_counts = counts;
    return {tmp.share(ActionId::ReturnBlock), tmp.share(ActionId::DefensiveLob)};
}

std::optional<std::pair<double, double>> reference_defensive_shares(double skill) noexcept {
    struct Ref {
        double skill, block, lob;
    };
    static constexpr Ref refs[] = {
        {0.35, 0.951, 0.605}, {0.40, 0.946, 0.634}, {0.45, 0.945, 0.624},
        {0.50, 0.937, 0.636}, {0.55, 0.943, 0.607},
    };
    for (const Ref& r : refs) {
        if (std::abs(r.skill - skill) < 1e-9) return std::pair{r.block, r.lob};
    }
    return std::nullopt;
}

std::vector<DefensiveBiasRow> defensive_bias_report(std::span<const EvalReport> reports) {
    std::vector<DefensiveBiasRow> out;
    for (const EvalReport& rep : reports) {
        DefensiveBiasRow row;
        row.skill = rep.skill;
        row.shares = defensive_shares(rep.action_counts);
        if (const auto ref = reference_defensive_shares(rep.skill)) {
            row.reference_block = ref->first;
            row.reference_lob = ref->second;
            if (row.shares.return_block) row.delta_block = *row.shares.return_block - ref->first;
            if (row.shares.defensive_lob) row.delta_lob = *row.shares.defensive_lob - ref->second;
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace courtforge
