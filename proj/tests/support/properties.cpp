#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "courtforge/agent.hpp"
#include "courtforge/config.hpp"
#include "courtforge/dynamics.hpp"
#include "courtforge/match_engine.hpp"
#include "courtforge/training.hpp"
#include "scoring_oracle.hpp"

namespace props {

using namespace courtforge;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

MatchState random_state(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pts(0, 4), games(0, 6), sets(0, 1), rally(0, 30), coin(0, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MatchState s;
    s.p_pts = pts(rng);
    s.o_pts = pts(rng);
    s.p_games = games(rng);
    s.o_games = games(rng);
    s.p_sets = sets(rng);
    s.o_sets = sets(rng);
    s.serving = coin(rng);
    s.rally_len = rally(rng);
    s.f_p = unit(rng);
    s.f_o = unit(rng);
    return s;
}

Batch random_batch(std::mt19937_64& rng, int n, double done_prob) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> act(0, kNumActions - 1);
    std::vector<Transition> ts;
    for (int i = 0; i < n; ++i) {
        Transition t;
        for (int k = 0; k < kStateDim; ++k) {
            t.state[k] = unit(rng);
            t.next_state[k] = unit(rng);
        }
        t.action = action_from_index(act(rng));
        t.reward = 4.0 * unit(rng) - 2.0;
        t.done = unit(rng) < done_prob;
        ts.push_back(t);
    }
    return make_batch(ts);
}

}  // namespace

Check scoring_matches_oracle(int sequences, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long points = 0;
    for (int seq = 0; seq < sequences; ++seq) {
        // near-even bias so deuces and tiebreaks are common
        const double p = 0.35 + 0.3 * unit(rng);
        const int best_of = seq % 4 == 3 ? 1 : 3;
        oracle::Scorer ref(best_of);
        MatchState s;
        for (int n = 0; n < 2000 && !ref.score().finished; ++n) {
            const bool a_won = unit(rng) < p;
            ref.point(a_won);
            s = apply_point_outcome(s, a_won, best_of);
            ++points;
            const oracle::Score& o = ref.score();
            const bool regular_ok = o.in_tiebreak
                                        ? (s.p_pts == 0 && s.o_pts == 0 && s.tb_p == o.pts_a && s.tb_o == o.pts_b)
                                        : (s.p_pts == ref.shown_a() && s.o_pts == ref.shown_b() && s.tb_p == 0 &&
                                           s.tb_o == 0);
            const auto w = match_winner(s, best_of);
            const bool winner_ok = o.finished == w.has_value() && (!w || (*w == Side::Agent) == o.a_won_match);
            const bool ok = regular_ok && winner_ok && s.tiebreak == o.in_tiebreak && s.serving == o.a_serves &&
                            s.p_games == o.games_a && s.o_games == o.games_b && s.p_sets == o.sets_a &&
                            s.o_sets == o.sets_b &&
                            s.deuce == (!o.in_tiebreak && o.pts_a >= 3 && o.pts_a == o.pts_b) &&
                            s.adv_p == (!o.in_tiebreak && o.pts_a >= 3 && o.pts_b >= 3 && o.pts_a == o.pts_b + 1) &&
                            s.adv_o == (!o.in_tiebreak && o.pts_a >= 3 && o.pts_b >= 3 && o.pts_b == o.pts_a + 1) &&
                            s.ad_side == ((o.pts_a + o.pts_b) % 2 == 1);
            if (!ok) {
                return {false, "sequence " + std::to_string(seq) + " diverged at point " + std::to_string(n) +
                                   ": engine " + ScoreSnapshot::of(s).to_string()};
            }
        }
        if (!ref.score().finished) return {false, "sequence " + std::to_string(seq) + " never finished"};
    }
    return {true, std::to_string(sequences) + " sequences, " + std::to_string(points) + " points, 0 mismatches"};
}

Check base_table_golden() {
    struct Row {
        const char* name;
        double w, l, c;
    };
    static constexpr Row golden[] = {
        {"serve_flat_wide", 0.42, 0.13, 0.45},   {"serve_flat_T", 0.40, 0.12, 0.48},
        {"serve_kick_body", 0.28, 0.08, 0.64},   {"return_aggressive", 0.20, 0.18, 0.62},
        {"return_neutral", 0.14, 0.10, 0.76},    {"return_block", 0.09, 0.06, 0.85},
        {"rally_aggressive", 0.16, 0.15, 0.69},  {"rally_neutral", 0.09, 0.07, 0.84},
        {"approach_net", 0.14, 0.13, 0.73},      {"defensive_lob", 0.06, 0.05, 0.89},
    };
    for (int i = 0; i < kNumActions; ++i) {
        const ActionId a = action_from_index(i);
        const OutcomeTriple t = base_outcome(a);
        if (name_of(a) != golden[i].name) return {false, "action order differs at " + std::to_string(i)};
        if (t.p_win != golden[i].w || t.p_lose != golden[i].l) {
            return {false, std::string(golden[i].name) + " win/lose not bit-exact"};
        }
        if (t.p_cont != 1.0 - golden[i].w - golden[i].l || std::abs(t.p_cont - golden[i].c) > 1e-15) {
            return {false, std::string(golden[i].name) + " continue probability off"};
        }
    }
    return {true, "10 rows bit-exact"};
}

Check fatigue_constants_exact() {
    static constexpr double alpha[] = {0.022, 0.022, 0.018, 0.024, 0.020, 0.016, 0.028, 0.020, 0.030, 0.018};
    const DynamicsTables& t = DynamicsTables::standard();
    for (int i = 0; i < kNumActions; ++i) {
        if (t.intensity[i] != alpha[i]) return {false, "intensity of " + std::string(kActionNames[i])};
    }
    if (t.beta != 0.002 || t.recovery != 0.025 || t.base_increment != 0.020 || t.max_fatigue != 1.0) {
        return {false, "beta/recovery/base/max constant differs"};
    }
    // apply the update rule once as a behavioural spot check
    const double f = update_fatigue(0.5, ActionId::ApproachNet, 7);
    if (f != std::min(1.0, 0.5 + 0.030 + 0.002 * 7)) return {false, "update_fatigue arithmetic"};
    if (recover(0.5) != 0.5 - 0.025) return {false, "recover arithmetic"};
    return {true, "intensity, beta, recovery exact"};
}

Check contextual_simplex(int contexts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> skill(0.35, 0.60);
    std::uniform_int_distribution<int> act(0, kNumActions - 1);
    for (int i = 0; i < contexts; ++i) {
        const MatchState s = random_state(rng);
        const ActionId a = action_from_index(act(rng));
        const OutcomeTriple t = contextual_outcome(a, s, skill(rng));
        if (!t.is_normalized(1e-12) || t.p_win > 0.95 || t.p_lose > 0.95) {
            return {false, "context " + std::to_string(i) + " gives (" + num(t.p_win) + ", " + num(t.p_lose) +
                               ", " + num(t.p_cont) + ")"};
        }
    }
    return {true, std::to_string(contexts) + " contexts on the simplex"};
}

Check p_win_monotone_in_skill(int contexts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> skill(0.35, 0.60);
    std::uniform_int_distribution<int> act(0, kNumActions - 1);
    for (int i = 0; i < contexts; ++i) {
        const MatchState s = random_state(rng);
        const ActionId a = action_from_index(act(rng));
        double lo = skill(rng), hi = skill(rng);
        if (lo > hi) std::swap(lo, hi);
        if (hi - lo < 1e-6) continue;
        const OutcomeTriple t_lo = contextual_outcome(a, s, lo);
        const OutcomeTriple t_hi = contextual_outcome(a, s, hi);
        if (!(t_hi.p_win < t_lo.p_win)) {
            return {false, "p_win did not fall: " + num(t_lo.p_win) + " -> " + num(t_hi.p_win)};
        }
        if (t_hi.p_lose < t_lo.p_lose) {
            return {false, "p_lose fell: " + num(t_lo.p_lose) + " -> " + num(t_hi.p_lose)};
        }
    }
    return {true, std::to_string(contexts) + " skill pairs, p_win strictly falling, p_lose not falling"};
}

Check dueling_identities(int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int t = 0; t < trials; ++t) {
        const int b = 1 + t % 5;
        Eigen::MatrixXd v(1, b), a(kNumActions, b);
        for (int j = 0; j < b; ++j) {
            v(0, j) = g(rng);
            for (int i = 0; i < kNumActions; ++i) a(i, j) = g(rng);
        }
        const Eigen::MatrixXd q = dueling_aggregate(v, a);
        Eigen::MatrixXd shifted = a;
        const double c = g(rng);
        shifted.array() += c;
        const Eigen::MatrixXd q2 = dueling_aggregate(v, shifted);
        if ((q - q2).cwiseAbs().maxCoeff() > 1e-12) return {false, "constant shift changed Q"};
        Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(kNumActions, b, c);
        const Eigen::MatrixXd q3 = dueling_aggregate(v, flat);
        for (int j = 0; j < b; ++j) {
            for (int i = 0; i < kNumActions; ++i) {
                if (std::abs(q3(i, j) - v(0, j)) > 1e-12) return {false, "equal advantages did not give Q = V"};
            }
            // mean over actions of Q equals V
            if (std::abs(q.col(j).mean() - v(0, j)) > 1e-12) return {false, "mean Q differs from V"};
        }
    }
    return {true, std::to_string(trials) + " trials"};
}

Check double_q_matches_vanilla_when_shared(std::uint64_t seed) {
    Rng rng(seed);
    std::mt19937_64 data(seed + 1);
    for (Variant v : {Variant::DuelingDDQN, Variant::VanillaDQN}) {
        const QNetwork net = QNetwork::create(v, rng);
        for (bool mask : {false, true}) {
            const Batch b = random_batch(data, 64, 0.2);
            const Eigen::VectorXd y1 = compute_targets(b, net, net, 0.99, mask);
            const Eigen::VectorXd y2 = vanilla_targets(b, net, 0.99, mask);
            if (y1 != y2) return {false, std::string(name_of(v)) + ": targets differ"};
        }
    }
    return {true, "identical on 4 batches of 64"};
}

Check terminal_target_is_reward(std::uint64_t seed) {
    Rng rng(seed);
    std::mt19937_64 data(seed + 7);
    const QNetwork online = QNetwork::create(Variant::DuelingDDQN, rng);
    const QNetwork target = QNetwork::create(Variant::DuelingDDQN, rng);
    const Batch b = random_batch(data, 64, 1.0);
    const Eigen::VectorXd y = compute_targets(b, online, target, 0.99);
    const Eigen::VectorXd yv = vanilla_targets(b, target, 0.99);
    if (y != b.rewards || yv != b.rewards) return {false, "terminal target differs from reward"};
    return {true, "64 terminal transitions, y = r exactly"};
}

Check gradient_finite_difference(int samples, std::uint64_t seed, double* max_rel_error) {
    Rng rng(seed);
    std::mt19937_64 pick(seed + 3);
    QNetwork net = QNetwork::create(Variant::DuelingDDQN, rng);
    const Batch b = random_batch(pick, 8, 0.0);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    Eigen::VectorXd y(b.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) y(j) = unit(pick);

    const auto loss_of = [&](const QNetwork& n) {
        const Eigen::MatrixXd q = n.q_values(b.states);
        Eigen::VectorXd pred(b.size());
        for (Eigen::Index j = 0; j < b.size(); ++j) pred(j) = q(index_of(b.actions[j]), j);
        return nn::huber_loss<double>(pred, y);
    };

    const QNetwork::Pass pass = net.forward(b.states);
    Eigen::VectorXd pred(b.size());
    for (Eigen::Index j = 0; j < b.size(); ++j) pred(j) = pass.q(index_of(b.actions[j]), j);
    const auto loss = nn::huber_loss<double>(pred, y);
    Eigen::MatrixXd q_grad = Eigen::MatrixXd::Zero(kNumActions, b.size());
    for (Eigen::Index j = 0; j < b.size(); ++j) q_grad(index_of(b.actions[j]), j) = loss.grad(j);
    const auto grads = net.backward(pass, q_grad);

    const double h = 1e-6;
    double worst = 0.0;
    std::string where;
    const std::size_t n_segments = net.segments().size();
    for (int s = 0; s < samples; ++s) {
        const std::size_t seg = pick() % n_segments;
        const std::size_t layer = pick() % net.segments()[seg].size();
        const auto& l = net.segments()[seg].layer(layer);
        const bool bias = pick() % 4 == 0;
        const Eigen::Index r = static_cast<Eigen::Index>(pick() % static_cast<std::uint64_t>(l.weight.rows()));
        const Eigen::Index c = static_cast<Eigen::Index>(pick() % static_cast<std::uint64_t>(l.weight.cols()));
        const auto param = [&](QNetwork& n) -> double& {
            auto& L = n.mutable_segments()[seg].mutable_layers()[layer];
            return bias ? L.bias(r) : L.weight(r, c);
        };
        QNetwork plus = net, minus = net;
        param(plus) += h;
        param(minus) -= h;
        const double numeric = (loss_of(plus).loss - loss_of(minus).loss) / (2.0 * h);
        const double analytic = bias ? grads[seg][layer].bias(r) : grads[seg][layer].weight(r, c);
        // floor keeps entries that are zero up to round-off from dominating
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        const double rel = std::abs(numeric - analytic) / scale;
        if (rel > worst) {
            worst = rel;
            where = "segment " + std::to_string(seg) + " layer " + std::to_string(layer);
        }
    }
    if (max_rel_error) *max_rel_error = worst;
    const bool ok = worst < 1e-4;
    return {ok, std::to_string(samples) + " parameters, max relative error " + num(worst) +
                    (ok ? "" : " at " + where)};
}

Check epsilon_schedule_end() {
    const TrainConfig cfg;
    const double e = epsilon_at(cfg, 1500);
    const bool ok = std::abs(e - 0.0234) <= 1e-4 && epsilon_at(cfg, 0) == 1.0 && epsilon_at(cfg, 5000) == 0.01;
    return {ok, "epsilon(1500) = " + num(e)};
}

Check masked_selection_valid(int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 5.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> phase(0, 2);
    Eigen::VectorXd q(kNumActions);
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < kNumActions; ++i) q(i) = g(rng);
        // make the global argmax invalid half the time
        const ActionSet valid = ActionSet::for_phase(static_cast<Phase>(phase(rng)));
        const double eps = (t % 3 == 0) ? 0.0 : unit(rng);
        const ActionId a = select_action(q, valid, eps, rng);
        if (!valid.contains(a)) return {false, "trial " + std::to_string(t) + " picked an invalid action"};
    }
    return {true, std::to_string(trials) + " selections, all valid"};
}

Check checkpoint_roundtrip_bitwise(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.episodes = 2;
    cfg.max_steps = 120;
    cfg.seed = seed;
    cfg.agent.batch_size = 32;
    cfg.agent.buffer_capacity = 500;
    cfg.schedule = CurriculumSchedule::fixed(0.45);
    Trainer a(cfg, 42);
    while (!a.finished()) a.run_episode();
    const Bytes first = a.checkpoint();
    Trainer b(cfg, 42);
    b.restore(first);
    const Bytes second = b.checkpoint();
    if (first != second) return {false, "re-serialized bytes differ"};
    if (!(a.agent().online() == b.agent().online()) || !(a.agent().target() == b.agent().target()) ||
        a.agent().optimizer() != b.agent().optimizer() || a.metrics() != b.metrics()) {
        return {false, "restored state differs"};
    }
    return {true, std::to_string(first.size()) + " bytes identical after round trip"};
}

Check training_deterministic(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.episodes = 3;
    cfg.max_steps = 150;
    cfg.seed = seed;
    cfg.agent.batch_size = 32;
    cfg.agent.buffer_capacity = 1000;
    cfg.agent.target_update = 2;
    const TrainResult r1 = train(cfg);
    const TrainResult r2 = train(cfg);
    if (r1.metrics != r2.metrics) return {false, "metric streams differ"};
    if (r1.final_checkpoint != r2.final_checkpoint) return {false, "final checkpoints differ"};
    return {true, std::to_string(r1.metrics.size()) + " episodes, metrics and checkpoint identical across two runs"};
}

}  // namespace props
