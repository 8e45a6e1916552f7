#include "doctest.h"

#include <array>

#include "courtforge/errors.hpp"
#include "courtforge/evaluation.hpp"

using namespace courtforge;

namespace {

StepRow point(bool served, PointEvent e, ActionId a = ActionId::RallyNeutral) {
    StepRow r;
    r.agent_served = served;
    r.event = e;
    r.action = a;
    return r;
}

QNetwork net_for(std::uint64_t seed, Variant v = Variant::DuelingDDQN) {
    Rng rng(seed);
    return QNetwork::create(v, rng);
}

EvalSetup quick_setup(int threads = 1) {
    EvalSetup s;
    s.max_steps = 200;
    s.threads = threads;
    return s;
}

}  // namespace

TEST_CASE("serve and return percentages from a hand log") {
    std::vector<StepRow> rows{point(true, PointEvent::AgentWins), point(true, PointEvent::Continue),
                              point(true, PointEvent::AgentLoses), point(true, PointEvent::AgentWins),
                              point(false, PointEvent::AgentLoses)};
    const ServeReturnStats s = serve_return_stats(rows);
    REQUIRE(s.serve_win_pct.has_value());
    REQUIRE(s.return_win_pct.has_value());
    CHECK(*s.serve_win_pct == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(*s.return_win_pct == 0.0);

    std::vector<StepRow> only_returns{point(false, PointEvent::AgentWins)};
    const ServeReturnStats r = serve_return_stats(only_returns);
    CHECK_FALSE(r.serve_win_pct.has_value());
    CHECK(*r.return_win_pct == 1.0);

    const MatchRecord m = record_from_rows(rows);
    CHECK(m.steps == 5);
    CHECK(m.serve_points == 3);
    CHECK(m.return_points == 1);
    CHECK(m.action_counts[index_of(ActionId::RallyNeutral)] == 5);
}

TEST_CASE("action shares and their absence") {
    EvalReport rep;
    rep.action_counts[index_of(ActionId::ReturnBlock)] = 95;
    rep.action_counts[index_of(ActionId::ReturnNeutral)] = 3;
    rep.action_counts[index_of(ActionId::ReturnAggressive)] = 2;
    CHECK(*rep.share(ActionId::ReturnBlock) == 0.95);
    CHECK_FALSE(rep.share(ActionId::DefensiveLob).has_value());
    CHECK(rep.phase_total(Phase::Return) == 100);
    const DefensiveShares d = defensive_shares(rep.action_counts);
    CHECK(*d.return_block == 0.95);
    CHECK_FALSE(d.defensive_lob.has_value());
}

TEST_CASE("summary statistics") {
    MatchRecord a, b;
    a.won = true;
    a.total_reward = 10.0;
    a.steps = 100;
    b.total_reward = 4.0;
    b.steps = 50;
    const std::array<MatchRecord, 2> rs{a, b};
    const EvalReport rep = summarize(0.45, rs);
    CHECK(rep.matches == 2);
    CHECK(rep.wins == 1);
    CHECK(rep.win_rate == 0.5);
    CHECK(rep.reward_mean == 7.0);
    CHECK(rep.reward_std == 3.0);
    CHECK(rep.mean_length == 75.0);
    CHECK_FALSE(rep.serve_win_pct.has_value());
}

TEST_CASE("single match evaluation") {
    const QNetwork net = net_for(1);
    const EvalReport rep = evaluate(net, quick_setup(), 0.5, 1, 77);
    CHECK(rep.matches == 1);
    CHECK((rep.win_rate == 0.0 || rep.win_rate == 1.0));
    CHECK(rep.reward_std == 0.0);
    CHECK_THROWS_AS(evaluate(net, quick_setup(), 0.5, 0, 77), ValidationError);
}

TEST_CASE("evaluation is deterministic and thread count does not matter") {
    const QNetwork net = net_for(2);
    std::vector<StepRow> log1, log4;
    const EvalReport a = evaluate(net, quick_setup(1), 0.45, 12, 5, &log1);
    const EvalReport b = evaluate(net, quick_setup(4), 0.45, 12, 5, &log4);
    const EvalReport c = evaluate(net, quick_setup(1), 0.45, 12, 5);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(log1 == log4);
    CHECK_FALSE(a == evaluate(net, quick_setup(), 0.45, 12, 6));

    int total = 0;
    for (int x : a.action_counts) total += x;
    CHECK(total == static_cast<int>(log1.size()));
    CHECK(a.mean_length * a.matches == doctest::Approx(static_cast<double>(log1.size())));
    for (Phase p : {Phase::Serve, Phase::Return, Phase::Rally}) {
        if (a.phase_total(p) == 0) continue;
        double sum = 0.0;
        for (int i = 0; i < kNumActions; ++i)
            if (phase_of(action_from_index(i)) == p) sum += *a.share(action_from_index(i));
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    // greedy play only ever picks valid actions, so steps never exceed the cap
    for (const StepRow& r : log1) CHECK(r.step < 200);
}

TEST_CASE("sweep and log reconstruction") {
    const QNetwork net = net_for(3, Variant::VanillaDQN);
    const std::vector<double> one{0.4};
    std::vector<StepRow> log;
    const auto single = skill_sweep(net, quick_setup(), one, 3, 9, &log);
    REQUIRE(single.size() == 1);
    CHECK(single[0].skill == 0.4);
    CHECK(single[0] == evaluate(net, quick_setup(), 0.4, 3, sweep_seed(9, 0)));

    const std::vector<double> skills{0.35, 0.55};
    std::vector<StepRow> log2;
    const auto sweep = skill_sweep(net, quick_setup(2), skills, 4, 10, &log2);
    REQUIRE(sweep.size() == 2);
    const auto rebuilt = reports_from_log(log2);
    REQUIRE(rebuilt.size() == 2);
    CHECK(rebuilt[0] == sweep[0]);
    CHECK(rebuilt[1] == sweep[1]);
}

TEST_CASE("defensive bias rows against the published shares") {
    const auto ref = reference_defensive_shares(0.50);
    REQUIRE(ref.has_value());
    CHECK(ref->first == 0.937);
    CHECK(ref->second == 0.636);
    CHECK_FALSE(reference_defensive_shares(0.60).has_value());

    EvalReport a;
    a.skill = 0.50;
    a.action_counts[index_of(ActionId::ReturnBlock)] = 9;
    a.action_counts[index_of(ActionId::ReturnNeutral)] = 1;
    a.action_counts[index_of(ActionId::DefensiveLob)] = 1;
    a.action_counts[index_of(ActionId::RallyNeutral)] = 1;
    EvalReport b;
    b.skill = 0.60;
    const std::array<EvalReport, 2> reps{a, b};
    const auto rows = defensive_bias_report(reps);
    REQUIRE(rows.size() == 2);
    CHECK(*rows[0].delta_block == doctest::Approx(0.9 - 0.937).epsilon(1e-12));
    CHECK(*rows[0].delta_lob == doctest::Approx(0.5 - 0.636).epsilon(1e-12));
    CHECK_FALSE(rows[1].reference_block.has_value());
    CHECK_FALSE(rows[1].delta_block.has_value());
    CHECK_FALSE(rows[1].shares.return_block.has_value());
}
