#include "doctest.h"

#include <random>
#include <tuple>

#include "courtforge/errors.hpp"
#include "courtforge/match_engine.hpp"
#include "properties.hpp"
#include "scoring_oracle.hpp"

using namespace courtforge;
namespace ix = courtforge::state_index;

namespace {

MatchState score(int pp, int op) {
    MatchState s;
    s.p_pts = pp;
    s.o_pts = op;
    s.deuce = pp == 3 && op == 3;
    s.adv_p = pp == 4;
    s.adv_o = op == 4;
    return s;
}

}  // namespace

TEST_CASE("reset returns the fresh encoding") {
    TennisEnv env;
    const StateVector v = env.reset({.opponent_skill = 0.50, .best_of = 3, .max_steps = 750, .seed = 1});
    StateVector want = StateVector::Zero();
    want[ix::serving] = 1.0;
    want[ix::ball_depth] = 1.0;  // neutral
    CHECK(v == want);
    CHECK(env.valid_actions() == ActionSet::for_phase(Phase::Serve));
}

TEST_CASE("reset rejects out-of-range configs") {
    TennisEnv env;
    CHECK_THROWS_AS(env.reset({.opponent_skill = 0.70}), ValidationError);
    CHECK_THROWS_AS(env.reset({.opponent_skill = 0.30}), ValidationError);
    CHECK_THROWS_AS(env.reset({.opponent_skill = 0.5, .max_steps = 0}), ValidationError);
    CHECK_THROWS_AS(env.reset({.opponent_skill = 0.5, .best_of = 5}), ValidationError);
    CHECK_NOTHROW(env.reset({.opponent_skill = 0.35}));
    CHECK(env.valid_actions() == ActionSet::for_phase(Phase::Serve));
    CHECK_NOTHROW(env.reset({.opponent_skill = 0.60}));
}

TEST_CASE("apply_point_outcome examples") {
    SUBCASE("40-0 won becomes a game and the server switches") {
        const MatchState s = apply_point_outcome(score(3, 0), true);
        CHECK(s.p_games == 1);
        CHECK(s.p_pts == 0);
        CHECK(s.o_pts == 0);
        CHECK_FALSE(s.serving);
    }
    SUBCASE("deuce to advantage") {
        const MatchState s = apply_point_outcome(score(3, 3), true);
        CHECK(s.p_pts == 4);
        CHECK(s.adv_p);
        CHECK_FALSE(s.adv_o);
        CHECK_FALSE(s.deuce);
    }
    SUBCASE("advantage cancelled") {
        const MatchState s = apply_point_outcome(score(3, 4), true);
        CHECK(s.p_pts == 3);
        CHECK(s.o_pts == 3);
        CHECK(s.deuce);
        CHECK_FALSE(s.adv_o);
    }
    SUBCASE("advantage converted") {
        const MatchState s = apply_point_outcome(score(4, 3), true);
        CHECK(s.p_games == 1);
        CHECK(s.p_pts == 0);
    }
    SUBCASE("recovery and rally reset") {
        MatchState s = score(1, 1);
        s.f_p = 0.5;
        s.f_o = 0.01;
        s.rally_len = 7;
        s = apply_point_outcome(s, false);
        CHECK(s.f_p == doctest::Approx(0.475).epsilon(1e-15));
        CHECK(s.f_o == 0.0);
        CHECK(s.rally_len == 0);
    }
}

TEST_CASE("set and tiebreak transitions") {
    MatchState s;
    s.p_games = 5;
    s.o_games = 4;
    s.p_pts = 3;
    s = apply_point_outcome(s, true);
    CHECK(s.p_sets == 1);
    CHECK(s.p_games == 0);
    CHECK(s.o_games == 0);

    MatchState t;
    t.p_games = 6;
    t.o_games = 5;
    t.serving = false;
    t.o_pts = 3;
    t = apply_point_outcome(t, false);  // opponent holds to 6-6
    CHECK(t.tiebreak);
    CHECK(t.p_games == 6);
    CHECK(t.o_games == 6);
    CHECK(t.serving);  // agent serves the first tiebreak point
    // rotation: A B B A A B B
    const bool want[] = {false, false, true, true, false, false};
    for (bool w : want) {
        t = apply_point_outcome(t, true);
        if (!t.tiebreak) break;
        CHECK(t.serving == w);
    }
}

TEST_CASE("tiebreak needs a two point lead and records 7-6") {
    MatchState s;
    s.p_games = s.o_games = 6;
    s.tiebreak = true;
    s.tb_p = 6;
    s.tb_o = 6;
    s = apply_point_outcome(s, true);
    CHECK(s.tiebreak);
    CHECK(s.tb_p == 7);
    s = apply_point_outcome(s, true);
    CHECK_FALSE(s.tiebreak);
    CHECK(s.p_sets == 1);
    CHECK(s.p_games == 0);
    // first tiebreak server was the agent, so the opponent opens the next set
    CHECK_FALSE(s.serving);
}

TEST_CASE("best of one ends after a single set") {
    MatchState s;
    s.p_games = 5;
    s.p_pts = 3;
    s = apply_point_outcome(s, true, 1);
    REQUIRE(match_winner(s, 1).has_value());
    CHECK(*match_winner(s, 1) == Side::Agent);
    CHECK_FALSE(match_winner(s, 3).has_value());
}

TEST_CASE("encode_state examples") {
    MatchState d = score(3, 3);
    StateVector v = encode_state(d);
    CHECK(v[ix::p_pts] == 3);
    CHECK(v[ix::o_pts] == 3);
    CHECK(v[ix::deuce] == 1);

    MatchState tb;
    tb.p_games = tb.o_games = 6;
    tb.tiebreak = true;
    v = encode_state(tb);
    CHECK(v[ix::tiebreak] == 1);
    CHECK(v[ix::p_games] == 6);
    CHECK(v[ix::o_games] == 6);
}

TEST_CASE("normalization bounds") {
    MatchState s = score(4, 3);
    s.p_games = 7;
    s.p_sets = 2;
    s.rally_len = 45;
    s.pos_p = CourtPosition::Net;
    s.ball_depth = BallDepth::Deep;
    const StateVector n = normalize_state(encode_state(s));
    CHECK(n[ix::p_pts] == 1.0);
    CHECK(n[ix::o_pts] == 0.75);
    CHECK(n[ix::p_games] == 1.0);
    CHECK(n[ix::p_sets] == 1.0);
    CHECK(n[ix::rally_len] == 1.0);
    CHECK(n[ix::pos_p] == 1.0);
    CHECK(n[ix::ball_depth] == 1.0);
    CHECK(n.minCoeff() >= 0.0);
    CHECK(n.maxCoeff() <= 1.0);
}

TEST_CASE("score snapshot notation") {
    CHECK(ScoreSnapshot::of(score(3, 2)).points_text() == "40-30");
    CHECK(ScoreSnapshot::of(score(4, 3)).points_text() == "Ad-40");
    CHECK(ScoreSnapshot::of(score(3, 4)).points_text() == "40-Ad");
    CHECK(ScoreSnapshot::of(score(0, 1)).points_text() == "0-15");
}

TEST_CASE("resolve_truncation examples") {
    MatchState s;
    s.p_sets = 1;
    CHECK(resolve_truncation(s) == Side::Agent);
    s.o_sets = 1;
    s.p_games = 4;
    s.o_games = 2;
    CHECK(resolve_truncation(s) == Side::Agent);
    s.p_games = s.o_games = 3;
    s.p_pts = s.o_pts = 2;
    CHECK(resolve_truncation(s) == Side::Opponent);
    s.p_sets = 2;
    CHECK_THROWS_AS(resolve_truncation(s), ContractViolation);
}

TEST_CASE("resolve_truncation over every tier combination") {
    // oracle: lexicographic comparison of (sets, games, points); full tie -> opponent
    for (int ps = 0; ps <= 1; ++ps)
        for (int os = 0; os <= 1; ++os)
            for (int pg = 0; pg <= 6; ++pg)
                for (int og = 0; og <= 6; ++og)
                    for (int pp = 0; pp <= 4; ++pp)
                        for (int op = 0; op <= 4; ++op) {
                            MatchState s;
                            s.p_sets = ps;
                            s.o_sets = os;
                            s.p_games = pg;
                            s.o_games = og;
                            s.p_pts = pp;
                            s.o_pts = op;
                            const auto a = std::tuple(ps, pg, pp), b = std::tuple(os, og, op);
                            const Side want = a > b ? Side::Agent : Side::Opponent;
                            REQUIRE(resolve_truncation(s) == want);
                        }
}

TEST_CASE("step examples with forced events") {
    TennisEnv env;
    env.reset({.opponent_skill = 0.5, .seed = 3});
    StepResult r = env.step_with_event(ActionId::ServeKickBody, PointEvent::Continue);
    CHECK(env.state().rally_len == 1);
    CHECK(r.reward == doctest::Approx(0.05));
    CHECK(r.label == StepLabel::Continue);
    CHECK(r.agent_served);
    r = env.step_with_event(ActionId::RallyNeutral, PointEvent::AgentWins);
    CHECK(r.reward == 1.0);
    CHECK(r.label == StepLabel::AgentPointWin);
    CHECK(env.state().p_pts == 1);
    CHECK_THROWS_AS(env.step(ActionId::RallyAggressive), ContractViolation);
}

TEST_CASE("stepping a finished episode is a contract violation") {
    TennisEnv env;
    env.reset({.opponent_skill = 0.5, .max_steps = 1, .seed = 4});
    const StepResult r = env.step(ActionId::ServeFlatT);
    CHECK(r.done);
    CHECK(r.label == StepLabel::Truncated);
    REQUIRE(r.winner.has_value());
    CHECK(r.reward < 0.0);
    CHECK_THROWS_AS(env.step(ActionId::ServeFlatT), ContractViolation);
}

TEST_CASE("property: random policies terminate within max_steps and keep invariants") {
    std::mt19937_64 pick(21);
    for (int ep = 0; ep < 60; ++ep) {
        TennisEnv env;
        const int max_steps = 50 + static_cast<int>(pick() % 700);
        const int best_of = ep % 3 == 0 ? 1 : 3;
        env.reset({.opponent_skill = 0.35 + 0.25 * (ep % 6) / 5.0, .best_of = best_of, .max_steps = max_steps,
                   .seed = pick()});
        int steps = 0;
        bool prev_serving = env.state().serving;
        int prev_games = 0;
        bool prev_tb = false;
        while (!env.done()) {
            const ActionSet v = env.valid_actions();
            const ActionId a = v.nth(static_cast<int>(pick() % static_cast<unsigned>(v.size())));
            const StepResult r = env.step(a);
            ++steps;
            const MatchState& s = env.state();
            REQUIRE(s.f_p >= 0.0);
            REQUIRE(s.f_p <= 1.0);
            REQUIRE(s.f_o >= 0.0);
            REQUIRE(s.f_o <= 1.0);
            REQUIRE_FALSE((s.adv_p && s.adv_o));
            REQUIRE(s.deuce == (s.p_pts == 3 && s.o_pts == 3 && !s.tiebreak));
            if (s.tiebreak) REQUIRE((s.p_games == 6 && s.o_games == 6));
            REQUIRE(s.step_count <= max_steps);
            const int games = s.p_games + s.o_games + 100 * (s.p_sets + s.o_sets);
            if (!s.tiebreak && !prev_tb && games != prev_games && !r.done) {
                // a game just ended: the server changed
                REQUIRE(s.serving != prev_serving);
            }
            prev_games = games;
            prev_serving = s.serving;
            prev_tb = s.tiebreak;
            if (r.done) REQUIRE((match_winner(s, best_of).has_value() || s.step_count == max_steps));
        }
        CHECK(steps <= max_steps);
    }
}

TEST_CASE("property: scoring agrees with the brute-force oracle") {
    const props::Check c = props::scoring_matches_oracle(10000, 99);
    INFO(c.detail);
    CHECK(c.ok);
}

TEST_CASE("same seed same episode") {
    const auto run = [](std::uint64_t seed) {
        TennisEnv env;
        env.reset({.opponent_skill = 0.47, .seed = seed});
        std::vector<double> rewards;
        while (!env.done()) {
            const ActionSet v = env.valid_actions();
            rewards.push_back(env.step(v.nth(0)).reward);
        }
        return rewards;
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}
