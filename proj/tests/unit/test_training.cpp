#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "courtforge/errors.hpp"
#include "courtforge/report_io.hpp"
#include "courtforge/training.hpp"
#include "properties.hpp"

using namespace courtforge;

namespace {

TrainConfig small(int episodes) {
    TrainConfig c;
    c.episodes = episodes;
    c.max_steps = 120;
    c.agent.batch_size = 32;
    c.agent.buffer_capacity = 2000;
    c.agent.target_update = 2;
    c.checkpoint_every = 2;
    c.rolling_window = 3;
    c.seed = 11;
    c.schedule = CurriculumSchedule::parse("0:0.40,3:0.50");
    return c;
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "courtforge_training" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("episode metrics follow the schedules") {
    const TrainConfig c = small(5);
    Trainer t(c);
    for (int e = 0; e < 5; ++e) {
        const EpisodeMetrics m = t.run_episode();
        CHECK(m.episode == e);
        CHECK(m.skill == (e < 3 ? 0.40 : 0.50));
        CHECK(m.epsilon == epsilon_at(c, e));
        CHECK(m.steps >= 1);
        CHECK(m.steps <= c.max_steps);
        CHECK(m.rolling_win_rate >= 0.0);
        CHECK(m.rolling_win_rate <= 1.0);
        CHECK(std::isfinite(m.reward));
        CHECK(std::isfinite(m.mean_loss));
    }
    CHECK(t.finished());
    CHECK_THROWS_AS(t.run_episode(), ContractViolation);

    // rolling rate over the last three wins
    const auto& ms = t.metrics();
    const double want = (ms[2].win + ms[3].win + ms[4].win) / 3.0;
    CHECK(ms[4].rolling_win_rate == doctest::Approx(want).epsilon(1e-15));
    CHECK(ms[0].rolling_win_rate == (ms[0].win ? 1.0 : 0.0));
}

TEST_CASE("target network syncs every C episodes") {
    TrainConfig c = small(4);
    c.agent.target_update = 2;
    Trainer t(c);
    t.run_episode();
    CHECK_FALSE(t.agent().target() == t.agent().online());
    t.run_episode();
    CHECK(t.agent().target() == t.agent().online());
    t.run_episode();
    CHECK_FALSE(t.agent().target() == t.agent().online());
}

TEST_CASE("property: deterministic and bitwise checkpoint") {
    const props::Check a = props::training_deterministic(21);
    INFO(a.detail);
    CHECK(a.ok);
    const props::Check b = props::checkpoint_roundtrip_bitwise(22);
    INFO(b.detail);
    CHECK(b.ok);
    const props::Check e = props::epsilon_schedule_end();
    INFO(e.detail);
    CHECK(e.ok);
}

TEST_CASE("split run with resume equals a straight run") {
    const TrainConfig c = small(6);
    const TrainResult straight = train(c, {});

    const auto dir = fresh_dir("split");
    TrainOptions first;
    first.out_dir = dir.string();
    first.stop_at = 3;
    const TrainResult part = train(c, first);
    REQUIRE(part.checkpoint_path.has_value());
    CHECK(part.metrics.size() == 3);
    CHECK(std::filesystem::path(*part.checkpoint_path).filename() == kLatestCheckpointName);

    TrainOptions second;
    second.out_dir = dir.string();
    second.resume_from = *part.checkpoint_path;
    const TrainResult rest = train(c, second);
    CHECK(rest.metrics == straight.metrics);
    CHECK(rest.final_checkpoint == straight.final_checkpoint);
    REQUIRE(rest.checkpoint_path.has_value());
    CHECK(std::filesystem::path(*rest.checkpoint_path).filename() == kFinalCheckpointName);

    const auto on_disk = read_metrics_csv((dir / kMetricsFileName).string());
    REQUIRE(on_disk.size() == straight.metrics.size());
    for (std::size_t i = 0; i < on_disk.size(); ++i) {
        CHECK(on_disk[i].episode == straight.metrics[i].episode);
        CHECK(on_disk[i].win == straight.metrics[i].win);
        CHECK(on_disk[i].reward == straight.metrics[i].reward);
        CHECK(on_disk[i].mean_loss == straight.metrics[i].mean_loss);
    }
}

TEST_CASE("zero episodes produce nothing") {
    const auto dir = fresh_dir("zero");
    TrainOptions o;
    o.out_dir = dir.string();
    const TrainResult r = train(small(0), o);
    CHECK(r.metrics.empty());
    CHECK(r.final_checkpoint.empty());
    CHECK_FALSE(r.checkpoint_path.has_value());
    CHECK_FALSE(std::filesystem::exists(dir / kFinalCheckpointName));
}

TEST_CASE("callbacks and periodic evaluation") {
    TrainConfig c = small(4);
    c.eval_every = 2;
    c.eval_matches = 2;
    int episodes = 0, evals = 0;
    TrainOptions o;
    o.on_episode = [&](const EpisodeMetrics&) { ++episodes; };
    o.on_eval = [&](int, double rate, double len) {
        ++evals;
        CHECK(rate >= 0.0);
        CHECK(rate <= 1.0);
        CHECK(len > 0.0);
    };
    train(c, o);
    CHECK(episodes == 4);
    CHECK(evals == 2);
}

TEST_CASE("restoring into a different variant fails") {
    const TrainConfig c = small(1);
    const TrainResult r = train(c, {});
    TrainConfig v = c;
    v.agent.variant = Variant::VanillaDQN;
    Trainer t(v);
    CHECK_THROWS_AS(t.restore(r.final_checkpoint), ValidationError);
    Bytes broken = r.final_checkpoint;
    broken[broken.size() / 2] ^= 1;
    Trainer u(c);
    CHECK_THROWS_AS(u.restore(broken), CheckpointError);
    TrainOptions missing;
    missing.resume_from = "/nonexistent/x.ckpt";
    CHECK_THROWS_AS(train(c, missing), IoError);
}

TEST_CASE("config validation happens before training") {
    TrainConfig c = small(2);
    c.agent.gamma = 1.5;
    CHECK_THROWS_AS(Trainer{c}, ValidationError);
    c = small(2);
    c.max_steps = 0;
    CHECK_THROWS_AS(Trainer{c}, ValidationError);
}

TEST_CASE("metrics csv round trip") {
    std::vector<EpisodeMetrics> rows{{0, 0.4, 1.0, 12.5, 80, true, 0.25, 1.0},
                                     {1, 0.4, 0.9975, -3.0000000000000004, 120, false, 0.0, 0.5}};
    const std::string text = metrics_csv_text(rows);
    CHECK(text.rfind("episode,skill,epsilon,reward,steps,win,mean_loss,rolling_win_rate\n", 0) == 0);
    std::istringstream in(text);
    CHECK(parse_metrics_csv(in, "mem") == rows);
    std::istringstream bad("episode,skill\n1,2\n");
    CHECK_THROWS_AS(parse_metrics_csv(bad, "mem"), ValidationError);
}
