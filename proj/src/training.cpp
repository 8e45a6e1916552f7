#include "courtforge/training.hpp"

#include <filesystem>

#include "courtforge/errors.hpp"
#include "courtforge/evaluation.hpp"
#include "courtforge/report_io.hpp"

namespace courtforge {

std::uint64_t episode_env_seed(std::uint64_t master, int episode) noexcept {
    return derive_seed(master, 1, static_cast<std::uint64_t>(episode));
}

std::uint64_t agent_seed(std::uint64_t master) noexcept { return derive_seed(master, 2, 0); }

Trainer::Trainer(TrainConfig config, std::uint64_t config_hash)
    : config_(std::move(config)),
      config_hash_(config_hash),
      agent_((config_.validate(), config_.agent), agent_seed(config_.seed)),
      env_(config_.env) {}

EpisodeMetrics Trainer::run_episode() {
    if (finished()) throw ContractViolation("run_episode: all episodes already ran");
    const int e = next_episode_;
    EpisodeMetrics m;
    m.episode = e;
    m.skill = curriculum_skill(config_.schedule, e);
    m.epsilon = epsilon_at(config_, e);

    StateVector obs = env_.reset({.opponent_skill = m.skill,
                                  .best_of = config_.best_of,
                                  .max_steps = config_.max_steps,
                                  .seed = episode_env_seed(config_.seed, e)});
    double loss_sum = 0.0;
    int loss_count = 0;
    while (!env_.done()) {
        const ActionId a = agent_.act(obs, env_.valid_actions(), m.epsilon);
        const StepResult r = env_.step(a);
        agent_.remember({obs, a, r.reward, r.state_vec, r.done});
        if (const auto loss = agent_.learn_step()) {
            loss_sum += *loss;
            ++loss_count;
        }
        m.reward += r.reward;
        ++m.steps;
        obs = r.state_vec;
        if (r.done) m.win = r.winner == Side::Agent;
    }
    m.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;

    if ((e + 1) % config_.agent.target_update == 0) agent_.hard_update_target();

    window_.push_back(m.win);
    window_wins_ += m.win;
    if (static_cast<int>(window_.size()) > config_.rolling_window) {
        window_wins_ -= window_.front();
        window_.pop_front();
    }
    m.rolling_win_rate = double(window_wins_) / static_cast<double>(window_.size());

    metrics_.push_back(m);
    ++next_episode_;
    return m;
}

Bytes Trainer::checkpoint() const {
    ByteWriter w;
    w.magic("CFTR");
    w.u32(1);
    w.u64(static_cast<std::uint64_t>(next_episode_));
    w.u64(metrics_.size());
    for (const EpisodeMetrics& m : metrics_) {
        w.u64(static_cast<std::uint64_t>(m.episode));
        w.f64(m.skill);
        w.f64(m.epsilon);
        w.f64(m.reward);
        w.u64(static_cast<std::uint64_t>(m.steps));
        w.u8(m.win);
        w.f64(m.mean_loss);
        w.f64(m.rolling_win_rate);
    }
    const AgentMeta meta{config_.agent.variant, config_hash_, static_cast<std::uint64_t>(next_episode_)};
    return agent_.serialize(meta, w.bytes());
}

void Trainer::restore(std::span<const std::uint8_t> bytes, const std::string& context) {
    Bytes extra;
    const AgentMeta meta = agent_.restore(bytes, &extra, context);
    ByteReader r(extra, context + " (training state)");
    r.expect_magic("CFTR");
    if (r.u32() != 1) r.fail("unsupported training state version");
    const auto next = r.u64();
    if (next != meta.episode) r.fail("episode counter disagrees with agent header");
    const auto n = r.u64();
    std::vector<EpisodeMetrics> metrics;
    for (std::uint64_t i = 0; i < n; ++i) {
        EpisodeMetrics m;
        m.episode = static_cast<int>(r.u64());
        m.skill = r.f64();
        m.epsilon = r.f64();
        m.reward = r.f64();
        m.steps = static_cast<int>(r.u64());
        m.win = r.u8() != 0;
        m.mean_loss = r.f64();
        m.rolling_win_rate = r.f64();
        metrics.push_back(m);
    }
    r.expect_end();
    if (metrics.size() != next) r.fail("metrics count does not match the episode counter");

    next_episode_ = static_cast<int>(next);
    metrics_ = std::move(metrics);
    window_.clear();
    window_wins_ = 0;
    const std::size_t start =
        metrics_.size() > static_cast<std::size_t>(config_.rolling_window) ? metrics_.size() - config_.rolling_window : 0;
    for (std::size_t i = start; i < metrics_.size(); ++i) {
        window_.push_back(metrics_[i].win);
        window_wins_ += metrics_[i].win;
    }
}

TrainResult train(const TrainConfig& config, const TrainOptions& options, std::uint64_t config_hash) {
    Trainer trainer(config, config_hash);
    if (!options.resume_from.empty()) {
        trainer.restore(read_file(options.resume_from), options.resume_from);
    }
    const bool to_disk = !options.out_dir.empty();
    std::filesystem::path out(options.out_dir);
    if (to_disk) {
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        if (ec) throw IoError(options.out_dir, "cannot create output directory: " + ec.message());
    }
    const int stop = options.stop_at < 0 ? config.episodes : std::min(options.stop_at, config.episodes);

    TrainResult result;
    bool ran = false;
    while (trainer.next_episode() < stop) {
        const EpisodeMetrics m = trainer.run_episode();
        ran = true;
        if (options.on_episode) options.on_episode(m);
        const int done_eps = trainer.next_episode();
        if (config.eval_every > 0 && done_eps % config.eval_every == 0) {
            EvalSetup setup{config.env, config.best_of, config.max_steps, 1};
            const EvalReport rep = evaluate(trainer.agent().online(), setup, m.skill, config.eval_matches,
                                            derive_seed(config.seed, 5, static_cast<std::uint64_t>(done_eps)));
            if (options.on_eval) options.on_eval(m.episode, rep.win_rate, rep.mean_length);
        }
        if (to_disk && config.checkpoint_every > 0 && done_eps % config.checkpoint_every == 0) {
            write_file_atomic((out / kLatestCheckpointName).string(), trainer.checkpoint());
            write_metrics_csv((out / kMetricsFileName).string(), trainer.metrics());
        }
    }
    result.metrics = trainer.metrics();
    if (ran || !options.resume_from.empty()) result.final_checkpoint = trainer.checkpoint();
    if (to_disk && ran) {
        const auto ckpt = (out / (trainer.finished() ? kFinalCheckpointName : kLatestCheckpointName)).string();
        write_file_atomic(ckpt, result.final_checkpoint);
        result.checkpoint_path = ckpt;
        const auto metrics_path = (out / kMetricsFileName).string();
        write_metrics_csv(metrics_path, trainer.metrics());
        result.metrics_path = metrics_path;
    }
    return result;
}

}  // namespace courtforge
