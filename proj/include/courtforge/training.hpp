#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "courtforge/agent.hpp"
#include "courtforge/config.hpp"
#include "courtforge/match_engine.hpp"

namespace courtforge {

struct EpisodeMetrics {
    int episode = 0;
    double skill = 0.0;
    double epsilon = 0.0;
    double reward = 0.0;
    int steps = 0;
    bool win = false;
    double mean_loss = 0.0;  // 0 when no learn step ran
    double rolling_win_rate = 0.0;

    friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

// Seeds are derived from the master seed so an episode's environment stream
// depends only on (seed, episode), which is what makes resume exact.
std::uint64_t episode_env_seed(std::uint64_t master, int episode) noexcept;
std::uint64_t agent_seed(std::uint64_t master) noexcept;

class Trainer {
public:
    explicit Trainer(TrainConfig config, std::uint64_t config_hash = 0);

    const TrainConfig& config() const noexcept { return config_; }
    int next_episode() const noexcept { return next_episode_; }
    bool finished() const noexcept { return next_episode_ >= config_.episodes; }

    EpisodeMetrics run_episode();

    const std::vector<EpisodeMetrics>& metrics() const noexcept { return metrics_; }
    const Agent& agent() const noexcept { return agent_; }
    Agent& mutable_agent() noexcept { return agent_; }

    // Agent state plus loop progress and metrics so far.
    Bytes checkpoint() const;
    void restore(std::span<const std::uint8_t> bytes, const std::string& context = "training checkpoint");

private:
    TrainConfig config_;
    std::uint64_t config_hash_;
    Agent agent_;
    TennisEnv env_;
    int next_episode_ = 0;
    std::vector<EpisodeMetrics> metrics_;
    std::deque<bool> window_;
    int window_wins_ = 0;
};

struct TrainOptions {
    // Directory for metrics.csv and checkpoints; empty keeps everything in memory.
    std::string out_dir;
    // Continue from a checkpoint written by a previous run.
    std::string resume_from;
    // Stop after this many episodes in total (for split runs); -1 runs to the end.
    int stop_at = -1;
    std::function<void(const EpisodeMetrics&)> on_episode;
    // Called with (episode, win rate, mean length) when eval_every is set.
    std::function<void(int, double, double)> on_eval;
};

struct TrainResult {
    std::vector<EpisodeMetrics> metrics;
    Bytes final_checkpoint;  // empty when no episode ran
    std::optional<std::string> checkpoint_path;
    std::optional<std::string> metrics_path;
};

TrainResult train(const TrainConfig& config, const TrainOptions& options = {},
                  std::uint64_t config_hash = 0);

inline constexpr const char* kLatestCheckpointName = "checkpoint_latest.ckpt";
inline constexpr const char* kFinalCheckpointName = "final.ckpt";
inline constexpr const char* kMetricsFileName = "metrics.csv";

}  // namespace courtforge
