#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "courtforge/agent.hpp"
#include "courtforge/match_engine.hpp"

namespace courtforge {

struct CurriculumPhase {
    int start_episode = 0;
    double skill = 0.5;

    friend bool operator==(const CurriculumPhase&, const CurriculumPhase&) = default;
};

struct CurriculumSchedule {
    std::vector<CurriculumPhase> phases;

    // 0.40 from episode 0, 0.44 from 400, 0.47 from 800, 0.50 from 1200.
    static CurriculumSchedule standard();
    static CurriculumSchedule fixed(double skill);
    // "start:skill,start:skill,..." e.g. "0:0.40,400:0.44"
    static CurriculumSchedule parse(const std::string& text);
    std::string to_string() const;

    void validate(double skill_min, double skill_max) const;

    friend bool operator==(const CurriculumSchedule&, const CurriculumSchedule&) = default;
};

// Skill of the last phase whose start is <= episode.
double curriculum_skill(const CurriculumSchedule& schedule, int episode);

struct TrainConfig {
    int episodes = 1500;
    int max_steps = 750;
    int best_of = 3;
    std::uint64_t seed = 0;
    double epsilon0 = 1.0;
    double epsilon_floor = 0.01;
    double epsilon_decay = 0.9975;
    int checkpoint_every = 100;
    int eval_every = 0;  // 0 disables periodic greedy evaluation
    int eval_matches = 10;
    int rolling_window = 100;
    AgentConfig agent{};
    CurriculumSchedule schedule = CurriculumSchedule::standard();
    EnvParams env{.normalize = true};
    std::string dynamics_table;  // optional override file, empty = standard tables

    void validate() const;
};

// max(floor, epsilon0 * decay^episode)
double epsilon_at(const TrainConfig& config, int episode);

struct EvalConfig {
    double skill = 0.50;
    int matches = 100;
    std::uint64_t seed = 20240611;
    std::vector<double> sweep_skills{0.35, 0.40, 0.45, 0.50, 0.55};
    int sweep_matches = 50;
    int threads = 1;

    void validate(double skill_min, double skill_max) const;
};

struct RunConfig {
    TrainConfig train;
    EvalConfig eval;

    void validate() const;
    // Canonical key=value text, one key per line in registry order.
    std::string to_text() const;
    // FNV-1a of to_text().
    std::uint64_t hash() const;
    // FNV-1a over the keys that shape training only; stored in checkpoints.
    std::uint64_t train_hash() const;
};

std::string format_hash(std::uint64_t h);

// Applies `key=value` lines; unknown keys and bad values are collected and
// reported together in one ValidationError.
void apply_config_text(RunConfig& config, std::istream& in, const std::string& origin);
void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides);

// Defaults, then `source` (a path, or "default"/"" for none), then overrides.
// Loads the dynamics override table when one is named.
RunConfig resolve_config(const std::string& source, const std::vector<std::string>& overrides = {});

std::vector<std::string> config_keys();

}  // namespace courtforge
