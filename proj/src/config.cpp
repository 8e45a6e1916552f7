#include "courtforge/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "courtforge/byte_io.hpp"
#include "courtforge/errors.hpp"

namespace courtforge {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ValidationError("not a number: '" + s + "'");
    }
    return v;
}

long long parse_int(const std::string& s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ValidationError("not an integer: '" + s + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ValidationError("not an unsigned integer: '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError("not a boolean: '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
    if (out.empty()) throw ValidationError("empty list");
    return out;
}

std::string fmt_double_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt_double(v[i]);
    }
    return out;
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
Key double_key(std::string name, Field field) {
    return {std::move(name), [field](RunConfig& c, const std::string& v) { field(c) = parse_double(v); },
            [field](const RunConfig& c) { return fmt_double(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
Key int_key(std::string name, Field field) {
    return {std::move(name),
            [field](RunConfig& c, const std::string& v) {
                field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_int(v));
            },
            [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
Key bool_key(std::string name, Field field) {
    return {std::move(name), [field](RunConfig& c, const std::string& v) { field(c) = parse_bool(v); },
            [field](const RunConfig& c) {
                return std::string(field(const_cast<RunConfig&>(c)) ? "true" : "false");
            }};
}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        // training loop
        k.push_back(int_key("episodes", [](RunConfig& c) -> int& { return c.train.episodes; }));
        k.push_back(int_key("max_steps", [](RunConfig& c) -> int& { return c.train.max_steps; }));
        k.push_back(int_key("best_of", [](RunConfig& c) -> int& { return c.train.best_of; }));
        k.push_back({"seed", [](RunConfig& c, const std::string& v) { c.train.seed = parse_u64(v); },
                     [](const RunConfig& c) { return std::to_string(c.train.seed); }});
        k.push_back(double_key("epsilon0", [](RunConfig& c) -> double& { return c.train.epsilon0; }));
        k.push_back(double_key("epsilon_floor", [](RunConfig& c) -> double& { return c.train.epsilon_floor; }));
        k.push_back(double_key("epsilon_decay", [](RunConfig& c) -> double& { return c.train.epsilon_decay; }));
        k.push_back(int_key("checkpoint_every", [](RunConfig& c) -> int& { return c.train.checkpoint_every; }));
        k.push_back(int_key("eval_every", [](RunConfig& c) -> int& { return c.train.eval_every; }));
        k.push_back(int_key("eval_matches", [](RunConfig& c) -> int& { return c.train.eval_matches; }));
        k.push_back(int_key("rolling_window", [](RunConfig& c) -> int& { return c.train.rolling_window; }));
        k.push_back({"curriculum",
                     [](RunConfig& c, const std::string& v) { c.train.schedule = CurriculumSchedule::parse(v); },
                     [](const RunConfig& c) { return c.train.schedule.to_string(); }});
        k.push_back(bool_key("normalize", [](RunConfig& c) -> bool& { return c.train.env.normalize; }));
        // agent
        k.push_back({"variant",
                     [](RunConfig& c, const std::string& v) {
                         const auto parsed = variant_from_name(v);
                         if (!parsed) throw ValidationError("unknown variant '" + v + "'");
                         c.train.agent.variant = *parsed;
                     },
                     [](const RunConfig& c) { return std::string(name_of(c.train.agent.variant)); }});
        k.push_back(double_key("lr", [](RunConfig& c) -> double& { return c.train.agent.adam.learning_rate; }));
        k.push_back(double_key("adam_beta1", [](RunConfig& c) -> double& { return c.train.agent.adam.beta1; }));
        k.push_back(double_key("adam_beta2", [](RunConfig& c) -> double& { return c.train.agent.adam.beta2; }));
        k.push_back(double_key("adam_epsilon", [](RunConfig& c) -> double& { return c.train.agent.adam.epsilon; }));
        k.push_back(double_key("gamma", [](RunConfig& c) -> double& { return c.train.agent.gamma; }));
        k.push_back(int_key("batch_size", [](RunConfig& c) -> std::size_t& { return c.train.agent.batch_size; }));
        k.push_back(int_key("buffer_capacity", [](RunConfig& c) -> std::size_t& { return c.train.agent.buffer_capacity; }));
        k.push_back(int_key("target_update", [](RunConfig& c) -> int& { return c.train.agent.target_update; }));
        k.push_back(bool_key("mask_targets", [](RunConfig& c) -> bool& { return c.train.agent.mask_targets; }));
        k.push_back(double_key("clip_norm", [](RunConfig& c) -> double& { return c.train.agent.clip_norm; }));
        // environment
        k.push_back(double_key("skill_min", [](RunConfig& c) -> double& { return c.train.env.skill_min; }));
        k.push_back(double_key("skill_max", [](RunConfig& c) -> double& { return c.train.env.skill_max; }));
        k.push_back({"dynamics_table", [](RunConfig& c, const std::string& v) { c.train.dynamics_table = v; },
                     [](const RunConfig& c) { return c.train.dynamics_table; }});
        // rewards
        k.push_back(double_key("reward_win", [](RunConfig& c) -> double& { return c.train.env.reward.win_base; }));
        k.push_back(double_key("bonus_critical", [](RunConfig& c) -> double& { return c.train.env.reward.bonus_critical; }));
        k.push_back(double_key("bonus_break", [](RunConfig& c) -> double& { return c.train.env.reward.bonus_break; }));
        k.push_back(double_key("bonus_hold", [](RunConfig& c) -> double& { return c.train.env.reward.bonus_hold; }));
        k.push_back(double_key("bonus_rally", [](RunConfig& c) -> double& { return c.train.env.reward.bonus_rally; }));
        k.push_back(int_key("rally_bonus_threshold", [](RunConfig& c) -> int& { return c.train.env.reward.rally_bonus_threshold; }));
        k.push_back(double_key("bonus_aggressive", [](RunConfig& c) -> double& { return c.train.env.reward.bonus_aggressive; }));
        k.push_back(double_key("reward_lose", [](RunConfig& c) -> double& { return c.train.env.reward.lose_base; }));
        k.push_back(double_key("offset_aggressive", [](RunConfig& c) -> double& { return c.train.env.reward.offset_aggressive; }));
        k.push_back(double_key("reward_continue", [](RunConfig& c) -> double& { return c.train.env.reward.continue_reward; }));
        k.push_back(double_key("truncation_penalty", [](RunConfig& c) -> double& { return c.train.env.reward.truncation_penalty; }));
        // evaluation
        k.push_back(double_key("eval_skill", [](RunConfig& c) -> double& { return c.eval.skill; }));
        k.push_back(int_key("eval_episodes", [](RunConfig& c) -> int& { return c.eval.matches; }));
        k.push_back({"eval_seed", [](RunConfig& c, const std::string& v) { c.eval.seed = parse_u64(v); },
                     [](const RunConfig& c) { return std::to_string(c.eval.seed); }});
        k.push_back({"sweep_skills",
                     [](RunConfig& c, const std::string& v) { c.eval.sweep_skills = parse_double_list(v); },
                     [](const RunConfig& c) { return fmt_double_list(c.eval.sweep_skills); }});
        k.push_back(int_key("sweep_matches", [](RunConfig& c) -> int& { return c.eval.sweep_matches; }));
        k.push_back(int_key("eval_threads", [](RunConfig& c) -> int& { return c.eval.threads; }));
        return k;
    }();
    return keys;
}

}  // namespace

CurriculumSchedule CurriculumSchedule::standard() {
    return {{{0, 0.40}, {400, 0.44}, {800, 0.47}, {1200, 0.50}}};
}

CurriculumSchedule CurriculumSchedule::fixed(double skill) { return {{{0, skill}}}; }

CurriculumSchedule CurriculumSchedule::parse(const std::string& text) {
    CurriculumSchedule s;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ValidationError("curriculum entry '" + item + "' is not start:skill");
        }
        CurriculumPhase p;
        p.start_episode = static_cast<int>(parse_int(trim(item.substr(0, colon))));
        p.skill = parse_double(trim(item.substr(colon + 1)));
        s.phases.push_back(p);
    }
    if (s.phases.empty()) throw ValidationError("curriculum is empty");
    return s;
}

std::string CurriculumSchedule::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(phases[i].start_episode) + ":" + fmt_double(phases[i].skill);
    }
    return out;
}

void CurriculumSchedule::validate(double skill_min, double skill_max) const {
    if (phases.empty()) throw ValidationError("curriculum is empty");
    if (phases.front().start_episode != 0) throw ValidationError("curriculum must start at episode 0");
    for (std::size_t i = 0; i < phases.size(); ++i) {
        if (i > 0 && phases[i].start_episode <= phases[i - 1].start_episode) {
            throw ValidationError("curriculum start episodes must be strictly increasing");
        }
        if (phases[i].skill < skill_min || phases[i].skill > skill_max) {
            throw ValidationError("curriculum skill " + fmt_double(phases[i].skill) +
                                  " outside [" + fmt_double(skill_min) + ", " + fmt_double(skill_max) + "]");
        }
    }
}

double curriculum_skill(const CurriculumSchedule& schedule, int episode) {
    if (schedule.phases.empty()) throw ContractViolation("curriculum_skill: empty schedule");
    double skill = schedule.phases.front().skill;
    for (const auto& p : schedule.phases) {
        if (p.start_episode <= episode) skill = p.skill;
    }
    return skill;
}

void TrainConfig::validate() const {
    std::vector<std::string> bad;
    if (episodes < 0) bad.push_back("episodes");
    if (max_steps < 1) bad.push_back("max_steps");
    if (best_of != 1 && best_of != 3) bad.push_back("best_of");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) bad.push_back("epsilon0");
    if (!(epsilon_floor >= 0.0 && epsilon_floor <= epsilon0)) bad.push_back("epsilon_floor");
    if (!(epsilon_decay > 0.0 && epsilon_decay < 1.0)) bad.push_back("epsilon_decay");
    if (checkpoint_every < 0) bad.push_back("checkpoint_every");
    if (eval_every < 0) bad.push_back("eval_every");
    if (eval_matches < 1) bad.push_back("eval_matches");
    if (rolling_window < 1) bad.push_back("rolling_window");
    if (!(env.skill_min > 0.0 && env.skill_min <= env.skill_max && env.skill_max < 1.0)) {
        bad.push_back("skill_min/skill_max");
    }
    if (env.reward.rally_bonus_threshold < 0) bad.push_back("rally_bonus_threshold");
    try {
        agent.validate();
    } catch (const ValidationError& e) {
        bad.push_back(e.what());
    }
    try {
        schedule.validate(env.skill_min, env.skill_max);
    } catch (const ValidationError& e) {
        bad.push_back(e.what());
    }
    if (!bad.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw ValidationError(msg);
    }
}

double epsilon_at(const TrainConfig& config, int episode) {
    if (episode < 0) throw ContractViolation("epsilon_at: negative episode");
    return std::max(config.epsilon_floor, config.epsilon0 * std::pow(config.epsilon_decay, episode));
}

void EvalConfig::validate(double skill_min, double skill_max) const {
    std::vector<std::string> bad;
    const auto in_range = [&](double s) { return s >= skill_min && s <= skill_max; };
    if (!in_range(skill)) bad.push_back("eval_skill");
    if (matches < 1) bad.push_back("eval_episodes");
    if (sweep_matches < 1) bad.push_back("sweep_matches");
    if (sweep_skills.empty()) bad.push_back("sweep_skills");
    for (double s : sweep_skills) {
        if (!in_range(s)) {
            bad.push_back("sweep_skills");
            break;
        }
    }
    if (threads < 1) bad.push_back("eval_threads");
    if (!bad.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw ValidationError(msg);
    }
}

void RunConfig::validate() const {
    train.validate();
    eval.validate(train.env.skill_min, train.env.skill_max);
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const Key& k : registry()) out += k.name + "=" + k.get(*this) + "\n";
    return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_text()); }

std::uint64_t RunConfig::train_hash() const {
    std::string out;
    for (const Key& k : registry()) {
        if (k.name.starts_with("eval_") || k.name.starts_with("sweep_")) continue;
        out += k.name + "=" + k.get(*this) + "\n";
    }
    return fnv1a64(out);
}

std::string format_hash(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const Key& k : registry()) out.push_back(k.name);
    return out;
}

namespace {

void apply_pairs(RunConfig& config, const std::vector<std::pair<std::string, std::string>>& pairs,
                 std::vector<std::string>& errors) {
    for (const auto& [key, value] : pairs) {
        const auto& keys = registry();
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
        if (it == keys.end()) {
            errors.push_back("unknown key '" + key + "'");
            continue;
        }
        try {
            it->set(config, value);
        } catch (const ValidationError& e) {
            errors.push_back(key + ": " + e.what());
        }
    }
}

void throw_if_errors(const std::vector<std::string>& errors, const std::string& origin) {
    if (errors.empty()) return;
    std::string msg = origin + ":";
    for (const auto& e : errors) msg += " " + e + ";";
    throw ValidationError(msg);
}

}  // namespace

void apply_config_text(RunConfig& config, std::istream& in, const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> errors;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + " is not key=value");
            continue;
        }
        pairs.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    apply_pairs(config, pairs, errors);
    throw_if_errors(errors, origin);
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& overrides) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> errors;
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            errors.push_back("override '" + o + "' is not key=value");
            continue;
        }
        pairs.emplace_back(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    }
    apply_pairs(config, pairs, errors);
    throw_if_errors(errors, "overrides");
}

RunConfig resolve_config(const std::string& source, const std::vector<std::string>& overrides) {
    RunConfig config;
    if (!source.empty() && source != "default") {
        if (!std::filesystem::is_regular_file(source)) {
            throw ValidationError("config file not found: " + source);
        }
        std::ifstream in(source);
        if (!in) throw ValidationError("cannot read config file: " + source);
        apply_config_text(config, in, source);
    }
    apply_overrides(config, overrides);
    config.validate();
    if (!config.train.dynamics_table.empty()) {
        const std::string& path = config.train.dynamics_table;
        if (!std::filesystem::is_regular_file(path)) {
            throw ValidationError("dynamics table not found: " + path);
        }
        config.train.env.tables = DynamicsTables::load(path);
    }
    return config;
}

}  // namespace courtforge
