#include "courtforge/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "courtforge/config.hpp"
#include "courtforge/errors.hpp"
#include "courtforge/evaluation.hpp"
#include "courtforge/report_io.hpp"
#include "courtforge/training.hpp"

namespace courtforge::cli {

namespace {

namespace fs = std::filesystem;

struct Flags {
    std::string config = "default";
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string checkpoint;
    std::optional<double> skill;
    std::optional<int> matches;
    std::vector<std::string> sets;
    std::string log;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key=value config file, or 'default'");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--out", f.out, "output directory (default $COURTFORGE_OUT or ./out)");
    cmd->add_option("--set", f.sets, "override one key, key=value (repeatable)");
}

std::string out_dir(const Flags& f) {
    if (!f.out.empty()) return f.out;
    if (const char* env = std::getenv("COURTFORGE_OUT"); env && *env) return env;
    return "out";
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create output directory: " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_manifest(const std::string& dir, const std::string& command, const RunConfig& cfg,
                    const std::string& extra = {}) {
    std::string text = "# courtforge manifest\n# command: " + command + "\n# config_hash: " +
                       format_hash(cfg.hash()) + "\n# train_hash: " + format_hash(cfg.train_hash()) + "\n";
    text += extra;
    text += cfg.to_text();
    write_file_atomic(join(dir, "manifest.txt"), {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string fmt(double v) { return format_real(v); }

// Dedicated flags land after --set so they win.
RunConfig resolve(const Flags& f, const std::string& command) {
    std::vector<std::string> overrides = f.sets;
    const bool eval_like = command == "eval" || command == "sweep";
    if (f.seed) overrides.push_back(std::string(eval_like ? "eval_seed=" : "seed=") + std::to_string(*f.seed));
    if (f.skill) {
        if (command == "train") {
            overrides.push_back("curriculum=0:" + fmt(*f.skill));
        } else {
            overrides.push_back("eval_skill=" + fmt(*f.skill));
        }
    }
    if (f.matches) {
        overrides.push_back(std::string(command == "sweep" ? "sweep_matches=" : "eval_episodes=") +
                            std::to_string(*f.matches));
    }
    return resolve_config(f.config, overrides);
}

EvalSetup setup_of(const RunConfig& cfg) {
    return {cfg.train.env, cfg.train.best_of, cfg.train.max_steps, cfg.eval.threads};
}

PolicySnapshot load_checked(const std::string& path, const RunConfig& cfg, std::ostream& err) {
    if (path.empty()) throw ValidationError("--checkpoint is required");
    if (!fs::is_regular_file(path)) throw ValidationError("checkpoint not found: " + path);
    PolicySnapshot snap = load_policy(path);
    if (snap.meta.config_hash != cfg.train_hash()) {
        err << "note: checkpoint was trained under config " << format_hash(snap.meta.config_hash)
            << ", evaluating under " << format_hash(cfg.train_hash()) << "\n";
    }
    return snap;
}

void emit_reports(const std::string& dir, const std::string& stem, const AgentMeta& meta,
                  const std::vector<EvalReport>& reports, std::ostream& out) {
    write_report_json(join(dir, stem + ".json"), {meta, reports});
    write_report_csv(join(dir, stem + ".csv"), reports);
    const auto bias = defensive_bias_report(reports);
    write_bias_csv(join(dir, "defensive_bias.csv"), bias);
    out << format_report_table(reports) << "\ndefensive action usage (reference deltas are informational)\n"
        << format_bias_table(bias);
}

TrainResult run_training(const RunConfig& cfg, const std::string& dir, const std::string& resume,
                         std::ostream& out) {
    TrainOptions opts;
    opts.out_dir = dir;
    opts.resume_from = resume;
    const int every = std::max(1, cfg.train.episodes / 30);
    opts.on_episode = [&](const EpisodeMetrics& m) {
        if ((m.episode + 1) % every == 0 || m.episode + 1 == cfg.train.episodes) {
            char buf[200];
            std::snprintf(buf, sizeof buf, "episode %5d  skill %.2f  eps %.4f  reward %8.2f  steps %4d  loss %.4f  rolling %.3f\n",
                          m.episode + 1, m.skill, m.epsilon, m.reward, m.steps, m.mean_loss, m.rolling_win_rate);
            out << buf << std::flush;
        }
    };
    opts.on_eval = [&](int episode, double win_rate, double length) {
        out << "  eval after episode " << episode + 1 << ": win rate " << fmt(win_rate) << ", mean length "
            << fmt(length) << "\n";
    };
    return train(cfg.train, opts, cfg.train_hash());
}

int cmd_train(const Flags& f, std::ostream& out) {
    const RunConfig cfg = resolve(f, "train");
    const std::string dir = out_dir(f);
    ensure_dir(dir);
    write_manifest(dir, "train", cfg);
    if (!f.checkpoint.empty() && !fs::is_regular_file(f.checkpoint)) {
        throw ValidationError("checkpoint not found: " + f.checkpoint);
    }
    const TrainResult r = run_training(cfg, dir, f.checkpoint, out);
    if (r.checkpoint_path) out << "checkpoint: " << *r.checkpoint_path << "\n";
    if (r.metrics_path) out << "metrics: " << *r.metrics_path << "\n";
    if (r.metrics.empty()) out << "no episodes requested\n";
    return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(f, "eval");
    const PolicySnapshot snap = load_checked(f.checkpoint, cfg, err);
    const std::string dir = out_dir(f);
    ensure_dir(dir);
    write_manifest(dir, "eval", cfg, "# checkpoint: " + f.checkpoint + "\n");
    std::vector<StepRow> log;
    const EvalReport rep = evaluate(snap.network, setup_of(cfg), cfg.eval.skill, cfg.eval.matches, cfg.eval.seed, &log);
    write_match_log_csv(join(dir, "match_log.csv"), log);
    emit_reports(dir, "eval_report", snap.meta, {rep}, out);
    return kExitOk;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(f, "sweep");
    const PolicySnapshot snap = load_checked(f.checkpoint, cfg, err);
    const std::string dir = out_dir(f);
    ensure_dir(dir);
    write_manifest(dir, "sweep", cfg, "# checkpoint: " + f.checkpoint + "\n");
    std::vector<StepRow> log;
    const auto reports = skill_sweep(snap.network, setup_of(cfg), cfg.eval.sweep_skills, cfg.eval.sweep_matches,
                                     cfg.eval.seed, &log);
    write_match_log_csv(join(dir, "match_log.csv"), log);
    emit_reports(dir, "sweep_report", snap.meta, reports, out);
    return kExitOk;
}

int cmd_ablate(const Flags& f, std::ostream& out) {
    RunConfig base = resolve(f, "ablate");
    const std::string dir = out_dir(f);
    ensure_dir(dir);
    write_manifest(dir, "ablate", base);
    std::vector<std::pair<Variant, EvalReport>> paired;
    for (Variant v : {Variant::DuelingDDQN, Variant::VanillaDQN}) {
        RunConfig cfg = base;
        cfg.train.agent.variant = v;
        const std::string sub = join(dir, std::string(name_of(v)));
        ensure_dir(sub);
        write_manifest(sub, "ablate/" + std::string(name_of(v)), cfg);
        out << "training " << name_of(v) << "\n";
        const TrainResult r = run_training(cfg, sub, {}, out);
        if (r.final_checkpoint.empty()) throw ValidationError("ablate needs episodes >= 1");
        const PolicySnapshot snap = load_policy(r.final_checkpoint, std::string(name_of(v)));
        std::vector<StepRow> log;
        const EvalReport rep = evaluate(snap.network, setup_of(cfg), cfg.eval.skill, cfg.eval.matches,
                                        cfg.eval.seed, &log);
        write_match_log_csv(join(sub, "match_log.csv"), log);
        emit_reports(sub, "eval_report", snap.meta, {rep}, out);
        paired.emplace_back(v, rep);
    }
    std::string csv = "variant,skill,matches,wins,win_rate,mean_length,serve_win_pct\n";
    for (const auto& [v, rep] : paired) {
        csv += std::string(name_of(v)) + "," + fmt(rep.skill) + "," + std::to_string(rep.matches) + "," +
               std::to_string(rep.wins) + "," + fmt(rep.win_rate) + "," + fmt(rep.mean_length) + "," +
               (rep.serve_win_pct ? fmt(*rep.serve_win_pct) : std::string()) + "\n";
    }
    write_file_atomic(join(dir, "ablation.csv"), {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
    const double gap = paired[0].second.win_rate - paired[1].second.win_rate;
    out << "\nablation at skill " << fmt(base.eval.skill) << " over " << base.eval.matches << " matches\n"
        << "  dueling_ddqn win rate " << fmt(paired[0].second.win_rate) << "\n"
        << "  vanilla_dqn  win rate " << fmt(paired[1].second.win_rate) << "\n"
        << "  gap " << fmt(100.0 * gap) << " pp\n";
    return kExitOk;
}

int cmd_analyze(const Flags& f, std::ostream& out) {
    if (f.log.empty()) throw ValidationError("analyze needs a match log path");
    if (!fs::is_regular_file(f.log)) throw ValidationError("match log not found: " + f.log);
    const auto rows = read_match_log_csv(f.log);
    const auto reports = reports_from_log(rows);
    const std::string dir = out_dir(f);
    ensure_dir(dir);
    AgentMeta meta;
    if (!f.checkpoint.empty()) {
        if (!fs::is_regular_file(f.checkpoint)) throw ValidationError("checkpoint not found: " + f.checkpoint);
        meta = load_policy(f.checkpoint).meta;
    }
    emit_reports(dir, "analysis_report", meta, reports, out);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"courtforge: tennis strategy learning with dueling double DQN"};
    app.require_subcommand(1);
    Flags f;

    auto* train = app.add_subcommand("train", "train an agent");
    add_common(train, f);
    train->add_option("--checkpoint", f.checkpoint, "resume from this checkpoint");
    train->add_option("--skill", f.skill, "train at one fixed opponent skill");

    auto* eval = app.add_subcommand("eval", "greedy evaluation at one skill");
    add_common(eval, f);
    eval->add_option("--checkpoint", f.checkpoint, "agent checkpoint")->required();
    eval->add_option("--skill", f.skill, "opponent skill");
    eval->add_option("--matches", f.matches, "number of matches");

    auto* sweep = app.add_subcommand("sweep", "greedy evaluation across opponent skills");
    add_common(sweep, f);
    sweep->add_option("--checkpoint", f.checkpoint, "agent checkpoint")->required();
    sweep->add_option("--matches", f.matches, "matches per skill");

    auto* ablate = app.add_subcommand("ablate", "train and evaluate both variants under one config");
    add_common(ablate, f);
    ablate->add_option("--skill", f.skill, "evaluation skill");
    ablate->add_option("--matches", f.matches, "evaluation matches");

    auto* analyze = app.add_subcommand("analyze", "rebuild reports from a stored match log");
    add_common(analyze, f);
    analyze->add_option("log", f.log, "match_log.csv written by eval or sweep")->required();
    analyze->add_option("--checkpoint", f.checkpoint, "checkpoint for report metadata");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (train->parsed()) return cmd_train(f, out);
        if (eval->parsed()) return cmd_eval(f, out, err);
        if (sweep->parsed()) return cmd_sweep(f, out, err);
        if (ablate->parsed()) return cmd_ablate(f, out);
        if (analyze->parsed()) return cmd_analyze(f, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const CheckpointError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitValidation;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace courtforge::cli
