#include "courtforge/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "courtforge/byte_io.hpp"
#include "courtforge/errors.hpp"
#include "json.hpp"

namespace courtforge {

using json = nlohmann::ordered_json;

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
    return std::string(buf, res.ptr);
}

double parse_real(const std::string& text, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ValidationError(context + ": not a number: '" + text + "'");
    }
    return v;
}

namespace {

long long parse_integer(const std::string& text, const std::string& context) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ValidationError(context + ": not an integer: '" + text + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

void write_text(const std::string& path, const std::string& text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open for reading");
    return in;
}

// Reads the header, then calls row(cells, location) for each data line.
template <typename RowFn>
void read_table(std::istream& in, const std::string& origin, const char* header, std::size_t columns,
                RowFn row) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != header) {
        throw ValidationError(origin + ": header does not match '" + std::string(header) + "'");
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        const std::string where = origin + ":" + std::to_string(line_no);
        if (cells.size() != columns) {
            throw ValidationError(where + ": expected " + std::to_string(columns) + " columns, got " +
                                  std::to_string(cells.size()));
        }
        row(cells, where);
    }
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

std::string metrics_csv_text(std::span<const EpisodeMetrics> rows) {
    std::string out = std::string(kMetricsHeader) + "\n";
    for (const EpisodeMetrics& m : rows) {
        out += std::to_string(m.episode) + "," + format_real(m.skill) + "," + format_real(m.epsilon) + "," +
               format_real(m.reward) + "," + std::to_string(m.steps) + "," + (m.win ? "1" : "0") + "," +
               format_real(m.mean_loss) + "," + format_real(m.rolling_win_rate) + "\n";
    }
    return out;
}

void write_metrics_csv(const std::string& path, std::span<const EpisodeMetrics> rows) {
    write_text(path, metrics_csv_text(rows));
}

std::vector<EpisodeMetrics> parse_metrics_csv(std::istream& in, const std::string& origin) {
    std::vector<EpisodeMetrics> out;
    read_table(in, origin, kMetricsHeader, 8, [&](const std::vector<std::string>& c, const std::string& w) {
        EpisodeMetrics m;
        m.episode = static_cast<int>(parse_integer(c[0], w));
        m.skill = parse_real(c[1], w);
        m.epsilon = parse_real(c[2], w);
        m.reward = parse_real(c[3], w);
        m.steps = static_cast<int>(parse_integer(c[4], w));
        const auto win = parse_integer(c[5], w);
        if (win != 0 && win != 1) throw ValidationError(w + ": win must be 0 or 1");
        m.win = win == 1;
        m.mean_loss = parse_real(c[6], w);
        m.rolling_win_rate = parse_real(c[7], w);
        out.push_back(m);
    });
    return out;
}

std::vector<EpisodeMetrics> read_metrics_csv(const std::string& path) {
    auto in = open_for_read(path);
    return parse_metrics_csv(in, path);
}

namespace {

std::string_view side_name(Side s) { return s == Side::Agent ? "agent" : "opponent"; }

}  // namespace

std::string match_log_csv_text(std::span<const StepRow> rows) {
    std::string out = std::string(kMatchLogHeader) + "\n";
    for (const StepRow& r : rows) {
        out += std::to_string(r.match) + "," + std::to_string(r.step) + "," + format_real(r.skill) + "," +
               std::string(name_of(r.action)) + "," + (r.agent_served ? "1" : "0") + "," +
               std::string(name_of(r.event)) + "," + format_real(r.reward) + "," + (r.done ? "1" : "0") + "," +
               (r.winner ? std::string(side_name(*r.winner)) : std::string()) + "\n";
    }
    return out;
}

void write_match_log_csv(const std::string& path, std::span<const StepRow> rows) {
    write_text(path, match_log_csv_text(rows));
}

std::vector<StepRow> parse_match_log_csv(std::istream& in, const std::string& origin) {
    std::vector<StepRow> out;
    read_table(in, origin, kMatchLogHeader, 9, [&](const std::vector<std::string>& c, const std::string& w) {
        StepRow r;
        r.match = static_cast<int>(parse_integer(c[0], w));
        r.step = static_cast<int>(parse_integer(c[1], w));
        r.skill = parse_real(c[2], w);
        const auto action = action_from_name(c[3]);
        if (!action) throw ValidationError(w + ": unknown action '" + c[3] + "'");
        r.action = *action;
        r.agent_served = parse_integer(c[4], w) != 0;
        bool found = false;
        for (PointEvent e : {PointEvent::AgentWins, PointEvent::AgentLoses, PointEvent::Continue}) {
            if (name_of(e) == c[5]) {
                r.event = e;
                found = true;
            }
        }
        if (!found) throw ValidationError(w + ": unknown event '" + c[5] + "'");
        r.reward = parse_real(c[6], w);
        r.done = parse_integer(c[7], w) != 0;
        if (c[8] == "agent") {
            r.winner = Side::Agent;
        } else if (c[8] == "opponent") {
            r.winner = Side::Opponent;
        } else if (!c[8].empty()) {
            throw ValidationError(w + ": unknown winner '" + c[8] + "'");
        }
        out.push_back(r);
    });
    return out;
}

std::vector<StepRow> read_match_log_csv(const std::string& path) {
    auto in = open_for_read(path);
    return parse_match_log_csv(in, path);
}

namespace {

json report_to_json(const EvalReport& r) {
    json j;
    j["skill"] = r.skill;
    j["matches"] = r.matches;
    j["wins"] = r.wins;
    j["win_rate"] = r.win_rate;
    j["reward_mean"] = r.reward_mean;
    j["reward_std"] = r.reward_std;
    j["mean_length"] = r.mean_length;
    j["serve_points"] = r.serve_points;
    j["serve_won"] = r.serve_won;
    j["return_points"] = r.return_points;
    j["return_won"] = r.return_won;
    j["serve_win_pct"] = opt_json(r.serve_win_pct);
    j["return_win_pct"] = opt_json(r.return_win_pct);
    json counts = json::object();
    json shares = json::object();
    for (Phase p : {Phase::Serve, Phase::Return, Phase::Rally}) shares[std::string(name_of(p))] = json::object();
    for (int i = 0; i < kNumActions; ++i) {
        const ActionId a = action_from_index(i);
        counts[std::string(name_of(a))] = r.action_counts[i];
        shares[std::string(name_of(phase_of(a)))][std::string(name_of(a))] = opt_json(r.share(a));
    }
    j["action_counts"] = counts;
    j["action_shares"] = shares;
    const DefensiveShares d = defensive_shares(r.action_counts);
    j["return_block_share"] = opt_json(d.return_block);
    j["defensive_lob_share"] = opt_json(d.defensive_lob);
    return j;
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    r.skill = j.at("skill").get<double>();
    r.matches = j.at("matches").get<int>();
    r.wins = j.at("wins").get<int>();
    r.win_rate = j.at("win_rate").get<double>();
    r.reward_mean = j.at("reward_mean").get<double>();
    r.reward_std = j.at("reward_std").get<double>();
    r.mean_length = j.at("mean_length").get<double>();
    r.serve_points = j.at("serve_points").get<int>();
    r.serve_won = j.at("serve_won").get<int>();
    r.return_points = j.at("return_points").get<int>();
    r.return_won = j.at("return_won").get<int>();
    r.serve_win_pct = opt_from_json(j.at("serve_win_pct"));
    r.return_win_pct = opt_from_json(j.at("return_win_pct"));
    const json& counts = j.at("action_counts");
    for (int i = 0; i < kNumActions; ++i) {
        r.action_counts[i] = counts.at(std::string(name_of(action_from_index(i)))).get<int>();
    }
    return r;
}

}  // namespace

std::string report_json_text(const ReportBundle& bundle) {
    json root;
    root["version"] = kReportSchemaVersion;
    root["agent_meta"] = {{"variant", std::string(name_of(bundle.meta.variant))},
                          {"config_hash", format_hash(bundle.meta.config_hash)},
                          {"episode", bundle.meta.episode}};
    json per = json::array();
    for (const EvalReport& r : bundle.per_skill) per.push_back(report_to_json(r));
    root["per_skill"] = per;
    return root.dump(2) + "\n";
}

ReportBundle parse_report_json(const std::string& text, const std::string& origin) {
    try {
        const json root = json::parse(text);
        const int version = root.at("version").get<int>();
        if (version != kReportSchemaVersion) {
            throw ValidationError(origin + ": unsupported report schema version " + std::to_string(version));
        }
        ReportBundle b;
        const json& meta = root.at("agent_meta");
        const auto variant = variant_from_name(meta.at("variant").get<std::string>());
        if (!variant) throw ValidationError(origin + ": unknown variant in agent_meta");
        b.meta.variant = *variant;
        const std::string hash = meta.at("config_hash").get<std::string>();
        b.meta.config_hash = std::stoull(hash, nullptr, 16);
        b.meta.episode = meta.at("episode").get<std::uint64_t>();
        for (const json& r : root.at("per_skill")) b.per_skill.push_back(report_from_json(r));
        return b;
    } catch (const json::exception& e) {
        throw ValidationError(origin + ": malformed report: " + e.what());
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ValidationError*>(&e)) throw;
        throw ValidationError(origin + ": malformed report: " + e.what());
    }
}

void write_report_json(const std::string& path, const ReportBundle& bundle) {
    write_text(path, report_json_text(bundle));
}

ReportBundle read_report_json(const std::string& path) {
    auto in = open_for_read(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_report_json(ss.str(), path);
}

std::vector<ReportCell> report_cells(std::span<const EvalReport> reports) {
    std::vector<ReportCell> cells;
    for (const EvalReport& r : reports) {
        const auto add = [&](const std::string& metric, double v) { cells.push_back({r.skill, metric, v}); };
        add("matches", r.matches);
        add("wins", r.wins);
        add("win_rate", r.win_rate);
        add("reward_mean", r.reward_mean);
        add("reward_std", r.reward_std);
        add("mean_length", r.mean_length);
        add("serve_points", r.serve_points);
        add("serve_won", r.serve_won);
        add("return_points", r.return_points);
        add("return_won", r.return_won);
        if (r.serve_win_pct) add("serve_win_pct", *r.serve_win_pct);
        if (r.return_win_pct) add("return_win_pct", *r.return_win_pct);
        for (int i = 0; i < kNumActions; ++i) {
            const ActionId a = action_from_index(i);
            add("count_" + std::string(name_of(a)), r.action_counts[i]);
        }
        for (int i = 0; i < kNumActions; ++i) {
            const ActionId a = action_from_index(i);
            if (const auto s = r.share(a)) add("share_" + std::string(name_of(a)), *s);
        }
    }
    return cells;
}

std::string report_csv_text(std::span<const EvalReport> reports) {
    std::string out = std::string(kReportCsvHeader) + "\n";
    for (const ReportCell& c : report_cells(reports)) {
        out += format_real(c.skill) + "," + c.metric + "," + format_real(c.value) + "\n";
    }
    return out;
}

void write_report_csv(const std::string& path, std::span<const EvalReport> reports) {
    write_text(path, report_csv_text(reports));
}

std::vector<ReportCell> parse_report_csv(std::istream& in, const std::string& origin) {
    std::vector<ReportCell> out;
    read_table(in, origin, kReportCsvHeader, 3, [&](const std::vector<std::string>& c, const std::string& w) {
        out.push_back({parse_real(c[0], w), c[1], parse_real(c[2], w)});
    });
    return out;
}

std::string bias_csv_text(std::span<const DefensiveBiasRow> rows) {
    std::string out = std::string(kBiasHeader) + "\n";
    for (const DefensiveBiasRow& r : rows) {
        out += format_real(r.skill) + "," + opt_cell(r.shares.return_block) + "," + opt_cell(r.reference_block) +
               "," + opt_cell(r.delta_block) + "," + opt_cell(r.shares.defensive_lob) + "," +
               opt_cell(r.reference_lob) + "," + opt_cell(r.delta_lob) + "\n";
    }
    return out;
}

void write_bias_csv(const std::string& path, std::span<const DefensiveBiasRow> rows) {
    write_text(path, bias_csv_text(rows));
}

namespace {

std::string pct(const std::optional<double>& v) {
    if (!v) return "   n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%6.1f", 100.0 * *v);
    return buf;
}

std::string signed_pp(const std::optional<double>& v) {
    if (!v) return "   n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+6.1f", 100.0 * *v);
    return buf;
}

}  // namespace

std::string format_report_table(std::span<const EvalReport> reports) {
    std::string out = "skill  matches  win%    reward(mean±sd)    length  serve%  return%\n";
    char buf[160];
    for (const EvalReport& r : reports) {
        std::snprintf(buf, sizeof buf, "%.2f   %7d  %s  %8.2f ± %-7.2f  %7.1f  %s  %s\n", r.skill, r.matches,
                      pct(r.win_rate).c_str(), r.reward_mean, r.reward_std, r.mean_length,
                      pct(r.serve_win_pct).c_str(), pct(r.return_win_pct).c_str());
        out += buf;
    }
    return out;
}

std::string format_bias_table(std::span<const DefensiveBiasRow> rows) {
    std::string out = "skill  block%  ref     delta   lob%    ref     delta\n";
    char buf[160];
    for (const DefensiveBiasRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.2f   %s  %s  %s  %s  %s  %s\n", r.skill, pct(r.shares.return_block).c_str(),
                      pct(r.reference_block).c_str(), signed_pp(r.delta_block).c_str(),
                      pct(r.shares.defensive_lob).c_str(), pct(r.reference_lob).c_str(),
                      signed_pp(r.delta_lob).c_str());
        out += buf;
    }
    return out;
}

}  // namespace courtforge
