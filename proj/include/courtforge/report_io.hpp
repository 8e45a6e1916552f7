#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "courtforge/agent.hpp"
#include "courtforge/evaluation.hpp"
#include "courtforge/training.hpp"

namespace courtforge {

inline constexpr int kReportSchemaVersion = 1;

// Shortest text that reads back to the same double.
std::string format_real(double v);
double parse_real(const std::string& text, const std::string& context);

// metrics CSV: episode,skill,epsilon,reward,steps,win,mean_loss,rolling_win_rate
inline constexpr const char* kMetricsHeader = "episode,skill,epsilon,reward,steps,win,mean_loss,rolling_win_rate";
std::string metrics_csv_text(std::span<const EpisodeMetrics> rows);
void write_metrics_csv(const std::string& path, std::span<const EpisodeMetrics> rows);
std::vector<EpisodeMetrics> parse_metrics_csv(std::istream& in, const std::string& origin);
std::vector<EpisodeMetrics> read_metrics_csv(const std::string& path);

// match log CSV: one evaluation step per row.
inline constexpr const char* kMatchLogHeader = "match,step,skill,action,agent_served,event,reward,done,winner";
std::string match_log_csv_text(std::span<const StepRow> rows);
void write_match_log_csv(const std::string& path, std::span<const StepRow> rows);
std::vector<StepRow> parse_match_log_csv(std::istream& in, const std::string& origin);
std::vector<StepRow> read_match_log_csv(const std::string& path);

struct ReportBundle {
    AgentMeta meta;
    std::vector<EvalReport> per_skill;
};

// {version, agent_meta, per_skill: [...]}
std::string report_json_text(const ReportBundle& bundle);
ReportBundle parse_report_json(const std::string& text, const std::string& origin);
void write_report_json(const std::string& path, const ReportBundle& bundle);
ReportBundle read_report_json(const std::string& path);

// Flat table: skill,metric,value
inline constexpr const char* kReportCsvHeader = "skill,metric,value";
std::string report_csv_text(std::span<const EvalReport> reports);
void write_report_csv(const std::string& path, std::span<const EvalReport> reports);
// (skill, metric, value) triples in file order.
struct ReportCell {
    double skill = 0.0;
    std::string metric;
    double value = 0.0;

    friend bool operator==(const ReportCell&, const ReportCell&) = default;
};
std::vector<ReportCell> parse_report_csv(std::istream& in, const std::string& origin);
std::vector<ReportCell> report_cells(std::span<const EvalReport> reports);

inline constexpr const char* kBiasHeader =
    "skill,return_block_share,reference_block,delta_block,defensive_lob_share,reference_lob,delta_lob";
std::string bias_csv_text(std::span<const DefensiveBiasRow> rows);
void write_bias_csv(const std::string& path, std::span<const DefensiveBiasRow> rows);

// Human-readable table for terminals.
std::string format_report_table(std::span<const EvalReport> reports);
std::string format_bias_table(std::span<const DefensiveBiasRow> rows);

}  // namespace courtforge
