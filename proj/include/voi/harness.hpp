#pragma once

#include <functional>
#include <iosfwd>
#include <optional>

#include "voi/policies.hpp"

namespace voi {

inline constexpr int kLogSchemaVersion = 1;

struct TurnRecord {
  int question = -1;
  int answer = -1;
  BeliefState belief_after;
  std::optional<VoiReport> report;
};

// Full trace of one dialogue episode.
struct EpisodeLog {
  int schema_version = kLogSchemaVersion;
  std::string task;           // selector the episode ran under
  std::string task_instance;  // concrete task name (differs for mixed sweeps)
  PolicyConfig policy;
  std::string backend;
  uint64_t seed = 0;
  int truth = -1;
  std::string truth_label;
  double cost = 0.0;
  int k_max = 0;
  std::vector<TurnRecord> turns;
  int final_action = -1;
  std::string final_action_label;
  BeliefState final_belief;  // belief at commit time
  double raw_utility = 0.0;
  double net_utility = 0.0;
  bool correct = false;  // final action is optimal under the true hypothesis
  bool failed = false;
  std::string error;
  double wall_time_ms = 0.0;

  int turn_count() const { return static_cast<int>(turns.size()); }
  std::vector<int> asked_questions() const;
};

// Fig. 2 accounting: raw minus linear dialogue cost.
double net_utility(double raw, int turns, double cost_per_question);

struct EpisodeOptions {
  int k_max = 0;             // 0: task default
  int candidate_budget = 0;  // 0: all questions (exact) or 5 (estimated backends)
  // Overrides the simulated user; used by the interactive mode. Receives
  // (question id, turn) and returns an answer id.
  std::function<int(int, int)> answer_override;
};

EpisodeLog run_episode(const PolicyConfig& policy, const TaskSpec& task, Estimator& estimator,
                       const CostModel& cost, uint64_t seed, const EpisodeOptions& options = {});

// Algorithm-level entry point for the greedy one-step-lookahead policy.
EpisodeLog run_voi_policy(const TaskSpec& task, Estimator& estimator, const CostModel& cost,
                          int k_max, uint64_t seed);

// ---- Persistence ---------------------------------------------------------------

// One JSON record per line. `include_timing=false` produces the canonical form
// used for byte-level determinism comparisons (wall time is the only
// non-deterministic field).
std::string log_to_json_line(const EpisodeLog& log, bool include_timing = true);
EpisodeLog log_from_json_line(const std::string& line);
void write_logs(const std::vector<EpisodeLog>& logs, const std::string& path,
                bool include_timing = true);
std::vector<EpisodeLog> read_logs(const std::string& path);

// ---- Aggregation ------------------------------------------------------------------

struct SummaryRow {
  std::string task;
  std::string policy;     // kind name
  std::string parameter;  // "k=5", "tau=0.70", "" when none
  double cost = 0.0;
  int episodes = 0;
  double mean_accuracy = 0.0;
  double mean_turns = 0.0;
  double mean_raw_utility = 0.0;
  double mean_net_utility = 0.0;
  double stderr_net_utility = 0.0;
  int failures = 0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  const SummaryRow* find(const std::string& task, const std::string& policy,
                         const std::string& parameter, double cost) const;
};

// Groups episode logs by (task, policy, parameter, cost). Failed episodes are
// counted but excluded from the means.
SummaryTable summarize(const std::vector<EpisodeLog>& logs);

std::string summary_tsv(const SummaryTable& table);

// Cost-ablation view: per (task, cost) the best and second-best baseline, the
// greedy lookahead policy's reward, and its margins over both.
std::string cost_ablation_tsv(const SummaryTable& table);

// Plot-ready utility-vs-rounds data: one row per (task, policy, parameter,
// cost) with mean turns as x and mean net utility as y.
std::string utility_curve_tsv(const SummaryTable& table);

// ---- Sweeps -------------------------------------------------------------------------

struct SweepConfig {
  std::vector<std::string> tasks;
  std::vector<PolicyConfig> policies;
  std::vector<double> costs = {0.01, 0.02, 0.05, 0.10, 0.20};
  std::vector<uint64_t> seeds;  // shared across cells; pairs comparisons by seed
  int k_max = 0;                // 0: task default
  int workers = 0;              // 0: hardware concurrency
  TaskParams task_params;
};

// The paper-style baseline grid plus the greedy lookahead policy.
std::vector<PolicyConfig> default_policy_grid(bool include_adaptive = false);

struct SweepResult {
  std::vector<EpisodeLog> logs;  // deterministic order: cell-major, then seed
  SummaryTable table;
  std::vector<std::string> failed_cells;
};

SweepResult run_sweep(const SweepConfig& config, Estimator& estimator);

// ---- Calibration ----------------------------------------------------------------------

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  double mean_confidence = 0.0;
  std::optional<double> accuracy;  // empty bins have no defined accuracy
};

// Bins episodes by the max-belief probability at commit time and reports the
// empirical accuracy of the belief argmax per bin.
std::vector<CalibrationBin> calibration_report(const std::vector<EpisodeLog>& logs,
                                               double bin_width = 0.2);

std::string calibration_tsv(const std::vector<CalibrationBin>& bins);

// Per-seed prefix check for the stop-time monotonicity property: with c_hi >
// c_lo and identical seeds, the questions asked at the higher cost must be a
// prefix of those asked at the lower cost.
bool is_question_prefix(const EpisodeLog& higher_cost, const EpisodeLog& lower_cost);

}  // namespace voi
