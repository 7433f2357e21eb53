#include "voi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "voi/rng.hpp"

namespace voi {

namespace {

constexpr uint64_t kTruthStream = 0x74727574ULL;   // ground-truth sampling
constexpr uint64_t kAnswerStream = 0x616e7377ULL;  // per-turn answer sampling

double row_max_utility(const TaskSpec& task, int truth) {
  double best = task.utility.at(truth, 0);
  for (int a = 1; a < task.num_actions(); ++a) best = std::max(best, task.utility.at(truth, a));
  return best;
}

}  // namespace

std::vector<int> EpisodeLog::asked_questions() const {
  std::vector<int> out;
  out.reserve(turns.size());
  for (const TurnRecord& t : turns) out.push_back(t.question);
  return out;
}

double net_utility(double raw, int turns, double cost_per_question) {
  if (turns < 0) fail(Errc::bad_config, "turn count cannot be negative");
  if (cost_per_question < 0) fail(Errc::bad_config, "cost cannot be negative");
  return raw - turns * cost_per_question;
}

EpisodeLog run_episode(const PolicyConfig& policy_cfg, const TaskSpec& task, Estimator& estimator,
                       const CostModel& cost, uint64_t seed, const EpisodeOptions& options) {
  auto start = std::chrono::steady_clock::now();

  EpisodeLog log;
  log.task = task.name;
  log.task_instance = task.name;
  log.policy = policy_cfg;
  log.backend = estimator.id();
  log.seed = seed;
  log.cost = cost.per_question_cost;
  log.k_max = options.k_max > 0 ? options.k_max : task.k_max_default;

  try {
    policy_cfg.validate();
    std::unique_ptr<Policy> policy = make_policy(policy_cfg);

    int truth;
    if (task.fixed_truth) {
      truth = *task.fixed_truth;
    } else {
      std::mt19937_64 truth_rng = make_rng(mix64(seed, kTruthStream));
      truth = sample_index(task.prior.probs, truth_rng);
    }
    log.truth = truth;
    log.truth_label = task.hypotheses[truth].label;

    int budget = options.candidate_budget;
    if (budget <= 0)
      budget = estimator.caps().supports_exact_likelihood ? task.num_questions() : 5;

    BeliefState belief = estimator.prior(task);
    belief.validate();
    DialogueHistory history;
    std::vector<int> asked;
    std::optional<int> committed;

    for (int turn = 0; turn < log.k_max; ++turn) {
      std::vector<int> candidates =
          estimator.candidate_questions(task, belief, asked, budget);
      VoiReport report;
      bool report_filled = false;
      DecisionContext ctx{task,    belief,    candidates, cost,     turn,
                          log.k_max, estimator, history,   &report, &report_filled};
      PolicyDecision decision = policy->decide(ctx);
      if (is_commit(decision)) {
        committed = commit_action(decision);
        break;
      }

      int q = clarify_question(decision);
      int answer;
      if (options.answer_override) {
        answer = options.answer_override(q, turn);
      } else {
        // Substream per (seed, turn): answer draws stay aligned across runs
        // whose asked-question prefixes agree.
        std::mt19937_64 rng = make_rng(mix64(seed, kAnswerStream, static_cast<uint64_t>(turn)));
        answer = simulate_answer(task, truth, q, rng);
      }

      belief = estimator.posterior(task, belief, history, q, answer);
      belief.validate();
      history.push_back({q, answer});
      asked.push_back(q);
      TurnRecord record;
      record.question = q;
      record.answer = answer;
      record.belief_after = belief;
      if (report_filled) record.report = std::move(report);
      log.turns.push_back(std::move(record));
    }

    if (committed) {
      log.final_action = *committed;
    } else {
      std::vector<int> no_candidates;
      DecisionContext ctx{task,      belief,    no_candidates, cost,    log.k_max,
                          log.k_max, estimator, history,       nullptr, nullptr};
      log.final_action = policy->final_action(ctx);
    }
    log.final_action_label = task.actions.at(log.final_action);
    log.final_belief = belief;
    log.raw_utility = terminal_utility(task, truth, log.final_action);
    log.correct = log.raw_utility >= row_max_utility(task, truth) - 1e-12;

    if (cost.is_constant()) {
      log.net_utility = net_utility(log.raw_utility, log.turn_count(), cost.per_question_cost);
    } else {
      double spent = 0.0;
      for (int q : log.asked_questions()) spent += cost.cost(q);
      log.net_utility = log.raw_utility - spent;
    }
  } catch (const Error& e) {
    log.failed = true;
    log.error = e.what();
  }

  log.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return log;
}

EpisodeLog run_voi_policy(const TaskSpec& task, Estimator& estimator, const CostModel& cost,
                          int k_max, uint64_t seed) {
  EpisodeOptions options;
  options.k_max = k_max;
  return run_episode(PolicyConfig::voi(), task, estimator, cost, seed, options);
}

// ---- Aggregation -------------------------------------------------------------------

SummaryTable summarize(const std::vector<EpisodeLog>& logs) {
  struct Acc {
    int episodes = 0;
    int failures = 0;
    double acc = 0, turns = 0, raw = 0, net = 0, net_sq = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string, double>, Acc> cells;
  for (const EpisodeLog& log : logs) {
    Acc& a = cells[{log.task, policy_kind_name(log.policy.kind), log.policy.parameter(),
                    log.cost}];
    if (log.failed) {
      ++a.failures;
      continue;
    }
    ++a.episodes;
    a.acc += log.correct ? 1.0 : 0.0;
    a.turns += log.turn_count();
    a.raw += log.raw_utility;
    a.net += log.net_utility;
    a.net_sq += log.net_utility * log.net_utility;
  }

  SummaryTable table;
  for (const auto& [key, a] : cells) {
    SummaryRow row;
    std::tie(row.task, row.policy, row.parameter, row.cost) = key;
    row.episodes = a.episodes;
    row.failures = a.failures;
    if (a.episodes > 0) {
      row.mean_accuracy = a.acc / a.episodes;
      row.mean_turns = a.turns / a.episodes;
      row.mean_raw_utility = a.raw / a.episodes;
      row.mean_net_utility = a.net / a.episodes;
      if (a.episodes > 1) {
        double var =
            (a.net_sq - a.net * a.net / a.episodes) / (a.episodes - 1);
        row.stderr_net_utility = std::sqrt(std::max(0.0, var) / a.episodes);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

const SummaryRow* SummaryTable::find(const std::string& task, const std::string& policy,
                                     const std::string& parameter, double cost) const {
  for (const SummaryRow& row : rows)
    if (row.task == task && row.policy == policy && row.parameter == parameter &&
        row.cost == cost)
      return &row;
  return nullptr;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string summary_tsv(const SummaryTable& table) {
  std::string out =
      "task\tpolicy\tparameter\tcost\tepisodes\tfailures\tmean_accuracy\tmean_turns\t"
      "mean_raw_utility\tmean_net_utility\tstderr_net_utility\n";
  for (const SummaryRow& r : table.rows) {
    out += r.task + "\t" + r.policy + "\t" + (r.parameter.empty() ? "-" : r.parameter) + "\t" +
           fmt(r.cost) + "\t" + std::to_string(r.episodes) + "\t" + std::to_string(r.failures) +
           "\t" + fmt(r.mean_accuracy) + "\t" + fmt(r.mean_turns) + "\t" +
           fmt(r.mean_raw_utility) + "\t" + fmt(r.mean_net_utility) + "\t" +
           fmt(r.stderr_net_utility) + "\n";
  }
  return out;
}

std::string cost_ablation_tsv(const SummaryTable& table) {
  // Collect (task, cost) groups; baselines are every policy except "voi".
  std::map<std::pair<std::string, double>, std::vector<const SummaryRow*>> groups;
  for (const SummaryRow& row : table.rows) groups[{row.task, row.cost}].push_back(&row);

  std::string out =
      "task\tcost\tbest_baseline\tr_max\tsecond_best\tr_second\tr_voi\t"
      "voi_minus_max\tvoi_minus_second\n";
  for (const auto& [key, rows] : groups) {
    const SummaryRow* best = nullptr;
    const SummaryRow* second = nullptr;
    const SummaryRow* voi = nullptr;
    for (const SummaryRow* row : rows) {
      if (row->policy == "voi") {
        voi = row;
        continue;
      }
      if (!best || row->mean_net_utility > best->mean_net_utility) {
        second = best;
        best = row;
      } else if (!second || row->mean_net_utility > second->mean_net_utility) {
        second = row;
      }
    }
    if (!voi || !best) continue;
    auto name = [](const SummaryRow* r) {
      return r->parameter.empty() ? r->policy : r->policy + "(" + r->parameter + ")";
    };
    out += key.first + "\t" + fmt(key.second) + "\t" + name(best) + "\t" +
           fmt(best->mean_net_utility) + "\t" + (second ? name(second) : "-") + "\t" +
           (second ? fmt(second->mean_net_utility) : "-") + "\t" +
           fmt(voi->mean_net_utility) + "\t" +
           fmt(voi->mean_net_utility - best->mean_net_utility) + "\t" +
           (second ? fmt(voi->mean_net_utility - second->mean_net_utility) : "-") + "\n";
  }
  return out;
}

std::string utility_curve_tsv(const SummaryTable& table) {
  std::string out = "task\tpolicy\tparameter\tcost\tmean_turns\tmean_net_utility\n";
  for (const SummaryRow& r : table.rows)
    out += r.task + "\t" + r.policy + "\t" + (r.parameter.empty() ? "-" : r.parameter) + "\t" +
           fmt(r.cost) + "\t" + fmt(r.mean_turns) + "\t" + fmt(r.mean_net_utility) + "\n";
  return out;
}

// ---- Sweeps ----------------------------------------------------------------------------

std::vector<PolicyConfig> default_policy_grid(bool include_adaptive) {
  std::vector<PolicyConfig> grid;
  grid.push_back(PolicyConfig::no_question());
  for (int k : {0, 5, 10, 15, 20}) grid.push_back(PolicyConfig::fixed_round(k));
  for (double tau : {0.5, 0.7, 0.9}) grid.push_back(PolicyConfig::confidence(tau));
  if (include_adaptive) grid.push_back(PolicyConfig::adaptive());
  grid.push_back(PolicyConfig::voi());
  return grid;
}

SweepResult run_sweep(const SweepConfig& config, Estimator& estimator) {
  if (config.tasks.empty() || config.policies.empty() || config.costs.empty())
    fail(Errc::bad_config, "sweep grids must be non-empty");
  std::vector<uint64_t> seeds = config.seeds;
  if (seeds.empty()) fail(Errc::bad_config, "sweep needs at least one seed");

  struct Cell {
    std::string task;
    PolicyConfig policy;
    double cost;
  };
  std::vector<Cell> cells;
  for (const std::string& task : config.tasks)
    for (const PolicyConfig& policy : config.policies)
      for (double cost : config.costs) cells.push_back({task, policy, cost});

  // Seed-independent tasks are built once and shared.
  std::map<std::string, TaskSpec> shared_tasks;
  for (const std::string& selector : config.tasks) {
    if (selector_is_seed_dependent(selector)) continue;
    shared_tasks.emplace(selector, make_task(selector, 0, config.task_params));
  }
  // The mixed selector alternates between two cached guessing tasks.
  bool wants_mixed = std::count(config.tasks.begin(), config.tasks.end(), "mixed20q") > 0;
  if (wants_mixed) {
    shared_tasks.emplace("animal", make_task("animal", 0, config.task_params));
    shared_tasks.emplace("medical", make_task("medical", 0, config.task_params));
  }

  const size_t jobs_total = cells.size() * seeds.size();
  std::vector<EpisodeLog> logs(jobs_total);
  std::vector<std::pair<size_t, std::string>> failures;  // (cell index, message)
  std::mutex failures_mutex;
  std::atomic<size_t> next_job{0};

  auto worker = [&] {
    for (;;) {
      size_t job = next_job.fetch_add(1);
      if (job >= jobs_total) return;
      size_t cell_index = job / seeds.size();
      uint64_t seed = seeds[job % seeds.size()];
      const Cell& cell = cells[cell_index];
      try {
        const TaskSpec* task = nullptr;
        TaskSpec scratch;
        if (cell.task == "mixed20q") {
          task = &shared_tasks.at(seed % 2 == 0 ? "animal" : "medical");
        } else if (selector_is_seed_dependent(cell.task)) {
          scratch = make_task(cell.task, seed, config.task_params);
          task = &scratch;
        } else {
          task = &shared_tasks.at(cell.task);
        }
        CostModel cost{cell.cost, {}};
        EpisodeOptions options;
        options.k_max = config.k_max;
        EpisodeLog log = run_episode(cell.policy, *task, estimator, cost, seed, options);
        log.task = cell.task;  // group under the sweep selector
        logs[job] = std::move(log);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failures.push_back({cell_index, e.what()});
        logs[job].failed = true;
        logs[job].error = e.what();
        logs[job].task = cell.task;
        logs[job].policy = cell.policy;
        logs[job].cost = cell.cost;
        logs[job].seed = seed;
      }
    }
  };

  int workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(jobs_total));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  SweepResult result;
  result.logs = std::move(logs);
  result.table = summarize(result.logs);
  std::sort(failures.begin(), failures.end());
  for (const auto& [cell_index, message] : failures) {
    const Cell& cell = cells[cell_index];
    result.failed_cells.push_back(cell.task + "/" + cell.policy.label() + "/c=" +
                                  fmt(cell.cost) + ": " + message);
  }
  return result;
}

// ---- Calibration ------------------------------------------------------------------------

std::vector<CalibrationBin> calibration_report(const std::vector<EpisodeLog>& logs,
                                               double bin_width) {
  if (bin_width <= 0.0 || bin_width > 1.0)
    fail(Errc::bad_config, "bin width must be in (0, 1]");
  int bins = static_cast<int>(std::ceil(1.0 / bin_width - 1e-12));
  std::vector<CalibrationBin> out(bins);
  std::vector<double> conf_sum(bins, 0.0);
  std::vector<int> correct_count(bins, 0);
  for (int i = 0; i < bins; ++i) {
    out[i].lo = i * bin_width;
    out[i].hi = std::min(1.0, (i + 1) * bin_width);
  }

  for (const EpisodeLog& log : logs) {
    if (log.failed || log.final_belief.probs.empty()) continue;
    auto [argmax, confidence] = max_belief(log.final_belief);
    int bin = std::min(bins - 1, static_cast<int>(confidence / bin_width));
    ++out[bin].count;
    conf_sum[bin] += confidence;
    // the calibration target: does the belief argmax name the true hypothesis?
    correct_count[bin] += (argmax == log.truth) ? 1 : 0;
  }
  for (int i = 0; i < bins; ++i) {
    if (out[i].count > 0) {
      out[i].mean_confidence = conf_sum[i] / out[i].count;
      out[i].accuracy = static_cast<double>(correct_count[i]) / out[i].count;
    }
  }
  return out;
}

std::string calibration_tsv(const std::vector<CalibrationBin>& bins) {
  std::string out = "bin_lo\tbin_hi\tcount\tmean_confidence\taccuracy\n";
  for (const CalibrationBin& b : bins)
    out += fmt(b.lo) + "\t" + fmt(b.hi) + "\t" + std::to_string(b.count) + "\t" +
           (b.count ? fmt(b.mean_confidence) : "-") + "\t" +
           (b.accuracy ? fmt(*b.accuracy) : "n/a") + "\n";
  return out;
}

bool is_question_prefix(const EpisodeLog& higher_cost, const EpisodeLog& lower_cost) {
  std::vector<int> hi = higher_cost.asked_questions();
  std::vector<int> lo = lower_cost.asked_questions();
  if (hi.size() > lo.size()) return false;
  return std::equal(hi.begin(), hi.end(), lo.begin());
}

}  // namespace voi
