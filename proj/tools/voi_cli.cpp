// Command-line front end: single runs, grid sweeps, calibration tables,
// report generation from saved logs, and an interactive mode where a human
// answers the policy's questions.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "voi/harness.hpp"
#include "voi/llm.hpp"
#include "voi/rng.hpp"

namespace {

using namespace voi;

struct BackendFlags {
  std::string backend = "exact";
  std::string endpoint;
  std::string model = "gpt-4.1";
  std::string data_dir = VOI_DATA_DIR;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
  cmd->add_option("--backend", flags.backend, "Belief backend: exact or llm")
      ->check(CLI::IsMember({"exact", "llm"}))
      ->capture_default_str();
  cmd->add_option("--endpoint", flags.endpoint,
                  "Chat-completions base URL (llm backend). Credentials come from "
                  "the VOI_API_KEY environment variable, never from flags.");
  cmd->add_option("--model", flags.model, "Model name sent to the endpoint")
      ->capture_default_str();
  cmd->add_option("--data-dir", flags.data_dir, "Directory with bundled matrices and prompts")
      ->capture_default_str();
}

std::unique_ptr<Estimator> make_estimator(const BackendFlags& flags) {
  if (flags.backend == "exact") return std::make_unique<ExactEstimator>();
  if (flags.endpoint.empty())
    fail(Errc::bad_config, "--endpoint is required with --backend llm");
  LlmConfig config;
  config.endpoint = flags.endpoint;
  config.model = flags.model;
  config.prompt_dir = flags.data_dir + "/prompts";
  auto transport = std::make_shared<HttpChatTransport>(config.endpoint,
                                                       config.timeout_seconds,
                                                       config.api_key_env);
  return std::make_unique<LlmEstimator>(config, transport);
}

// "--seeds 100" means 0..99; "--seeds 3,17,5" is an explicit list.
std::vector<uint64_t> parse_seeds(const std::string& text) {
  std::vector<uint64_t> seeds;
  if (text.find(',') == std::string::npos) {
    size_t pos = 0;
    long long n = std::stoll(text, &pos);
    if (pos != text.size() || n <= 0)
      fail(Errc::bad_config, "--seeds needs a positive count or a comma list");
    for (long long s = 0; s < n; ++s) seeds.push_back(static_cast<uint64_t>(s));
    return seeds;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    seeds.push_back(static_cast<uint64_t>(std::stoull(item)));
  if (seeds.empty()) fail(Errc::bad_config, "--seeds list is empty");
  return seeds;
}

PolicyConfig build_policy(const std::string& name, std::optional<int> k,
                          std::optional<double> tau) {
  PolicyConfig config;
  config.kind = policy_kind_from_name(name);
  config.k = k;
  config.tau = tau;
  if (config.kind == PolicyKind::fixed_round && !config.k)
    fail(Errc::bad_config, "--policy fixed needs --k");
  if (config.kind == PolicyKind::confidence_threshold && !config.tau)
    fail(Errc::bad_config, "--policy confidence needs --tau");
  config.validate();
  return config;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write " + path);
  out << content;
}

TaskParams task_params_for(const BackendFlags& flags) {
  TaskParams params;
  params.data_dir = flags.data_dir;
  return params;
}

// ---- run ---------------------------------------------------------------------

struct RunArgs {
  BackendFlags backend;
  std::string task = "animal";
  std::string policy = "voi";
  std::optional<int> k;
  std::optional<double> tau;
  double cost = 0.05;
  int k_max = 0;
  uint64_t seed = 0;
  std::string seeds;  // overrides --seed when given
  std::string out = "-";
  bool no_timing = false;
};

int cmd_run(const RunArgs& args) {
  std::unique_ptr<Estimator> estimator = make_estimator(args.backend);
  PolicyConfig policy = build_policy(args.policy, args.k, args.tau);
  std::vector<uint64_t> seeds =
      args.seeds.empty() ? std::vector<uint64_t>{args.seed} : parse_seeds(args.seeds);
  TaskParams params = task_params_for(args.backend);
  CostModel cost{args.cost, {}};

  std::vector<EpisodeLog> logs;
  for (uint64_t seed : seeds) {
    TaskSpec task = make_task(args.task, seed, params);
    EpisodeOptions options;
    options.k_max = args.k_max;
    EpisodeLog log = run_episode(policy, task, *estimator, cost, seed, options);
    log.task = args.task;
    logs.push_back(std::move(log));
  }

  if (args.out == "-") {
    for (const EpisodeLog& log : logs)
      std::cout << log_to_json_line(log, !args.no_timing) << "\n";
  } else {
    write_logs(logs, args.out, !args.no_timing);
    std::cout << summary_tsv(summarize(logs));
  }
  return 0;
}

// ---- sweep --------------------------------------------------------------------

struct SweepArgs {
  BackendFlags backend;
  std::string task = "mixed20q";
  std::string policy;  // restricts the grid when given
  std::optional<int> k;
  std::optional<double> tau;
  std::string costs = "0.01,0.02,0.05,0.1,0.2";
  std::string seeds = "200";
  int k_max = 0;
  int workers = 0;
  std::string out = "sweep_out";
  bool no_timing = false;
};

int cmd_sweep(const SweepArgs& args) {
  std::unique_ptr<Estimator> estimator = make_estimator(args.backend);

  SweepConfig config;
  config.tasks = {args.task};
  if (args.policy.empty()) {
    config.policies = default_policy_grid(args.backend.backend == "llm");
  } else {
    config.policies = {build_policy(args.policy, args.k, args.tau)};
  }
  config.costs.clear();
  std::stringstream in(args.costs);
  std::string item;
  while (std::getline(in, item, ',')) config.costs.push_back(std::stod(item));
  if (config.costs.empty()) fail(Errc::bad_config, "--costs list is empty");
  config.seeds = parse_seeds(args.seeds);
  config.k_max = args.k_max;
  config.workers = args.workers;
  config.task_params = task_params_for(args.backend);

  SweepResult result = run_sweep(config, *estimator);

  std::filesystem::create_directories(args.out);
  write_logs(result.logs, args.out + "/episodes.jsonl", !args.no_timing);
  write_text(args.out + "/summary.tsv", summary_tsv(result.table));
  write_text(args.out + "/ablation.tsv", cost_ablation_tsv(result.table));
  write_text(args.out + "/curves.tsv", utility_curve_tsv(result.table));

  std::cout << summary_tsv(result.table);
  if (!result.failed_cells.empty()) {
    std::cerr << result.failed_cells.size() << " cell(s) reported failures:\n";
    for (const std::string& cell : result.failed_cells) std::cerr << "  " << cell << "\n";
  }
  return 0;
}

// ---- calibrate -----------------------------------------------------------------

struct CalibrateArgs {
  std::string logs;
  double bin_width = 0.2;
  std::string out = "-";
};

int cmd_calibrate(const CalibrateArgs& args) {
  std::vector<EpisodeLog> logs = read_logs(args.logs);
  std::string tsv = calibration_tsv(calibration_report(logs, args.bin_width));
  if (args.out == "-")
    std::cout << tsv;
  else
    write_text(args.out, tsv);
  return 0;
}

// ---- report --------------------------------------------------------------------

struct ReportArgs {
  std::string logs;
  std::string out = "report_out";
};

int cmd_report(const ReportArgs& args) {
  std::vector<EpisodeLog> logs = read_logs(args.logs);
  SummaryTable table = summarize(logs);
  std::filesystem::create_directories(args.out);
  write_text(args.out + "/summary.tsv", summary_tsv(table));
  write_text(args.out + "/ablation.tsv", cost_ablation_tsv(table));
  write_text(args.out + "/curves.tsv", utility_curve_tsv(table));
  std::cout << summary_tsv(table);
  return 0;
}

// ---- play ----------------------------------------------------------------------

struct PlayArgs {
  BackendFlags backend;
  std::string task = "toy";
  std::string policy = "voi";
  std::optional<int> k;
  std::optional<double> tau;
  double cost = 0.05;
  int k_max = 0;
  uint64_t seed = 0;
};

int read_answer(const Question& question) {
  while (true) {
    std::cout << question.text << "\n";
    for (size_t i = 0; i < question.answer_labels.size(); ++i)
      std::cout << "  [" << (i + 1) << "/" << question.answer_labels[i][0] << "] "
                << question.answer_labels[i] << "\n";
    std::cout << "> " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) fail(Errc::io, "input closed mid-dialogue");
    size_t a = line.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r\n");
    line = line.substr(a, b - a + 1);
    for (char& c : line) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    for (size_t i = 0; i < question.answer_labels.size(); ++i) {
      const std::string& label = question.answer_labels[i];
      if (line == label) return static_cast<int>(i);
      if (line.size() == 1 && line[0] == std::tolower(static_cast<unsigned char>(label[0])))
        return static_cast<int>(i);
      if (line == std::to_string(i + 1)) return static_cast<int>(i);
    }
    std::cout << "Please answer with one of the listed options.\n";
  }
}

int cmd_play(const PlayArgs& args) {
  std::unique_ptr<Estimator> estimator = make_estimator(args.backend);
  PolicyConfig policy = build_policy(args.policy, args.k, args.tau);
  TaskSpec task = make_task(args.task, args.seed, task_params_for(args.backend));

  // the human plays the user: show which hypothesis to answer for
  int truth;
  if (task.fixed_truth) {
    truth = *task.fixed_truth;
  } else {
    std::mt19937_64 rng = make_rng(mix64(args.seed, 0x74727574ULL));
    truth = sample_index(task.prior.probs, rng);
  }
  std::cout << "Task: " << task.name << "\n";
  std::cout << "Initial query: " << task.initial_query << "\n";
  std::cout << "You are answering as: " << task.hypotheses[truth].label << "\n\n";

  EpisodeOptions options;
  options.k_max = args.k_max;
  options.answer_override = [&](int question, int) {
    return read_answer(task.questions.at(question));
  };
  EpisodeLog log =
      run_episode(policy, task, *estimator, CostModel{args.cost, {}}, args.seed, options);
  if (log.failed) fail(Errc::estimator_failure, log.error);

  std::cout << "\nCommitted after " << log.turn_count() << " question(s): "
            << log.final_action_label << "\n";
  std::cout << "Raw utility " << log.raw_utility << ", net utility " << log.net_utility
            << " at cost " << log.cost << " per question.\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clarify-or-commit decision engine: value-of-information policies, "
               "baselines, benchmark tasks and an evaluation harness"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from an INI config file");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run episodes for one configuration");
  add_backend_flags(run, run_args.backend);
  run->add_option("--task", run_args.task, "Task selector")->capture_default_str();
  run->add_option("--policy", run_args.policy,
                  "Policy: voi, no-question, fixed, confidence, adaptive")
      ->capture_default_str();
  run->add_option("--k", run_args.k, "Fixed-round question budget");
  run->add_option("--tau", run_args.tau, "Confidence threshold in [0,1]");
  run->add_option("--cost", run_args.cost, "Per-question communication cost")
      ->capture_default_str();
  run->add_option("--k-max", run_args.k_max, "Clarification budget (0 = task default)");
  run->add_option("--seed", run_args.seed, "Episode seed")->capture_default_str();
  run->add_option("--seeds", run_args.seeds, "Episode count N (seeds 0..N-1) or comma list");
  run->add_option("--out", run_args.out, "Log file path, or - for stdout")
      ->capture_default_str();
  run->add_flag("--no-timing", run_args.no_timing,
                "Omit wall-time from logs (canonical deterministic form)");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a policy/cost grid and summarize");
  add_backend_flags(sweep, sweep_args.backend);
  sweep->add_option("--task", sweep_args.task, "Task selector")->capture_default_str();
  sweep->add_option("--policy", sweep_args.policy,
                    "Restrict the sweep to one policy (default: the full grid)");
  sweep->add_option("--k", sweep_args.k, "Fixed-round budget for --policy fixed");
  sweep->add_option("--tau", sweep_args.tau, "Threshold for --policy confidence");
  sweep->add_option("--costs", sweep_args.costs, "Comma-separated cost levels")
      ->capture_default_str();
  sweep->add_option("--seeds", sweep_args.seeds, "Episode count N or comma list of seeds")
      ->capture_default_str();
  sweep->add_option("--k-max", sweep_args.k_max, "Clarification budget (0 = task default)");
  sweep->add_option("--workers", sweep_args.workers, "Worker threads (0 = hardware)");
  sweep->add_option("--out", sweep_args.out, "Output directory")->capture_default_str();
  sweep->add_flag("--no-timing", sweep_args.no_timing, "Omit wall-time from logs");

  CalibrateArgs cal_args;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Calibration table from saved logs");
  calibrate->add_option("--logs", cal_args.logs, "Episode log file (JSONL)")->required();
  calibrate->add_option("--bin-width", cal_args.bin_width, "Confidence bin width")
      ->capture_default_str();
  calibrate->add_option("--out", cal_args.out, "Output file, or - for stdout")
      ->capture_default_str();

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "Summary tables from saved logs");
  report->add_option("--logs", report_args.logs, "Episode log file (JSONL)")->required();
  report->add_option("--out", report_args.out, "Output directory")->capture_default_str();

  PlayArgs play_args;
  CLI::App* play = app.add_subcommand("play", "Interactive mode: you answer the questions");
  add_backend_flags(play, play_args.backend);
  play->add_option("--task", play_args.task, "Task selector")->capture_default_str();
  play->add_option("--policy", play_args.policy, "Policy driving the questions")
      ->capture_default_str();
  play->add_option("--k", play_args.k, "Fixed-round question budget");
  play->add_option("--tau", play_args.tau, "Confidence threshold in [0,1]");
  play->add_option("--cost", play_args.cost, "Per-question communication cost")
      ->capture_default_str();
  play->add_option("--k-max", play_args.k_max, "Clarification budget (0 = task default)");
  play->add_option("--seed", play_args.seed, "Scenario / ground-truth seed")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the usage diagnostic
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (calibrate->parsed()) return cmd_calibrate(cal_args);
    if (report->parsed()) return cmd_report(report_args);
    if (play->parsed()) return cmd_play(play_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
