#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CommandResult run_cmd(const std::string& command) {
  CommandResult result;
  std::string full = command + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer;
  while (size_t n = fread(buffer.data(), 1, buffer.size(), pipe)) result.output.append(buffer.data(), n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

const std::string kCli = VOI_CLI_PATH;

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help text covers the full flag registry per subcommand") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> registry = {
      {"run",
       {"--task", "--policy", "--k", "--tau", "--cost", "--k-max", "--seed", "--seeds",
        "--backend", "--endpoint", "--model", "--out", "--data-dir", "--no-timing"}},
      {"sweep",
       {"--task", "--policy", "--k", "--tau", "--costs", "--seeds", "--k-max", "--workers",
        "--backend", "--endpoint", "--model", "--out", "--data-dir", "--no-timing"}},
      {"calibrate", {"--logs", "--bin-width", "--out"}},
      {"report", {"--logs", "--out"}},
      {"play",
       {"--task", "--policy", "--k", "--tau", "--cost", "--k-max", "--seed", "--backend",
        "--endpoint", "--model", "--data-dir"}},
  };
  for (const auto& [sub, flags] : registry) {
    CommandResult help = run_cmd(kCli + " " + sub + " --help");
    CHECK(help.exit_code == 0);
    for (const std::string& flag : flags) {
      INFO(sub << " is missing " << flag);
      CHECK(help.output.find(flag) != std::string::npos);
    }
  }
  CommandResult top = run_cmd(kCli + " --help");
  CHECK(top.output.find("--config") != std::string::npos);
}

TEST_CASE("exit codes: 0 success, 1 usage, 2 runtime") {
  CHECK(run_cmd(kCli + " run --task toy --seed 1").exit_code == 0);
  CHECK(run_cmd(kCli + " run --task toy --frobnicate").exit_code == 1);
  CHECK(run_cmd(kCli + " frobnicate").exit_code == 1);
  CommandResult runtime = run_cmd(kCli + " run --task not-a-task");
  CHECK(runtime.exit_code == 2);
  // runtime failures produce a single-line diagnostic
  CHECK(std::count(runtime.output.begin(), runtime.output.end(), '\n') == 1);
  CHECK(runtime.output.rfind("error:", 0) == 0);
}

TEST_CASE("run output is deterministic in canonical form") {
  CommandResult a = run_cmd(kCli + " run --task animal --policy voi --cost 0.05 --seeds 3 --no-timing");
  CommandResult b = run_cmd(kCli + " run --task animal --policy voi --cost 0.05 --seeds 3 --no-timing");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("\"schema_version\":1") != std::string::npos);
}

TEST_CASE("sweep with fixed k=0 matches a no-question run on the same seeds") {
  std::string dir = temp_path("voi_cli_sweep_k0");
  CommandResult sweep = run_cmd(kCli + " sweep --task toy --policy fixed --k 0 --costs 0.05" +
                                " --seeds 6 --out " + dir + " --no-timing");
  REQUIRE(sweep.exit_code == 0);

  std::string run_out = temp_path("voi_cli_noq.jsonl");
  CommandResult run = run_cmd(kCli + " run --task toy --policy no-question --cost 0.05" +
                              " --seeds 6 --out " + run_out + " --no-timing");
  REQUIRE(run.exit_code == 0);

  // identical utility columns: compare the summary rows field-for-field
  auto utility_columns = [](const std::string& tsv) {
    std::istringstream in(tsv);
    std::string line;
    std::getline(in, line);  // header
    REQUIRE(std::getline(in, line));
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    // mean_accuracy, mean_turns, mean_raw, mean_net
    return std::vector<std::string>(fields.begin() + 6, fields.begin() + 10);
  };
  CHECK(utility_columns(slurp(dir + "/summary.tsv")) == utility_columns(run.output));
}

TEST_CASE("report reproduces the sweep's own summary byte-for-byte") {
  std::string dir = temp_path("voi_cli_sweep_rep");
  CommandResult sweep = run_cmd(kCli + " sweep --task toy --costs 0.05,0.1 --seeds 5 --out " +
                                dir + " --no-timing");
  REQUIRE(sweep.exit_code == 0);

  std::string report_dir = temp_path("voi_cli_report");
  CommandResult report =
      run_cmd(kCli + " report --logs " + dir + "/episodes.jsonl --out " + report_dir);
  REQUIRE(report.exit_code == 0);
  CHECK(slurp(report_dir + "/summary.tsv") == slurp(dir + "/summary.tsv"));
  CHECK(slurp(report_dir + "/ablation.tsv") == slurp(dir + "/ablation.tsv"));
  CHECK(slurp(report_dir + "/curves.tsv") == slurp(dir + "/curves.tsv"));
}

TEST_CASE("calibrate renders a table from saved logs") {
  std::string logs = temp_path("voi_cli_cal.jsonl");
  REQUIRE(run_cmd(kCli + " run --task toy --seeds 10 --cost 0.01 --out " + logs).exit_code ==
          0);
  CommandResult cal = run_cmd(kCli + " calibrate --logs " + logs);
  CHECK(cal.exit_code == 0);
  CHECK(cal.output.rfind("bin_lo\tbin_hi", 0) == 0);
  CHECK(cal.output.find("n/a") != std::string::npos);  // empty bins are marked, not NaN
}

TEST_CASE("play answers a scripted dialogue on the toy task") {
  // seed 0 draws 'left'; the separating question is answered truthfully.
  CommandResult play =
      run_cmd("printf 'yes\\n' | " + kCli + " play --task toy --policy voi --cost 0.1 --seed 0");
  CHECK(play.exit_code == 0);
  CHECK(play.output.find("You are answering as: left") != std::string::npos);
  CHECK(play.output.find("Committed after 1 question(s): left") != std::string::npos);
  CHECK(play.output.find("net utility 0.9") != std::string::npos);

  // invalid input reprompts, single-letter shortcuts are accepted
  CommandResult retry = run_cmd("printf 'zebra\\ny\\n' | " + kCli +
                                " play --task toy --policy voi --cost 0.1 --seed 0");
  CHECK(retry.exit_code == 0);
  CHECK(retry.output.find("one of the listed options") != std::string::npos);
  CHECK(retry.output.find("Committed after 1 question(s): left") != std::string::npos);
}

TEST_CASE("config file values are overridden by explicit flags") {
  std::string config = temp_path("voi_cli_config.ini");
  {
    std::ofstream out(config);
    out << "# example configuration\n";
    out << "[run]\n";
    out << "task=toy\n";
    out << "cost=0.1\n";
    out << "seeds=2\n";
    out << "no-timing=true\n";
  }
  CommandResult from_config = run_cmd(kCli + " --config " + config + " run");
  CHECK(from_config.exit_code == 0);
  CHECK(from_config.output.find("\"task\":\"toy\"") != std::string::npos);
  CHECK(from_config.output.find("\"cost\":0.1") != std::string::npos);

  // the flag wins over the config value
  CommandResult overridden = run_cmd(kCli + " --config " + config + " run --cost 0.25");
  CHECK(overridden.exit_code == 0);
  CHECK(overridden.output.find("\"cost\":0.25") != std::string::npos);
}

}  // TEST_SUITE
