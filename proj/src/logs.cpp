#include <fstream>

#include <nlohmann/json.hpp>

#include "voi/harness.hpp"

namespace voi {

using nlohmann::json;

namespace {

json decision_to_json(const PolicyDecision& d) {
  if (is_clarify(d)) return json{{"clarify", clarify_question(d)}};
  return json{{"commit", commit_action(d)}};
}

PolicyDecision decision_from_json(const json& j) {
  if (j.contains("clarify")) return Clarify{j.at("clarify").get<int>()};
  if (j.contains("commit")) return Commit{j.at("commit").get<int>()};
  fail(Errc::parse_failure, "decision record has neither clarify nor commit");
}

json report_to_json(const VoiReport& r) {
  json scores = json::array();
  for (const QuestionScore& s : r.scores)
    scores.push_back({{"question", s.question}, {"voi", s.voi}, {"net_voi", s.net_voi}});
  return json{{"value_now", r.value_now},
              {"chosen", decision_to_json(r.chosen)},
              {"scores", scores}};
}

VoiReport report_from_json(const json& j) {
  VoiReport r;
  r.value_now = j.at("value_now").get<double>();
  r.chosen = decision_from_json(j.at("chosen"));
  for (const json& js : j.at("scores"))
    r.scores.push_back({js.at("question").get<int>(), js.at("voi").get<double>(),
                        js.at("net_voi").get<double>()});
  return r;
}

json policy_to_json(const PolicyConfig& p) {
  json j{{"kind", policy_kind_name(p.kind)}};
  if (p.k) j["k"] = *p.k;
  if (p.tau) j["tau"] = *p.tau;
  return j;
}

PolicyConfig policy_from_json(const json& j) {
  PolicyConfig p;
  p.kind = policy_kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("k")) p.k = j.at("k").get<int>();
  if (j.contains("tau")) p.tau = j.at("tau").get<double>();
  return p;
}

json belief_to_json(const BeliefState& b) {
  return json{{"probs", b.probs}, {"turn", b.turn}};
}

BeliefState belief_from_json(const json& j) {
  BeliefState b;
  b.probs = j.at("probs").get<std::vector<double>>();
  b.turn = j.at("turn").get<int>();
  return b;
}

}  // namespace

std::string log_to_json_line(const EpisodeLog& log, bool include_timing) {
  json turns = json::array();
  for (const TurnRecord& t : log.turns) {
    json jt{{"question", t.question},
            {"answer", t.answer},
            {"belief", belief_to_json(t.belief_after)}};
    if (t.report) jt["report"] = report_to_json(*t.report);
    turns.push_back(std::move(jt));
  }

  json j{{"schema_version", log.schema_version},
         {"task", log.task},
         {"task_instance", log.task_instance},
         {"policy", policy_to_json(log.policy)},
         {"backend", log.backend},
         {"seed", log.seed},
         {"truth", log.truth},
         {"truth_label", log.truth_label},
         {"cost", log.cost},
         {"k_max", log.k_max},
         {"turns", std::move(turns)},
         {"final_action", log.final_action},
         {"final_action_label", log.final_action_label},
         {"final_belief", belief_to_json(log.final_belief)},
         {"raw_utility", log.raw_utility},
         {"net_utility", log.net_utility},
         {"correct", log.correct},
         {"failed", log.failed},
         {"error", log.error}};
  if (include_timing) j["wall_time_ms"] = log.wall_time_ms;
  return j.dump();
}

EpisodeLog log_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(Errc::parse_failure, std::string("bad episode record: ") + e.what());
  }
  int version = j.value("schema_version", -1);
  if (version != kLogSchemaVersion)
    fail(Errc::schema_version_mismatch,
         "log schema version " + std::to_string(version) + ", expected " +
             std::to_string(kLogSchemaVersion));

  EpisodeLog log;
  log.schema_version = version;
  log.task = j.at("task").get<std::string>();
  log.task_instance = j.value("task_instance", log.task);
  log.policy = policy_from_json(j.at("policy"));
  log.backend = j.at("backend").get<std::string>();
  log.seed = j.at("seed").get<uint64_t>();
  log.truth = j.at("truth").get<int>();
  log.truth_label = j.at("truth_label").get<std::string>();
  log.cost = j.at("cost").get<double>();
  log.k_max = j.at("k_max").get<int>();
  for (const json& jt : j.at("turns")) {
    TurnRecord t;
    t.question = jt.at("question").get<int>();
    t.answer = jt.at("answer").get<int>();
    t.belief_after = belief_from_json(jt.at("belief"));
    if (jt.contains("report")) t.report = report_from_json(jt.at("report"));
    log.turns.push_back(std::move(t));
  }
  log.final_action = j.at("final_action").get<int>();
  log.final_action_label = j.at("final_action_label").get<std::string>();
  log.final_belief = belief_from_json(j.at("final_belief"));
  log.raw_utility = j.at("raw_utility").get<double>();
  log.net_utility = j.at("net_utility").get<double>();
  log.correct = j.at("correct").get<bool>();
  log.failed = j.at("failed").get<bool>();
  log.error = j.at("error").get<std::string>();
  log.wall_time_ms = j.value("wall_time_ms", 0.0);
  return log;
}

void write_logs(const std::vector<EpisodeLog>& logs, const std::string& path,
                bool include_timing) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot open log file for writing: " + path);
  for (const EpisodeLog& log : logs) out << log_to_json_line(log, include_timing) << "\n";
  if (!out) fail(Errc::io, "short write to log file: " + path);
}

std::vector<EpisodeLog> read_logs(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open log file: " + path);
  std::vector<EpisodeLog> logs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    logs.push_back(log_from_json_line(line));
  }
  return logs;
}

}  // namespace voi
