#include "voi/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace voi {

using nlohmann::json;

// ---- Transports -------------------------------------------------------------------

HttpChatTransport::HttpChatTransport(std::string base_url, double timeout_seconds,
                                     std::string api_key_env)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {
  if (!api_key_env.empty()) {
    if (const char* key = std::getenv(api_key_env.c_str())) api_key_ = key;
  }
}

std::string HttpChatTransport::complete(const ChatRequest& request) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int64_t>(timeout_seconds_ * 1000)));
  client.set_read_timeout(std::chrono::milliseconds(
      static_cast<int64_t>(timeout_seconds_ * 1000)));
  if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

  json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  json messages = json::array();
  for (const ChatMessage& m : request.messages)
    messages.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = messages;

  httplib::Result res = client.Post("/v1/chat/completions", body.dump(), "application/json");
  if (!res)
    fail(Errc::transport, "request " + std::to_string(request.correlation_id) + " failed: " +
                              httplib::to_string(res.error()));
  if (res->status != 200)
    fail(Errc::transport, "request " + std::to_string(request.correlation_id) +
                              " got HTTP " + std::to_string(res->status));
  try {
    json reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    fail(Errc::transport, std::string("malformed chat completion response: ") + e.what());
  }
}

// ---- Client -------------------------------------------------------------------------

LlmClient::LlmClient(LlmConfig config, std::shared_ptr<ChatTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.max_retries < 0) fail(Errc::bad_config, "max_retries must be >= 0");
  if (config_.max_concurrent_requests < 1)
    fail(Errc::bad_config, "max_concurrent_requests must be >= 1");
}

std::string LlmClient::complete(const std::vector<ChatMessage>& messages) {
  struct SlotGuard {
    LlmClient* c;
    ~SlotGuard() {
      {
        std::lock_guard<std::mutex> lock(c->slots_mutex_);
        --c->slots_in_use_;
      }
      c->slots_cv_.notify_one();
    }
  };
  {
    std::unique_lock<std::mutex> lock(slots_mutex_);
    slots_cv_.wait(lock, [&] { return slots_in_use_ < config_.max_concurrent_requests; });
    ++slots_in_use_;
  }
  SlotGuard guard{this};

  ChatRequest request;
  request.model = config_.model;
  request.messages = messages;
  request.temperature = config_.temperature;

  for (int attempt = 0;; ++attempt) {
    request.correlation_id = next_correlation_id_.fetch_add(1);
    try {
      return transport_->complete(request);
    } catch (const Error& e) {
      if (e.code() != Errc::transport || attempt >= config_.max_retries) throw;
    }
  }
}

// ---- Prompt templates ------------------------------------------------------------------

PromptTemplate PromptTemplate::from_string(std::string id, std::string text) {
  PromptTemplate t;
  t.id_ = std::move(id);
  t.text_ = std::move(text);
  return t;
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open prompt template: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(std::filesystem::path(path).stem().string(), buffer.str());
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& slots) const {
  std::string out;
  out.reserve(text_.size());
  for (size_t i = 0; i < text_.size();) {
    char c = text_[i];
    if (c == '{' && i + 1 < text_.size() && text_[i + 1] == '{') {
      out += '{';
      i += 2;
    } else if (c == '}' && i + 1 < text_.size() && text_[i + 1] == '}') {
      out += '}';
      i += 2;
    } else if (c == '{') {
      size_t close = text_.find('}', i);
      if (close == std::string::npos)
        fail(Errc::bad_config, "template '" + id_ + "' has an unterminated slot");
      std::string name = text_.substr(i + 1, close - i - 1);
      auto it = slots.find(name);
      if (it == slots.end())
        fail(Errc::bad_config, "template '" + id_ + "' references unbound slot '" + name + "'");
      out += it->second;
      i = close + 1;
    } else {
      out += c;
      ++i;
    }
  }
  return out;
}

PromptLibrary PromptLibrary::load(const std::string& dir) {
  PromptLibrary lib;
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) fail(Errc::io, "cannot open prompt directory: " + dir);
  for (const auto& entry : it) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    PromptTemplate t = PromptTemplate::from_file(entry.path().string());
    lib.templates_[t.id()] = std::move(t);
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) fail(Errc::bad_config, "no prompt template named '" + id + "'");
  return it->second;
}

// ---- Strict JSON parsing -------------------------------------------------------------------

namespace {

// First balanced {...} region, skipping over string literals.
std::string extract_first_object(const std::string& text) {
  size_t start = text.find('{');
  if (start == std::string::npos)
    fail(Errc::parse_failure, "no JSON object found in reply");
  int depth = 0;
  bool in_string = false;
  for (size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  fail(Errc::parse_failure, "unbalanced JSON object in reply");
}

json parse_object(const std::string& text) {
  std::string candidate = extract_first_object(text);
  try {
    json j = json::parse(candidate);
    if (!j.is_object()) fail(Errc::parse_failure, "extracted JSON is not an object");
    return j;
  } catch (const json::parse_error& e) {
    fail(Errc::parse_failure, std::string("invalid JSON in reply: ") + e.what());
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string normalize_text(const std::string& s) {
  std::string out;
  for (unsigned char c : s)
    if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, double> parse_strict_json_distribution(
    const std::string& text, const std::vector<std::string>& expected_keys) {
  json j = parse_object(text);

  std::map<std::string, double> out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number())
      fail(Errc::value_out_of_range, "value for key '" + key + "' is not a number");
    double v = value.get<double>();
    if (v < 0.0 || v > 1.0)
      fail(Errc::value_out_of_range,
           "value for key '" + key + "' is outside [0,1]: " + std::to_string(v));
    out[key] = v;
  }

  if (out.size() != expected_keys.size())
    fail(Errc::key_mismatch, "expected " + std::to_string(expected_keys.size()) +
                                 " keys, got " + std::to_string(out.size()));
  for (const std::string& key : expected_keys)
    if (!out.count(key)) fail(Errc::key_mismatch, "missing key '" + key + "'");
  return out;
}

// ---- Estimator -----------------------------------------------------------------------------

LlmEstimator::LlmEstimator(LlmConfig config, std::shared_ptr<ChatTransport> transport)
    : LlmEstimator(config, std::move(transport), PromptLibrary::load(config.prompt_dir)) {}

LlmEstimator::LlmEstimator(LlmConfig config, std::shared_ptr<ChatTransport> transport,
                           PromptLibrary prompts)
    : client_(std::move(config), std::move(transport)), prompts_(std::move(prompts)) {}

const PromptTemplate& LlmEstimator::template_for(const TaskSpec& task,
                                                 const std::string& purpose) const {
  // The medical task has its own template family; other guessing tasks use the
  // animal family. Flight templates are selected by purpose directly.
  std::string family = task.name == "medical" ? "medical" : "animal";
  if (task.kind == TaskKind::flight) family = "flight";
  return prompts_.get(family + "_" + purpose);
}

std::string LlmEstimator::history_text(const TaskSpec& task, const DialogueHistory& history) const {
  std::string out = "User: " + task.initial_query + "\n";
  for (const QaTurn& turn : history) {
    const Question& q = task.questions.at(turn.question);
    out += "Q: " + q.text + "\nA: " + q.answer_labels.at(turn.answer) + "\n";
  }
  return out;
}

BeliefState LlmEstimator::estimate_distribution(const std::vector<std::string>& labels,
                                                const PromptTemplate& tpl,
                                                const std::map<std::string, std::string>& slots) {
  std::string prompt = tpl.render(slots);
  const Error* last = nullptr;
  Error saved(Errc::parse_failure, "unreachable");
  for (int attempt = 0; attempt < 2; ++attempt) {  // one parse-level retry
    std::string reply = client_.complete({{"user", prompt}});
    try {
      std::map<std::string, double> dist = parse_strict_json_distribution(reply, labels);
      double sum = 0.0;
      for (const auto& [k, v] : dist) sum += v;
      if (sum < 0.9 || sum > 1.1)
        fail(Errc::out_of_range_sum, "distribution sums to " + std::to_string(sum));
      std::vector<double> probs;
      probs.reserve(labels.size());
      for (const std::string& label : labels) probs.push_back(dist.at(label));
      BeliefState b = normalize(probs);  // renormalize within the tolerance window
      b.validate();
      return b;
    } catch (const Error& e) {
      saved = e;
      last = &saved;
    }
  }
  throw *last;
}

std::vector<AnswerDistribution> LlmEstimator::answer_likelihood(const TaskSpec& task,
                                                                int question) {
  const Question& q = task.questions.at(question);
  if (q.answer_labels.size() != 2 || q.answer_labels[0] != "yes")
    fail(Errc::backend_unavailable,
         "batch answer simulation covers yes/no questions only (task '" + task.name + "')");

  std::string candidate_list;
  for (int i = 0; i < task.num_hypotheses(); ++i) {
    if (i) candidate_list += ", ";
    candidate_list += task.hypotheses[i].label;
  }
  std::string prompt = template_for(task, "batch_answer")
                           .render({{"question", q.text}, {"candidate_list", candidate_list}});

  const double eta = client_.config().assumed_answer_noise;
  Error saved(Errc::parse_failure, "unreachable");
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply = client_.complete({{"user", prompt}});
    try {
      std::map<std::string, int> label_to_id;
      for (const Hypothesis& h : task.hypotheses) label_to_id[lower(h.label)] = h.id;

      std::vector<AnswerDistribution> rows(task.num_hypotheses());
      std::vector<char> seen(task.num_hypotheses(), 0);
      std::istringstream lines(reply);
      std::string line;
      while (std::getline(lines, line)) {
        line = trim(line);
        if (line.empty()) continue;
        size_t colon = line.rfind(':');
        if (colon == std::string::npos)
          fail(Errc::parse_failure, "malformed line: '" + line + "'");
        std::string label = lower(trim(line.substr(0, colon)));
        std::string answer = lower(trim(line.substr(colon + 1)));
        auto it = label_to_id.find(label);
        if (it == label_to_id.end())
          fail(Errc::unknown_label, "reply names unknown candidate '" + label + "'");
        double p_yes;
        if (answer == "yes")
          p_yes = 1.0 - eta;
        else if (answer == "no")
          p_yes = eta;
        else if (answer == "maybe")
          p_yes = 0.5;
        else
          fail(Errc::parse_failure, "unrecognized answer '" + answer + "'");
        rows[it->second] = AnswerDistribution{{p_yes, 1.0 - p_yes}};
        seen[it->second] = 1;
      }
      for (int i = 0; i < task.num_hypotheses(); ++i)
        if (!seen[i])
          fail(Errc::parse_failure,
               "reply missing candidate '" + task.hypotheses[i].label + "'");
      return rows;
    } catch (const Error& e) {
      saved = e;
    }
  }
  throw saved;
}

BeliefState LlmEstimator::flight_belief(const TaskSpec& task, const DialogueHistory& history,
                                        std::optional<QaTurn> hypothetical) {
  const FlightScenario* scenario = std::get_if<FlightScenario>(&task.scenario);
  if (!scenario) fail(Errc::backend_unavailable, "flight belief needs a flight scenario");

  auto format_option = [&](const FlightOption& x) {
    static const char* names[kFlightFeatures] = {"price",          "stops",
                                                 "duration",       "departure_time",
                                                 "arrival_time",   "airline_rating",
                                                 "seat_comfort",   "baggage_allowance"};
    std::string out;
    char buf[64];
    for (int i = 0; i < kFlightFeatures; ++i) {
      std::snprintf(buf, sizeof(buf), "%s=%.3f", names[i], x[i]);
      if (i) out += ", ";
      out += buf;
    }
    return out;
  };

  std::string ctx;
  for (const FlightRound& round : scenario->support) {
    ctx += "User: Which flight is best?\n";
    for (int o = 0; o < kFlightOptionsPerRound; ++o)
      ctx += "Flight " + std::to_string(o + 1) + ": " + format_option(round.options[o]) + "\n";
    ctx += "User: I prefer flight " + std::to_string(round.chosen + 1) + "\n";
  }
  DialogueHistory full = history;
  if (hypothetical) full.push_back(*hypothetical);
  for (const QaTurn& turn : full) {
    const Question& q = task.questions.at(turn.question);
    ctx += "Q: " + q.text + "\nA: " + q.answer_labels.at(turn.answer) + "\n";
  }

  const std::vector<std::string> states = {"lower", "higher", "none"};
  const bool use_posterior = !full.empty();
  const PromptTemplate& tpl =
      prompts_.get(use_posterior ? "flight_posterior" : "flight_prior");

  // Factored estimate: one state distribution per feature, combined over the
  // full weight-vector hypothesis space.
  std::array<std::array<double, 3>, kFlightFeatures> per_feature;
  for (int f = 0; f < kFlightFeatures; ++f) {
    std::map<std::string, std::string> slots = {
        {"feature", task.questions.at(f).text},
        {"history_ctx", ctx},
        {"states", "\"lower\", \"higher\", \"none\""}};
    if (use_posterior) {
      slots["option_a"] = format_option(scenario->holdout[0]);
      slots["option_b"] = format_option(scenario->holdout[1]);
      slots["option_c"] = format_option(scenario->holdout[2]);
    }
    BeliefState dist = estimate_distribution(states, tpl, slots);
    for (int s = 0; s < 3; ++s) per_feature[f][s] = dist.probs[s];
  }

  std::vector<double> weights(kFlightHypotheses, 1.0);
  for (int id = 0; id < kFlightHypotheses; ++id) {
    std::array<int, kFlightFeatures> w = flight_id_to_weights(id);
    for (int f = 0; f < kFlightFeatures; ++f) {
      int state = w[f] < 0 ? 0 : (w[f] > 0 ? 1 : 2);
      weights[id] *= per_feature[f][state];
    }
  }
  BeliefState b = normalize(weights);
  b.turn = static_cast<int>(full.size());
  return b;
}

BeliefState LlmEstimator::prior(const TaskSpec& task) {
  if (task.kind == TaskKind::flight) return flight_belief(task, {}, std::nullopt);
  if (task.kind == TaskKind::shop)
    fail(Errc::backend_unavailable, "no prompt templates cover the shop task");
  return task.prior;  // guessing tasks start uninformed over the candidate set
}

BeliefState LlmEstimator::posterior(const TaskSpec& task, const BeliefState& belief,
                                    const DialogueHistory& history, int question, int answer) {
  if (task.kind == TaskKind::flight)
    return flight_belief(task, history, QaTurn{question, answer});
  std::vector<AnswerDistribution> rows = answer_table(task, history, question);
  std::vector<double> weights(belief.probs.size(), 0.0);
  for (size_t theta = 0; theta < weights.size(); ++theta)
    weights[theta] = belief.probs[theta] * rows[theta][answer];
  bool any = false;
  for (double w : weights) any |= w > 0.0;
  if (!any)
    fail(Errc::zero_evidence, "estimated likelihood makes the observed answer impossible");
  BeliefState out = normalize(weights);
  out.turn = belief.turn + 1;
  return out;
}

std::vector<AnswerDistribution> LlmEstimator::answer_table(const TaskSpec& task,
                                                           const DialogueHistory&, int question) {
  if (task.kind == TaskKind::flight) {
    // Deterministic mapping from a hypothesis' feature state, smoothed by the
    // assumed answer noise.
    const double eta = client_.config().assumed_answer_noise;
    std::vector<AnswerDistribution> rows(kFlightHypotheses);
    for (int id = 0; id < kFlightHypotheses; ++id) {
      std::array<int, kFlightFeatures> w = flight_id_to_weights(id);
      int state = w[question] < 0 ? 0 : (w[question] > 0 ? 1 : 2);
      std::vector<double> p(3, eta / 2.0);
      p[state] = 1.0 - eta;
      rows[id] = AnswerDistribution{std::move(p)};
    }
    return rows;
  }
  if (task.kind == TaskKind::shop)
    fail(Errc::backend_unavailable, "no prompt templates cover the shop task");

  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto key = std::make_pair(task.name, question);
  auto it = answer_cache_.find(key);
  if (it == answer_cache_.end())
    it = answer_cache_.emplace(key, answer_likelihood(task, question)).first;
  return it->second;
}

std::pair<std::string, double> LlmEstimator::verbalized_confidence(
    const TaskSpec& task, const DialogueHistory& history) {
  std::string answer_set;
  for (int i = 0; i < task.num_actions(); ++i) {
    if (i) answer_set += ", ";
    answer_set += task.actions[i];
  }
  std::string prompt = history_text(task, history) + "\n" +
                       template_for(task, "confidence").render({{"answer_set", answer_set}});

  Error saved(Errc::parse_failure, "unreachable");
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply = client_.complete({{"user", prompt}});
    try {
      json j = parse_object(reply);
      if (!j.contains("guess") || !j.contains("confidence"))
        fail(Errc::parse_failure, "reply lacks guess/confidence keys");
      std::string guess = j.at("guess").get<std::string>();
      double n = j.at("confidence").get<double>();
      if (n < 1.0 || n > 100.0)
        fail(Errc::confidence_out_of_range,
             "confidence " + std::to_string(n) + " outside [1,100]");
      return {guess, n / 100.0};
    } catch (const json::exception& e) {
      saved = Error(Errc::parse_failure, std::string("bad confidence reply: ") + e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::confidence_out_of_range) throw;  // declared range, no retry
      saved = e;
    }
  }
  throw saved;
}

ConfidenceReport LlmEstimator::commit_confidence(const TaskSpec& task, const BeliefState&,
                                                 const DialogueHistory& history) {
  auto [guess, confidence] = verbalized_confidence(task, history);
  std::string norm = normalize_text(guess);
  for (int a = 0; a < task.num_actions(); ++a)
    if (normalize_text(task.actions[a]) == norm) return {confidence, a};
  for (const Hypothesis& h : task.hypotheses)
    if (normalize_text(h.label) == norm && h.id < task.num_actions())
      return {confidence, h.id};
  fail(Errc::unknown_label, "verbalized guess '" + guess + "' matches no action");
}

PolicyDecision LlmEstimator::adaptive_step(const TaskSpec& task, const BeliefState&,
                                           const DialogueHistory& history,
                                           const std::vector<int>& candidates) {
  std::string answer_set;
  for (int i = 0; i < task.num_actions(); ++i) {
    if (i) answer_set += ", ";
    answer_set += task.actions[i];
  }
  std::map<std::string, std::string> slots = {
      {"question_count", std::to_string(history.size())},
      {"remaining_questions", std::to_string(task.k_max_default - history.size())},
      {"answer_set", answer_set}};
  std::string prompt =
      history_text(task, history) + "\n" + template_for(task, "auto_stop").render(slots);

  Error saved(Errc::parse_failure, "unreachable");
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply = trim(client_.complete({{"user", prompt}}));
    std::string low = lower(reply);

    size_t marker = low.find("my guess is:");
    if (marker != std::string::npos) {
      std::string guess = trim(reply.substr(marker + std::string("my guess is:").size()));
      while (!guess.empty() && (guess.back() == '.' || guess.back() == ']')) guess.pop_back();
      while (!guess.empty() && guess.front() == '[') guess.erase(guess.begin());
      std::string norm = normalize_text(guess);
      for (int a = 0; a < task.num_actions(); ++a)
        if (normalize_text(task.actions[a]) == norm) return Commit{a};
      for (const Hypothesis& h : task.hypotheses)
        if (normalize_text(h.label) == norm && h.id < task.num_actions()) return Commit{h.id};
      saved = Error(Errc::unknown_label, "guess '" + guess + "' matches no action");
      continue;
    }

    if (!reply.empty() && reply.back() == '?') {
      std::string norm = normalize_text(reply);
      for (int q : candidates) {
        std::string qnorm = normalize_text(task.questions.at(q).text);
        if (norm == qnorm || norm.find(qnorm) != std::string::npos ||
            qnorm.find(norm) != std::string::npos)
          return Clarify{q};
      }
      saved = Error(Errc::parse_failure, "question does not match any open candidate");
      continue;
    }
    saved = Error(Errc::parse_failure, "reply is neither a question nor a guess");
  }
  throw saved;
}

std::vector<int> LlmEstimator::candidate_questions(const TaskSpec& task,
                                                   const BeliefState& belief,
                                                   const std::vector<int>& asked, int budget) {
  if (task.kind == TaskKind::shop)
    return Estimator::candidate_questions(task, belief, asked, budget);

  std::string previous_qa;
  if (asked.empty()) previous_qa = "(none yet)";
  // asked ids only; answers live in the harness history, which renders them on
  // demand — the generation prompt needs just the asked-question texts.
  for (int q : asked) previous_qa += "- " + task.questions.at(q).text + "\n";

  std::string reply;
  if (task.kind == TaskKind::flight) {
    const FlightScenario* s = std::get_if<FlightScenario>(&task.scenario);
    if (!s) return Estimator::candidate_questions(task, belief, asked, budget);
    reply = client_.complete(
        {{"user", prompts_.get("flight_question_gen")
                      .render({{"support_history", previous_qa},
                               {"qa_context", ""},
                               {"option_a", "holdout option A"},
                               {"option_b", "holdout option B"},
                               {"option_c", "holdout option C"}})}});
  } else {
    reply = client_.complete(
        {{"user",
          template_for(task, "question_gen").render({{"previous_qa", previous_qa}})}});
  }

  std::vector<int> matched;
  std::istringstream lines(reply);
  std::string line;
  std::vector<char> asked_mask(task.num_questions(), 0);
  for (int q : asked) asked_mask[q] = 1;
  while (std::getline(lines, line)) {
    std::string norm = normalize_text(line);
    if (norm.empty()) continue;
    for (const Question& q : task.questions) {
      if (asked_mask[q.id]) continue;
      std::string qnorm = normalize_text(q.text);
      if (norm.find(qnorm) != std::string::npos &&
          std::find(matched.begin(), matched.end(), q.id) == matched.end()) {
        matched.push_back(q.id);
        break;
      }
    }
    if (static_cast<int>(matched.size()) >= budget) break;
  }
  if (matched.empty())  // generation missed the closed set; fall back to ranking
    return Estimator::candidate_questions(task, belief, asked, budget);
  std::sort(matched.begin(), matched.end());
  return matched;
}

}  // namespace voi
