#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "voi/estimator.hpp"

namespace voi {

struct LlmConfig {
  std::string endpoint;  // base URL, e.g. http://127.0.0.1:8080
  std::string model = "gpt-4.1";
  double temperature = 0.0;
  int max_retries = 2;
  double timeout_seconds = 30.0;
  int max_concurrent_requests = 4;
  std::string api_key_env = "VOI_API_KEY";  // bearer token read from this env var
  double assumed_answer_noise = 0.05;       // eta-hat for yes/no coercion
  std::string prompt_dir;                   // directory of template files
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  uint64_t correlation_id = 0;
};

// One blocking chat completion; returns the assistant message content.
// Implementations throw Error(transport) on delivery failure.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

// HTTP JSON transport for chat-completions-style endpoints. Appends
// /v1/chat/completions to the configured base URL and authenticates with a
// bearer token from the configured environment variable when present.
class HttpChatTransport final : public ChatTransport {
 public:
  HttpChatTransport(std::string base_url, double timeout_seconds, std::string api_key_env);
  std::string complete(const ChatRequest& request) override;

 private:
  std::string base_url_;
  double timeout_seconds_;
  std::string api_key_;
};

// Scripted transport for tests and offline runs: answers come from a
// user-supplied handler keyed on the outgoing request.
class ScriptedChatTransport final : public ChatTransport {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedChatTransport(Handler handler) : handler_(std::move(handler)) {}

  std::string complete(const ChatRequest& request) override {
    ++calls_;
    return handler_(request);
  }
  int calls() const { return calls_.load(); }

 private:
  Handler handler_;
  std::atomic<int> calls_{0};
};

// Retry + concurrency wrapper around a transport. Requests carry fresh
// correlation ids; at most max_concurrent_requests are in flight at once.
class LlmClient {
 public:
  LlmClient(LlmConfig config, std::shared_ptr<ChatTransport> transport);

  std::string complete(const std::vector<ChatMessage>& messages);
  const LlmConfig& config() const { return config_; }

 private:
  LlmConfig config_;
  std::shared_ptr<ChatTransport> transport_;
  std::atomic<uint64_t> next_correlation_id_{1};
  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int slots_in_use_ = 0;
};

// Text template with {slot} placeholders; {{ and }} emit literal braces.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  static PromptTemplate from_string(std::string id, std::string text);
  static PromptTemplate from_file(const std::string& path);

  // Throws when the template references a slot absent from `slots`.
  std::string render(const std::map<std::string, std::string>& slots) const;

  const std::string& id() const { return id_; }
  const std::string& text() const { return text_; }

 private:
  std::string id_;
  std::string text_;
};

// The bundled template set, loaded from a prompt directory (one file per
// template, stem = template id).
class PromptLibrary {
 public:
  static PromptLibrary load(const std::string& dir);
  const PromptTemplate& get(const std::string& id) const;
  bool has(const std::string& id) const { return templates_.count(id) > 0; }

 private:
  std::map<std::string, PromptTemplate> templates_;
};

// Extracts the first balanced JSON object from `text` (prose around it is
// ignored) and validates it as a key→probability mapping whose key set equals
// `expected_keys` and whose values lie in [0,1]. Does not check the sum.
std::map<std::string, double> parse_strict_json_distribution(
    const std::string& text, const std::vector<std::string>& expected_keys);

// Belief estimation via a chat endpoint, following the bundled templates:
// answer models for guessing tasks come from batch answer simulation, flight
// beliefs from per-feature state distributions. Thread-safe; answer tables
// are cached per question.
class LlmEstimator final : public Estimator {
 public:
  LlmEstimator(LlmConfig config, std::shared_ptr<ChatTransport> transport);
  LlmEstimator(LlmConfig config, std::shared_ptr<ChatTransport> transport, PromptLibrary prompts);

  const char* id() const override { return "llm"; }
  EstimatorCaps caps() const override {
    return {.supports_exact_likelihood = false,
            .supports_verbalized_confidence = true,
            .supports_adaptive_prompting = true};
  }

  BeliefState prior(const TaskSpec& task) override;
  BeliefState posterior(const TaskSpec& task, const BeliefState& belief,
                        const DialogueHistory& history, int question, int answer) override;
  std::vector<AnswerDistribution> answer_table(const TaskSpec& task,
                                               const DialogueHistory& history,
                                               int question) override;
  ConfidenceReport commit_confidence(const TaskSpec& task, const BeliefState& belief,
                                     const DialogueHistory& history) override;
  PolicyDecision adaptive_step(const TaskSpec& task, const BeliefState& belief,
                               const DialogueHistory& history,
                               const std::vector<int>& candidates) override;
  std::vector<int> candidate_questions(const TaskSpec& task, const BeliefState& belief,
                                       const std::vector<int>& asked, int budget) override;

  // Renders `tpl` with the given slots, queries the endpoint and parses a
  // strict distribution over `labels`. Sums in [0.9, 1.1] are renormalized;
  // anything else is retried and then rejected.
  BeliefState estimate_distribution(const std::vector<std::string>& labels,
                                    const PromptTemplate& tpl,
                                    const std::map<std::string, std::string>& slots);

  // Batch answer simulation for one yes/no question: p(yes|q,θ) rows derived
  // from per-hypothesis Yes/No/Maybe replies via the eta-hat mapping.
  std::vector<AnswerDistribution> answer_likelihood(const TaskSpec& task, int question);

  // {"guess": ..., "confidence": n} with n in [1,100]; returns (label, n/100).
  std::pair<std::string, double> verbalized_confidence(const TaskSpec& task,
                                                       const DialogueHistory& history);

 private:
  BeliefState flight_belief(const TaskSpec& task, const DialogueHistory& history,
                            std::optional<QaTurn> hypothetical);
  std::string history_text(const TaskSpec& task, const DialogueHistory& history) const;
  const PromptTemplate& template_for(const TaskSpec& task, const std::string& purpose) const;

  LlmClient client_;
  PromptLibrary prompts_;
  std::mutex cache_mutex_;
  std::map<std::pair<std::string, int>, std::vector<AnswerDistribution>> answer_cache_;
};

}  // namespace voi
