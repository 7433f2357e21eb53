#pragma once

#include <memory>
#include <optional>
#include <string>

#include "voi/estimator.hpp"

namespace voi {

enum class PolicyKind {
  no_question,
  fixed_round,
  confidence_threshold,
  adaptive_prompt,
  voi,
};

const char* policy_kind_name(PolicyKind kind);
PolicyKind policy_kind_from_name(const std::string& name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::voi;
  std::optional<int> k;        // fixed_round only
  std::optional<double> tau;   // confidence_threshold only

  // k and tau must be present exactly when their kind requires them.
  void validate() const;
  std::string label() const;      // e.g. "fixed_round(k=5)"
  std::string parameter() const;  // e.g. "k=5", empty when none

  static PolicyConfig no_question() { return {PolicyKind::no_question, {}, {}}; }
  static PolicyConfig fixed_round(int k) { return {PolicyKind::fixed_round, k, {}}; }
  static PolicyConfig confidence(double tau) {
    return {PolicyKind::confidence_threshold, {}, tau};
  }
  static PolicyConfig adaptive() { return {PolicyKind::adaptive_prompt, {}, {}}; }
  static PolicyConfig voi() { return {PolicyKind::voi, {}, {}}; }

  bool operator==(const PolicyConfig&) const = default;
};

// Everything a policy may consult for one clarify-or-commit decision.
struct DecisionContext {
  const TaskSpec& task;
  const BeliefState& belief;
  const std::vector<int>& candidates;  // unasked question ids, ascending
  const CostModel& cost;
  int turn = 0;
  int k_max = 0;
  Estimator& estimator;
  const DialogueHistory& history;

  // When a policy scores candidates it reports the scores here for logging.
  VoiReport* report_out = nullptr;
  bool* report_filled = nullptr;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual const PolicyConfig& config() const = 0;
  virtual PolicyDecision decide(const DecisionContext& ctx) = 0;

  // Terminal action when the loop stops without an explicit Commit (budget
  // exhausted). Defaults to the utility-maximizing action.
  virtual int final_action(const DecisionContext& ctx);
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& config);

}  // namespace voi
