#pragma once

#include <optional>
#include <vector>

#include "voi/tasks.hpp"

namespace voi {

struct EstimatorCaps {
  bool supports_exact_likelihood = false;
  bool supports_verbalized_confidence = false;
  bool supports_adaptive_prompting = false;
};

struct QaTurn {
  int question = -1;
  int answer = -1;
};
using DialogueHistory = std::vector<QaTurn>;

// Commit confidence as reported by the backend. The exact backend reports the
// max posterior probability and no guess override; a verbalized backend may
// name the action it would commit to.
struct ConfidenceReport {
  double confidence = 0.0;  // in [0, 1]
  std::optional<int> guess_action;
};

// Belief-estimation backend. Implementations must keep every returned
// BeliefState valid (validated at this boundary) so that engine and policy
// code runs unchanged against any backend.
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual const char* id() const = 0;
  virtual EstimatorCaps caps() const = 0;

  virtual BeliefState prior(const TaskSpec& task) = 0;

  // Belief after observing answer `y` to question `q`, given the belief and
  // dialogue history accumulated so far (history excludes the new turn).
  virtual BeliefState posterior(const TaskSpec& task, const BeliefState& belief,
                                const DialogueHistory& history, int question, int answer) = 0;

  // p(y | q, θ) rows for every hypothesis, used for one-step lookahead.
  virtual std::vector<AnswerDistribution> answer_table(const TaskSpec& task,
                                                       const DialogueHistory& history,
                                                       int question) = 0;

  virtual ConfidenceReport commit_confidence(const TaskSpec& task, const BeliefState& belief,
                                             const DialogueHistory& history);

  // Self-assessed clarify-or-commit step (adaptive prompting). Only available
  // when caps().supports_adaptive_prompting.
  virtual PolicyDecision adaptive_step(const TaskSpec& task, const BeliefState& belief,
                                       const DialogueHistory& history,
                                       const std::vector<int>& candidates);

  // Candidate questions for this turn; the default defers to the task's own
  // generator with the given budget.
  virtual std::vector<int> candidate_questions(const TaskSpec& task, const BeliefState& belief,
                                               const std::vector<int>& asked, int budget);
};

// Bayesian oracle over the task's true likelihood tables.
class ExactEstimator final : public Estimator {
 public:
  const char* id() const override { return "exact"; }
  EstimatorCaps caps() const override { return {.supports_exact_likelihood = true}; }

  BeliefState prior(const TaskSpec& task) override;
  BeliefState posterior(const TaskSpec& task, const BeliefState& belief,
                        const DialogueHistory& history, int question, int answer) override;
  std::vector<AnswerDistribution> answer_table(const TaskSpec& task,
                                               const DialogueHistory& history,
                                               int question) override;
};

}  // namespace voi
