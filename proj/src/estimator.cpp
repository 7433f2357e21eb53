#include "voi/estimator.hpp"

namespace voi {

ConfidenceReport Estimator::commit_confidence(const TaskSpec&, const BeliefState& belief,
                                              const DialogueHistory&) {
  // Probability-matched default: confidence is the max posterior probability.
  auto [theta, p] = max_belief(belief);
  (void)theta;
  return {p, std::nullopt};
}

PolicyDecision Estimator::adaptive_step(const TaskSpec&, const BeliefState&,
                                        const DialogueHistory&, const std::vector<int>&) {
  fail(Errc::backend_unavailable,
       std::string("backend '") + id() + "' does not support adaptive prompting");
}

std::vector<int> Estimator::candidate_questions(const TaskSpec& task, const BeliefState& belief,
                                                const std::vector<int>& asked, int budget) {
  return gen_questions(task, asked, belief, budget);
}

BeliefState ExactEstimator::prior(const TaskSpec& task) { return task.prior; }

BeliefState ExactEstimator::posterior(const TaskSpec& task, const BeliefState& belief,
                                      const DialogueHistory&, int question, int answer) {
  return bayes_update(belief, question, answer, task.likelihood);
}

std::vector<AnswerDistribution> ExactEstimator::answer_table(const TaskSpec& task,
                                                             const DialogueHistory&,
                                                             int question) {
  std::vector<AnswerDistribution> rows;
  rows.reserve(task.num_hypotheses());
  for (int theta = 0; theta < task.num_hypotheses(); ++theta) {
    std::span<const double> row = task.likelihood.row(question, theta);
    rows.push_back({std::vector<double>(row.begin(), row.end())});
  }
  return rows;
}

}  // namespace voi
