#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "voi/belief.hpp"

namespace voi {

// U(theta, action), row-major over hypotheses.
struct UtilityMatrix {
  int num_hypotheses = 0;
  int num_actions = 0;
  std::vector<double> values;

  double at(int theta, int action) const {
    return values[static_cast<size_t>(theta) * num_actions + action];
  }
  double& at(int theta, int action) {
    return values[static_cast<size_t>(theta) * num_actions + action];
  }

  // stakes on the diagonal, 0 elsewhere (guess-the-hypothesis tasks).
  static UtilityMatrix scaled_identity(int n, double stakes);

  UtilityMatrix scaled(double lambda) const;
  void validate() const;
};

// Per-question communication cost. Constant by default; an override vector
// (indexed by question id) supports non-uniform costs.
struct CostModel {
  double per_question_cost = 0.0;
  std::vector<double> per_question_override;

  double cost(int question) const {
    if (!per_question_override.empty() &&
        question >= 0 && question < static_cast<int>(per_question_override.size()))
      return per_question_override[question];
    return per_question_cost;
  }
  bool is_constant() const { return per_question_override.empty(); }
};

struct Clarify {
  int question = -1;
};
struct Commit {
  int action = -1;
};

// The per-turn choice: ask this question, or take this terminal action.
using PolicyDecision = std::variant<Clarify, Commit>;

inline bool is_clarify(const PolicyDecision& d) { return std::holds_alternative<Clarify>(d); }
inline bool is_commit(const PolicyDecision& d) { return std::holds_alternative<Commit>(d); }
inline int clarify_question(const PolicyDecision& d) { return std::get<Clarify>(d).question; }
inline int commit_action(const PolicyDecision& d) { return std::get<Commit>(d).action; }

struct QuestionScore {
  int question = -1;
  double voi = 0.0;
  double net_voi = 0.0;
};

// One clarify-or-commit evaluation: per-candidate scores, the value of acting
// now, and the decision taken.
struct VoiReport {
  std::vector<QuestionScore> scores;
  double value_now = 0.0;
  PolicyDecision chosen = Commit{};
};

struct ActionValue {
  int action = -1;
  double value = 0.0;
};

// EU(a | b) = Σ_θ b(θ)·U(θ,a).
double expected_utility(const BeliefState& b, int action, const UtilityMatrix& utility);

// V(b) = max_a EU(a | b); ties break to the lowest action id.
ActionValue best_action_value(const BeliefState& b, const UtilityMatrix& utility);

// V_post(b,q) = Σ_y p(y|q,b)·V(posterior after y). Answers with zero marginal
// probability contribute nothing.
double posterior_value(const BeliefState& b, int question, const AnswerLikelihood& likelihood,
                       const UtilityMatrix& utility);

// VoI(q) = V_post(b,q) − V(b).
double value_of_information(const BeliefState& b, int question,
                            const AnswerLikelihood& likelihood, const UtilityMatrix& utility);

double net_voi(double voi, const CostModel& cost);
double net_voi(double voi, const CostModel& cost, int question);

// Scores every candidate; commits to the best action when no candidate has
// positive net value (or the candidate set is empty), otherwise clarifies with
// the net-value argmax (ties to the lowest question id).
VoiReport voi_step(const BeliefState& b, std::span<const int> candidates,
                   const AnswerLikelihood& likelihood, const UtilityMatrix& utility,
                   const CostModel& cost);

// Estimator-mediated variant: the same decision rule, but answer models and
// posteriors come from arbitrary callables so that non-exact belief backends
// can drive it. `answer_model(q)` returns p(y|q,θ) rows per hypothesis;
// `posterior(q, y)` returns the belief after hypothetically observing y.
using AnswerModelFn = std::function<std::vector<AnswerDistribution>(int question)>;
using PosteriorFn = std::function<BeliefState(int question, int answer)>;

VoiReport voi_step_with(const BeliefState& b, std::span<const int> candidates,
                        const AnswerModelFn& answer_model, const PosteriorFn& posterior,
                        const UtilityMatrix& utility, const CostModel& cost);

}  // namespace voi
