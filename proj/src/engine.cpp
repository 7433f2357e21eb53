#include "voi/engine.hpp"

#include <cmath>

namespace voi {

UtilityMatrix UtilityMatrix::scaled_identity(int n, double stakes) {
  UtilityMatrix u;
  u.num_hypotheses = n;
  u.num_actions = n;
  u.values.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) u.at(i, i) = stakes;
  return u;
}

UtilityMatrix UtilityMatrix::scaled(double lambda) const {
  UtilityMatrix u = *this;
  for (double& v : u.values) v *= lambda;
  return u;
}

void UtilityMatrix::validate() const {
  if (num_hypotheses <= 0 || num_actions <= 0 ||
      values.size() != static_cast<size_t>(num_hypotheses) * num_actions)
    fail(Errc::dimension_mismatch, "utility matrix dimensions are inconsistent");
  for (double v : values)
    if (!std::isfinite(v)) fail(Errc::non_finite, "utility matrix has a non-finite entry");
}

double expected_utility(const BeliefState& b, int action, const UtilityMatrix& utility) {
  if (b.size() != utility.num_hypotheses)
    fail(Errc::dimension_mismatch, "belief and utility disagree on hypothesis count");
  if (action < 0 || action >= utility.num_actions)
    fail(Errc::dimension_mismatch, "action id out of range");
  double eu = 0.0;
  for (int theta = 0; theta < b.size(); ++theta)
    eu += b.probs[theta] * utility.at(theta, action);
  return eu;
}

ActionValue best_action_value(const BeliefState& b, const UtilityMatrix& utility) {
  if (utility.num_actions < 1) fail(Errc::empty_action_set, "no actions to evaluate");
  if (b.size() != utility.num_hypotheses)
    fail(Errc::dimension_mismatch, "belief and utility disagree on hypothesis count");

  ActionValue best{0, 0.0};
  for (int a = 0; a < utility.num_actions; ++a) {
    double eu = 0.0;
    for (int theta = 0; theta < b.size(); ++theta)
      eu += b.probs[theta] * utility.at(theta, a);
    if (a == 0 || eu > best.value) best = {a, eu};  // ties keep the lowest id
  }
  return best;
}

double posterior_value(const BeliefState& b, int question, const AnswerLikelihood& likelihood,
                       const UtilityMatrix& utility) {
  AnswerDistribution marginal = answer_marginal(b, question, likelihood);
  double v = 0.0;
  for (int y = 0; y < marginal.size(); ++y) {
    if (marginal[y] <= 0.0) continue;  // impossible answers contribute zero expectation
    BeliefState posterior = bayes_update(b, question, y, likelihood);
    v += marginal[y] * best_action_value(posterior, utility).value;
  }
  return v;
}

double value_of_information(const BeliefState& b, int question,
                            const AnswerLikelihood& likelihood, const UtilityMatrix& utility) {
  return posterior_value(b, question, likelihood, utility) -
         best_action_value(b, utility).value;
}

double net_voi(double voi, const CostModel& cost) { return voi - cost.per_question_cost; }
double net_voi(double voi, const CostModel& cost, int question) {
  return voi - cost.cost(question);
}

namespace {

VoiReport voi_step_impl(const BeliefState& b, std::span<const int> candidates,
                        const std::function<double(int)>& voi_of, const UtilityMatrix& utility,
                        const CostModel& cost) {
  VoiReport report;
  ActionValue now = best_action_value(b, utility);
  report.value_now = now.value;
  report.scores.reserve(candidates.size());

  int best_q = -1;
  double best_net = 0.0;
  for (int q : candidates) {
    double voi = voi_of(q);
    double net = voi - cost.cost(q);
    report.scores.push_back({q, voi, net});
    if (net > 0.0 && (best_q < 0 || net > best_net || (net == best_net && q < best_q))) {
      best_q = q;
      best_net = net;
    }
  }

  if (best_q < 0)
    report.chosen = Commit{now.action};
  else
    report.chosen = Clarify{best_q};
  return report;
}

}  // namespace

VoiReport voi_step(const BeliefState& b, std::span<const int> candidates,
                   const AnswerLikelihood& likelihood, const UtilityMatrix& utility,
                   const CostModel& cost) {
  return voi_step_impl(
      b, candidates,
      [&](int q) { return value_of_information(b, q, likelihood, utility); }, utility, cost);
}

VoiReport voi_step_with(const BeliefState& b, std::span<const int> candidates,
                        const AnswerModelFn& answer_model, const PosteriorFn& posterior,
                        const UtilityMatrix& utility, const CostModel& cost) {
  double value_now = best_action_value(b, utility).value;
  auto voi_of = [&](int q) {
    std::vector<AnswerDistribution> rows = answer_model(q);
    if (static_cast<int>(rows.size()) != b.size())
      fail(Errc::dimension_mismatch, "answer model returned wrong hypothesis count");
    // marginal p(y|q,b) over the modeled rows
    std::vector<double> marginal(rows.empty() ? 0 : rows[0].size(), 0.0);
    for (int theta = 0; theta < b.size(); ++theta) {
      if (b.probs[theta] == 0.0) continue;
      if (rows[theta].size() != static_cast<int>(marginal.size()))
        fail(Errc::dimension_mismatch, "ragged answer model rows");
      for (size_t y = 0; y < marginal.size(); ++y)
        marginal[y] += rows[theta][static_cast<int>(y)] * b.probs[theta];
    }
    double v_post = 0.0;
    for (size_t y = 0; y < marginal.size(); ++y) {
      if (marginal[y] <= 0.0) continue;
      BeliefState by = posterior(q, static_cast<int>(y));
      v_post += marginal[y] * best_action_value(by, utility).value;
    }
    return v_post - value_now;
  };
  return voi_step_impl(b, candidates, voi_of, utility, cost);
}

}  // namespace voi
