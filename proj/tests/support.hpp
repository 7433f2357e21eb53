#pragma once

// Shared fixtures for the test suites: tiny random problem instances and
// independent brute-force oracles. The oracles use plain nested loops on raw
// vectors and never call into the library code they are checking.

#include <cmath>
#include <random>
#include <vector>

#include "voi/engine.hpp"

namespace testsupport {

struct RawInstance {
  std::vector<double> belief;                  // normalized
  std::vector<std::vector<double>> rows;       // rows[theta][y] = p(y|q,theta)
  std::vector<std::vector<double>> utility;    // utility[theta][a]
};

inline RawInstance random_instance(std::mt19937_64& rng, int max_hyps = 6, int max_answers = 3,
                                   int max_actions = 6) {
  std::uniform_int_distribution<int> hyp_count(2, max_hyps);
  std::uniform_int_distribution<int> ans_count(2, max_answers);
  std::uniform_int_distribution<int> act_count(1, max_actions);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RawInstance inst;
  int n = hyp_count(rng);
  int ny = ans_count(rng);
  int na = act_count(rng);

  inst.belief.resize(n);
  double sum = 0.0;
  for (double& p : inst.belief) {
    p = unit(rng) + 1e-3;
    sum += p;
  }
  for (double& p : inst.belief) p /= sum;

  inst.rows.assign(n, std::vector<double>(ny));
  for (auto& row : inst.rows) {
    double rs = 0.0;
    for (double& p : row) {
      p = unit(rng) + 1e-3;
      rs += p;
    }
    for (double& p : row) p /= rs;
  }

  inst.utility.assign(n, std::vector<double>(na));
  for (auto& row : inst.utility)
    for (double& u : row) u = unit(rng);
  return inst;
}

// max_a sum_theta b[theta] * U[theta][a], by direct enumeration.
inline double oracle_value(const std::vector<double>& belief,
                           const std::vector<std::vector<double>>& utility) {
  int actions = static_cast<int>(utility[0].size());
  double best = -1e300;
  for (int a = 0; a < actions; ++a) {
    double eu = 0.0;
    for (size_t theta = 0; theta < belief.size(); ++theta)
      eu += belief[theta] * utility[theta][a];
    if (eu > best) best = eu;
  }
  return best;
}

// sum_y p(y) * V(posterior_y), enumerating every answer and renormalizing the
// posterior by hand.
inline double oracle_posterior_value(const RawInstance& inst) {
  int ny = static_cast<int>(inst.rows[0].size());
  double total = 0.0;
  for (int y = 0; y < ny; ++y) {
    double py = 0.0;
    for (size_t theta = 0; theta < inst.belief.size(); ++theta)
      py += inst.belief[theta] * inst.rows[theta][y];
    if (py == 0.0) continue;
    std::vector<double> posterior(inst.belief.size());
    for (size_t theta = 0; theta < inst.belief.size(); ++theta)
      posterior[theta] = inst.belief[theta] * inst.rows[theta][y] / py;
    total += py * oracle_value(posterior, inst.utility);
  }
  return total;
}

inline double oracle_voi(const RawInstance& inst) {
  return oracle_posterior_value(inst) - oracle_value(inst.belief, inst.utility);
}

// ---- Adapters into library types -------------------------------------------------

inline voi::BeliefState to_belief(const std::vector<double>& probs) {
  voi::BeliefState b;
  b.probs = probs;
  return b;
}

inline voi::AnswerLikelihood single_question_likelihood(
    const std::vector<std::vector<double>>& rows) {
  voi::AnswerLikelihood L(1, static_cast<int>(rows.size()));
  for (size_t theta = 0; theta < rows.size(); ++theta)
    L.set_row(0, static_cast<int>(theta), rows[theta]);
  return L;
}

inline voi::UtilityMatrix to_utility(const std::vector<std::vector<double>>& values) {
  voi::UtilityMatrix u;
  u.num_hypotheses = static_cast<int>(values.size());
  u.num_actions = static_cast<int>(values[0].size());
  for (const auto& row : values) u.values.insert(u.values.end(), row.begin(), row.end());
  return u;
}

}  // namespace testsupport
