#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "voi/error.hpp"

namespace voi {

// Tolerance for "sums to one" checks on stored distributions.
inline constexpr double kProbTolerance = 1e-9;

struct Hypothesis {
  int id = 0;  // dense 0..N-1 within a task
  std::string label;
};

// Probability distribution over a finite hypothesis set.
struct BeliefState {
  std::vector<double> probs;
  int turn = 0;

  int size() const { return static_cast<int>(probs.size()); }
  double operator[](int theta) const { return probs[theta]; }

  // Throws unless entries are finite, non-negative and sum to 1 within tolerance.
  void validate() const;
};

// Distribution over one question's answer space.
struct AnswerDistribution {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
  double operator[](int y) const { return probs[y]; }
  void validate() const;
};

// p(y | q, theta) tables for a set of closed-ended questions.
// Question ids are dense 0..Q-1; hypothesis ids dense 0..N-1.
class AnswerLikelihood {
 public:
  AnswerLikelihood() = default;
  AnswerLikelihood(int num_questions, int num_hypotheses)
      : num_hypotheses_(num_hypotheses), tables_(num_questions) {}

  // Stores p(. | q, theta); the vector must be a valid distribution.
  void set_row(int question, int theta, std::vector<double> probs);

  std::span<const double> row(int question, int theta) const;

  bool has_question(int question) const;
  bool has_row(int question, int theta) const;
  int num_questions() const { return static_cast<int>(tables_.size()); }
  int num_hypotheses() const { return num_hypotheses_; }
  int num_answers(int question) const;

 private:
  struct Table {
    int num_answers = 0;
    std::vector<double> p;           // theta-major, |N| x num_answers
    std::vector<char> row_present;   // per theta
  };

  const Table& table(int question) const;

  int num_hypotheses_ = 0;
  std::vector<Table> tables_;
};

// Rescales non-negative weights into a belief. Rejects all-zero, negative and
// non-finite input.
BeliefState normalize(const std::vector<double>& weights);

// Posterior after observing answer y to question q: result ∝ b(θ)·p(y|q,θ).
// Increments the turn counter. Throws zero_evidence when the observed answer
// has probability zero under the current belief.
BeliefState bayes_update(const BeliefState& b, int question, int answer,
                         const AnswerLikelihood& likelihood);

// p(y | q, b) = Σ_θ p(y|q,θ)·b(θ).
AnswerDistribution answer_marginal(const BeliefState& b, int question,
                                   const AnswerLikelihood& likelihood);

// Maximizing hypothesis and its probability; ties break to the lowest id.
std::pair<int, double> max_belief(const BeliefState& b);

}  // namespace voi
