#include "voi/belief.hpp"

#include <cmath>
#include <numeric>

namespace voi {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::all_zero: return "AllZero";
    case Errc::negative_weight: return "NegativeWeight";
    case Errc::non_finite: return "NonFinite";
    case Errc::zero_evidence: return "ZeroEvidence";
    case Errc::missing_likelihood_row: return "MissingLikelihoodRow";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_action_set: return "EmptyActionSet";
    case Errc::malformed_matrix: return "MalformedMatrix";
    case Errc::degenerate_prior: return "DegeneratePrior";
    case Errc::empty_category: return "EmptyCategory";
    case Errc::backend_unavailable: return "BackendUnavailable";
    case Errc::parse_failure: return "ParseFailure";
    case Errc::key_mismatch: return "KeyMismatch";
    case Errc::out_of_range_sum: return "OutOfRangeSum";
    case Errc::value_out_of_range: return "ValueOutOfRange";
    case Errc::confidence_out_of_range: return "ConfidenceOutOfRange";
    case Errc::unknown_label: return "UnknownLabel";
    case Errc::transport: return "Transport";
    case Errc::estimator_failure: return "EstimatorFailure";
    case Errc::io: return "Io";
    case Errc::schema_version_mismatch: return "SchemaVersionMismatch";
    case Errc::bad_config: return "BadConfig";
  }
  return "Unknown";
}

namespace {

void check_distribution(const std::vector<double>& probs, const char* what) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p)) fail(Errc::non_finite, std::string(what) + " has a non-finite entry");
    if (p < 0.0) fail(Errc::negative_weight, std::string(what) + " has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTolerance)
    fail(Errc::out_of_range_sum,
         std::string(what) + " sums to " + std::to_string(sum) + ", expected 1");
}

}  // namespace

void BeliefState::validate() const {
  if (probs.empty()) fail(Errc::dimension_mismatch, "belief over empty hypothesis set");
  check_distribution(probs, "belief");
}

void AnswerDistribution::validate() const { check_distribution(probs, "answer distribution"); }

void AnswerLikelihood::set_row(int question, int theta, std::vector<double> probs) {
  if (question < 0 || question >= num_questions())
    fail(Errc::missing_likelihood_row, "question id out of range: " + std::to_string(question));
  if (theta < 0 || theta >= num_hypotheses_)
    fail(Errc::missing_likelihood_row, "hypothesis id out of range: " + std::to_string(theta));
  check_distribution(probs, "likelihood row");

  Table& t = tables_[question];
  if (t.num_answers == 0) {
    t.num_answers = static_cast<int>(probs.size());
    t.p.assign(static_cast<size_t>(num_hypotheses_) * t.num_answers, 0.0);
    t.row_present.assign(num_hypotheses_, 0);
  } else if (t.num_answers != static_cast<int>(probs.size())) {
    fail(Errc::dimension_mismatch, "answer space size changed within one question");
  }
  std::copy(probs.begin(), probs.end(), t.p.begin() + static_cast<size_t>(theta) * t.num_answers);
  t.row_present[theta] = 1;
}

const AnswerLikelihood::Table& AnswerLikelihood::table(int question) const {
  if (question < 0 || question >= num_questions() || tables_[question].num_answers == 0)
    fail(Errc::missing_likelihood_row, "no likelihood for question " + std::to_string(question));
  return tables_[question];
}

std::span<const double> AnswerLikelihood::row(int question, int theta) const {
  const Table& t = table(question);
  if (theta < 0 || theta >= num_hypotheses_ || !t.row_present[theta])
    fail(Errc::missing_likelihood_row, "no likelihood row for question " +
                                           std::to_string(question) + ", hypothesis " +
                                           std::to_string(theta));
  return {t.p.data() + static_cast<size_t>(theta) * t.num_answers,
          static_cast<size_t>(t.num_answers)};
}

bool AnswerLikelihood::has_question(int question) const {
  return question >= 0 && question < num_questions() && tables_[question].num_answers > 0;
}

bool AnswerLikelihood::has_row(int question, int theta) const {
  return has_question(question) && theta >= 0 && theta < num_hypotheses_ &&
         tables_[question].row_present[theta];
}

int AnswerLikelihood::num_answers(int question) const { return table(question).num_answers; }

BeliefState normalize(const std::vector<double>& weights) {
  if (weights.empty()) fail(Errc::dimension_mismatch, "cannot normalize an empty vector");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) fail(Errc::non_finite, "weight vector has a non-finite entry");
    if (w < 0.0) fail(Errc::negative_weight, "weight vector has a negative entry");
    sum += w;
  }
  if (sum == 0.0) fail(Errc::all_zero, "all weights are zero");

  BeliefState out;
  out.probs.resize(weights.size());
  for (size_t i = 0; i < weights.size(); ++i) out.probs[i] = weights[i] / sum;
  return out;
}

BeliefState bayes_update(const BeliefState& b, int question, int answer,
                         const AnswerLikelihood& likelihood) {
  const int n = b.size();
  if (likelihood.num_hypotheses() != n)
    fail(Errc::dimension_mismatch, "belief and likelihood disagree on hypothesis count");

  std::vector<double> weights(n, 0.0);
  double evidence = 0.0;
  for (int theta = 0; theta < n; ++theta) {
    if (b.probs[theta] == 0.0) continue;  // zero-mass rows need not exist
    std::span<const double> row = likelihood.row(question, theta);
    if (answer < 0 || answer >= static_cast<int>(row.size()))
      fail(Errc::missing_likelihood_row, "answer id out of range for question " +
                                             std::to_string(question));
    weights[theta] = b.probs[theta] * row[answer];
    evidence += weights[theta];
  }
  if (evidence == 0.0)
    fail(Errc::zero_evidence, "observed answer " + std::to_string(answer) +
                                  " to question " + std::to_string(question) +
                                  " is impossible under the current belief");

  BeliefState out = normalize(weights);
  out.turn = b.turn + 1;
  return out;
}

AnswerDistribution answer_marginal(const BeliefState& b, int question,
                                   const AnswerLikelihood& likelihood) {
  const int n = b.size();
  if (likelihood.num_hypotheses() != n)
    fail(Errc::dimension_mismatch, "belief and likelihood disagree on hypothesis count");

  AnswerDistribution out;
  out.probs.assign(likelihood.num_answers(question), 0.0);
  for (int theta = 0; theta < n; ++theta) {
    if (b.probs[theta] == 0.0) continue;
    std::span<const double> row = likelihood.row(question, theta);
    for (size_t y = 0; y < row.size(); ++y) out.probs[y] += row[y] * b.probs[theta];
  }
  return out;
}

std::pair<int, double> max_belief(const BeliefState& b) {
  b.validate();
  int best = 0;
  for (int i = 1; i < b.size(); ++i)
    if (b.probs[i] > b.probs[best]) best = i;  // strict: ties keep the lowest id
  return {best, b.probs[best]};
}

}  // namespace voi
