#include "voi/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "voi/rng.hpp"

namespace voi {

void TaskSpec::validate() const {
  if (hypotheses.empty()) fail(Errc::dimension_mismatch, name + ": no hypotheses");
  for (int i = 0; i < num_hypotheses(); ++i)
    if (hypotheses[i].id != i)
      fail(Errc::dimension_mismatch, name + ": hypothesis ids must be dense 0..N-1");
  prior.validate();
  if (prior.size() != num_hypotheses())
    fail(Errc::dimension_mismatch, name + ": prior length does not match hypothesis count");
  utility.validate();
  if (utility.num_hypotheses != num_hypotheses() || utility.num_actions != num_actions())
    fail(Errc::dimension_mismatch, name + ": utility dimensions do not match");
  for (const Question& q : questions) {
    if (q.answer_labels.size() < 2)
      fail(Errc::dimension_mismatch, name + ": question " + std::to_string(q.id) +
                                         " needs at least 2 answer labels");
    for (int theta = 0; theta < num_hypotheses(); ++theta)
      if (!likelihood.has_row(q.id, theta))
        fail(Errc::missing_likelihood_row,
             name + ": likelihood missing for question " + std::to_string(q.id) +
                 ", hypothesis " + std::to_string(theta));
    if (likelihood.num_answers(q.id) != static_cast<int>(q.answer_labels.size()))
      fail(Errc::dimension_mismatch, name + ": likelihood and labels disagree on answer count");
  }
  if (fixed_truth && (*fixed_truth < 0 || *fixed_truth >= num_hypotheses()))
    fail(Errc::dimension_mismatch, name + ": fixed truth out of range");
}

// ---- Attribute matrix -----------------------------------------------------------

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

}  // namespace

AttributeMatrix AttributeMatrix::parse_tsv(std::istream& in, const std::string& source_name) {
  AttributeMatrix m;
  std::string line;
  if (!std::getline(in, line))
    fail(Errc::malformed_matrix, source_name + ": empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_tabs(line);
  if (header.size() < 2)
    fail(Errc::malformed_matrix, source_name + ": header needs a label column and attributes");
  m.attribute_names.assign(header.begin() + 1, header.end());

  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size())
      fail(Errc::malformed_matrix, source_name + ": row '" + fields[0] + "' has " +
                                       std::to_string(fields.size() - 1) + " cells, expected " +
                                       std::to_string(m.attribute_names.size()));
    if (!seen.insert(fields[0]).second)
      fail(Errc::malformed_matrix, source_name + ": duplicate row label '" + fields[0] + "'");
    m.row_labels.push_back(fields[0]);
    for (size_t c = 1; c < fields.size(); ++c) {
      double v;
      if (fields[c] == "0")
        v = 0.0;
      else if (fields[c] == "0.5")
        v = 0.5;
      else if (fields[c] == "1")
        v = 1.0;
      else
        fail(Errc::malformed_matrix, source_name + ": cell '" + fields[c] +
                                         "' is not one of 0, 0.5, 1");
      m.cells.push_back(v);
    }
  }
  if (m.row_labels.empty()) fail(Errc::malformed_matrix, source_name + ": no data rows");
  return m;
}

AttributeMatrix AttributeMatrix::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open attribute matrix: " + path);
  return parse_tsv(in, path);
}

TaskSpec load_attribute_task(const AttributeMatrix& matrix, double stakes, double eta,
                             const std::string& name) {
  if (eta < 0.0 || eta >= 0.5)
    fail(Errc::bad_config, "attribute noise must be in [0, 0.5), got " + std::to_string(eta));
  if (stakes <= 0.0) fail(Errc::bad_config, "stakes must be positive");
  if (matrix.rows() == 0 || matrix.cols() == 0)
    fail(Errc::malformed_matrix, "attribute matrix is empty");

  TaskSpec task;
  task.name = name;
  task.kind = TaskKind::attribute;

  const int n = matrix.rows();
  task.hypotheses.reserve(n);
  task.actions.reserve(n);
  for (int i = 0; i < n; ++i) {
    task.hypotheses.push_back({i, matrix.row_labels[i]});
    task.actions.push_back(matrix.row_labels[i]);
  }
  task.utility = UtilityMatrix::scaled_identity(n, stakes);

  task.likelihood = AnswerLikelihood(matrix.cols(), n);
  for (int c = 0; c < matrix.cols(); ++c) {
    Question q;
    q.id = c;
    q.text = matrix.attribute_names[c] + "?";
    q.answer_labels = {"yes", "no"};
    task.questions.push_back(std::move(q));
    for (int r = 0; r < n; ++r) {
      double v = matrix.at(r, c);
      double p_yes = v * (1.0 - eta) + (1.0 - v) * eta;
      task.likelihood.set_row(c, r, {p_yes, 1.0 - p_yes});
    }
  }

  task.prior = normalize(std::vector<double>(n, 1.0));
  task.initial_query = "Guess which one of " + std::to_string(n) + " candidates I mean.";
  task.k_max_default = 20;
  task.validate();
  return task;
}

// ---- Shared operations -----------------------------------------------------------

int simulate_answer(const TaskSpec& task, int truth, int question, std::mt19937_64& rng) {
  std::span<const double> row = task.likelihood.row(question, truth);
  std::vector<double> probs(row.begin(), row.end());
  return sample_index(probs, rng);
}

double terminal_utility(const TaskSpec& task, int truth, int action) {
  if (truth < 0 || truth >= task.num_hypotheses() || action < 0 || action >= task.num_actions())
    fail(Errc::dimension_mismatch, "terminal_utility ids out of range");
  return task.utility.at(truth, action);
}

namespace {

double entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

// H(b) - Σ_y p(y)·H(b_y): mutual information between θ and the answer.
double expected_entropy_reduction(const TaskSpec& task, const BeliefState& belief, int question) {
  AnswerDistribution marginal = answer_marginal(belief, question, task.likelihood);
  double h_prior = entropy(belief.probs);
  double h_post = 0.0;
  for (int y = 0; y < marginal.size(); ++y) {
    if (marginal[y] <= 0.0) continue;
    BeliefState by = bayes_update(belief, question, y, task.likelihood);
    h_post += marginal[y] * entropy(by.probs);
  }
  return h_prior - h_post;
}

}  // namespace

std::vector<int> gen_questions(const TaskSpec& task, const std::vector<int>& asked,
                               const BeliefState& belief, int m) {
  if (m < 1) fail(Errc::bad_config, "candidate budget must be at least 1");
  std::unordered_set<int> asked_set(asked.begin(), asked.end());
  std::vector<int> unasked;
  for (const Question& q : task.questions)
    if (!asked_set.count(q.id)) unasked.push_back(q.id);

  if (static_cast<int>(unasked.size()) <= m) return unasked;  // id order, no ranking needed

  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(unasked.size());
  for (int q : unasked) ranked.push_back({expected_entropy_reduction(task, belief, q), q});
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) out.push_back(ranked[i].second);
  std::sort(out.begin(), out.end());  // stable presentation order for downstream tie-breaks
  return out;
}

// ---- Built-in selection ------------------------------------------------------------

TaskSpec make_toy_task() {
  AttributeMatrix m;
  m.row_labels = {"left", "right"};
  m.attribute_names = {"is_it_the_left_one", "is_it_shiny"};
  m.cells = {1.0, 0.5,
             0.0, 0.5};
  TaskSpec task = load_attribute_task(m, 1.0, 0.0, "toy");
  task.k_max_default = 2;
  task.initial_query = "Guess which of the two I mean.";
  return task;
}

namespace {

const AttributeMatrix& bundled_matrix(const std::string& data_dir, const std::string& file) {
  // Matrices are immutable once loaded; cache per path.
  static std::unordered_map<std::string, AttributeMatrix>* cache =
      new std::unordered_map<std::string, AttributeMatrix>;
  static std::mutex mu;
  std::string path = data_dir + "/" + file;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache->find(path);
  if (it == cache->end()) it = cache->emplace(path, AttributeMatrix::from_file(path)).first;
  return it->second;
}

}  // namespace

TaskSpec make_task(const std::string& selector, uint64_t seed, const TaskParams& params) {
  if (selector == "toy") return make_toy_task();
  if (selector == "animal") {
    TaskSpec t = load_attribute_task(bundled_matrix(params.data_dir, "animals.tsv"),
                                     params.animal_stakes, params.attribute_noise, "animal");
    t.k_max_default = 20;
    return t;
  }
  if (selector == "medical") {
    TaskSpec t = load_attribute_task(bundled_matrix(params.data_dir, "conditions.tsv"),
                                     params.medical_stakes, params.attribute_noise, "medical");
    t.k_max_default = 10;
    return t;
  }
  if (selector == "mixed20q")
    return make_task(seed % 2 == 0 ? "animal" : "medical", seed, params);
  if (selector == "flight")
    return make_flight_task(seed, params.flight_choice_noise, params.flight_answer_noise);
  if (selector == "shop") return make_shop_task(seed, params.shop_catalog_size);
  fail(Errc::bad_config, "unknown task selector: " + selector);
}

bool selector_is_seed_dependent(const std::string& selector) {
  return selector == "mixed20q" || selector == "flight" || selector == "shop";
}

std::vector<std::string> known_task_selectors() {
  return {"toy", "animal", "medical", "mixed20q", "flight", "shop"};
}

}  // namespace voi
