#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "voi/engine.hpp"

namespace voi {

struct Question {
  int id = 0;
  std::string text;
  std::vector<std::string> answer_labels;  // at least 2; closed-ended
};

enum class TaskKind { attribute, flight, shop };

// ---- Flight preference elicitation ------------------------------------------

inline constexpr int kFlightFeatures = 8;
inline constexpr int kFlightOptionsPerRound = 3;
inline constexpr int kFlightSupportRounds = 5;
inline constexpr int kFlightHypotheses = 6561;  // 3^8 weight vectors

using FlightOption = std::array<double, kFlightFeatures>;

struct FlightRound {
  std::array<FlightOption, kFlightOptionsPerRound> options;
  int chosen = 0;
};

struct FlightScenario {
  uint64_t seed = 0;
  double choice_noise = 0.05;                         // epsilon
  double answer_noise = 0.1;                          // eta_f
  std::array<int, kFlightFeatures> latent_weights{};  // entries in {-1,0,+1}
  std::array<FlightRound, kFlightSupportRounds> support;
  std::array<FlightOption, kFlightOptionsPerRound> holdout;
};

// ---- Ambiguous shopping catalog ----------------------------------------------

struct Product {
  int id = 0;
  std::string category;
  std::string color;
  std::string size;
  std::string brand;
  std::string price_band;
};

struct ShopScenario {
  uint64_t seed = 0;
  std::vector<Product> catalog;
  int truth = 0;  // index into catalog
};

// A complete benchmark environment: hypotheses, actions, utilities, the
// question set with its answer model, the prior, and the ground-truth rule.
struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::attribute;
  std::vector<Hypothesis> hypotheses;
  std::vector<std::string> actions;
  UtilityMatrix utility;
  std::vector<Question> questions;
  AnswerLikelihood likelihood;
  BeliefState prior;
  std::string initial_query;
  int k_max_default = 20;

  // Set for generated scenarios (flight, shop) where the truth is part of the
  // scenario; unset for guessing tasks where the truth is drawn from the prior.
  std::optional<int> fixed_truth;

  // Generated tasks keep their source scenario for manifest serialization.
  std::variant<std::monostate, FlightScenario, ShopScenario> scenario;

  int num_hypotheses() const { return static_cast<int>(hypotheses.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }
  int num_questions() const { return static_cast<int>(questions.size()); }

  // Construction-time checks: valid prior, complete likelihood coverage,
  // finite utility with matching dimensions.
  void validate() const;
};

// Rectangular no/maybe/yes table: rows are hypotheses, columns are attributes,
// cells restricted to {0, 0.5, 1}.
struct AttributeMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> attribute_names;
  std::vector<double> cells;  // row-major

  int rows() const { return static_cast<int>(row_labels.size()); }
  int cols() const { return static_cast<int>(attribute_names.size()); }
  double at(int r, int c) const { return cells[static_cast<size_t>(r) * cols() + c]; }

  // Tab-separated, UTF-8: header row is "label<TAB>attr1<TAB>...", each data
  // row is "name<TAB>cell..." with cells in {0, 0.5, 1}.
  static AttributeMatrix parse_tsv(std::istream& in, const std::string& source_name = "<stream>");
  static AttributeMatrix from_file(const std::string& path);
};

// Guess-the-row task: one yes/no question per attribute with flip noise eta,
// indicator utility scaled by `stakes`, uniform prior.
TaskSpec load_attribute_task(const AttributeMatrix& matrix, double stakes, double eta,
                             const std::string& name);

// Encode/decode a {-1,0,+1}^8 weight vector as a dense hypothesis id (base 3).
int flight_weights_to_id(const std::array<int, kFlightFeatures>& w);
std::array<int, kFlightFeatures> flight_id_to_weights(int id);

FlightScenario sample_flight_scenario(uint64_t seed, double choice_noise, double answer_noise);
TaskSpec flight_task_from_scenario(const FlightScenario& scenario);
TaskSpec make_flight_task(uint64_t seed, double choice_noise, double answer_noise);

ShopScenario sample_shop_scenario(uint64_t seed, int catalog_size);
TaskSpec shop_task_from_scenario(const ShopScenario& scenario);
TaskSpec make_shop_task(uint64_t seed, int catalog_size);

// ---- Shared operations --------------------------------------------------------

// Draws the user's answer from p(y | q, truth).
int simulate_answer(const TaskSpec& task, int truth, int question, std::mt19937_64& rng);

double terminal_utility(const TaskSpec& task, int truth, int action);

// Up to m not-yet-asked questions. When truncation is needed the unasked set
// is ranked by expected entropy reduction under `belief` (a pre-filter only;
// decision policies re-score candidates).
std::vector<int> gen_questions(const TaskSpec& task, const std::vector<int>& asked,
                               const BeliefState& belief, int m);

// ---- Built-in task selection ---------------------------------------------------

// Parameters for the bundled benchmark family.
struct TaskParams {
  std::string data_dir;        // directory holding the bundled matrices
  double attribute_noise = 0.05;
  double animal_stakes = 1.0;
  double medical_stakes = 10.0;
  double flight_choice_noise = 0.05;
  double flight_answer_noise = 0.1;
  int shop_catalog_size = 50;
};

// Selectors: "toy", "animal", "medical", "flight", "shop", and "mixed20q"
// (animal for even seeds, medical for odd seeds). The seed matters only for
// generated tasks and for the mixed split.
TaskSpec make_task(const std::string& selector, uint64_t seed, const TaskParams& params);
bool selector_is_seed_dependent(const std::string& selector);
std::vector<std::string> known_task_selectors();

// Tiny two-hypothesis task used in documentation and interactive demos:
// one separating question, one uninformative question, noiseless answers.
TaskSpec make_toy_task();

// ---- Manifests ------------------------------------------------------------------

// Serialized form of a generated task's scenario (JSON), sufficient to rebuild
// the TaskSpec bit-exactly. Only flight and shop tasks carry a scenario.
std::string task_manifest(const TaskSpec& task);
TaskSpec task_from_manifest(const std::string& manifest_json);

}  // namespace voi
