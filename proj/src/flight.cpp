#include <algorithm>
#include <cmath>

#include "voi/rng.hpp"
#include "voi/tasks.hpp"

namespace voi {

int flight_weights_to_id(const std::array<int, kFlightFeatures>& w) {
  int id = 0;
  for (int i = kFlightFeatures - 1; i >= 0; --i) id = id * 3 + (w[i] + 1);
  return id;
}

std::array<int, kFlightFeatures> flight_id_to_weights(int id) {
  std::array<int, kFlightFeatures> w{};
  for (int i = 0; i < kFlightFeatures; ++i) {
    w[i] = id % 3 - 1;
    id /= 3;
  }
  return w;
}

namespace {

double dot(const std::array<int, kFlightFeatures>& w, const FlightOption& x) {
  double d = 0.0;
  for (int i = 0; i < kFlightFeatures; ++i) d += w[i] * x[i];
  return d;
}

// Deterministic argmax over the round's options; ties break to the lowest index.
int preferred_option(const std::array<int, kFlightFeatures>& w,
                     const std::array<FlightOption, kFlightOptionsPerRound>& options) {
  int best = 0;
  double best_r = dot(w, options[0]);
  for (int i = 1; i < kFlightOptionsPerRound; ++i) {
    double r = dot(w, options[i]);
    if (r > best_r) {
      best = i;
      best_r = r;
    }
  }
  return best;
}

// P(choice | w) under the epsilon-uniform choice model.
double choice_likelihood(int choice, int argmax, double eps) {
  double base = eps / kFlightOptionsPerRound;
  return choice == argmax ? 1.0 - eps + base : base;
}

}  // namespace

FlightScenario sample_flight_scenario(uint64_t seed, double choice_noise, double answer_noise) {
  if (choice_noise < 0.0 || choice_noise >= 0.5 || answer_noise < 0.0 || answer_noise >= 0.5)
    fail(Errc::bad_config, "flight noise parameters must be in [0, 0.5)");

  FlightScenario s;
  s.seed = seed;
  s.choice_noise = choice_noise;
  s.answer_noise = answer_noise;

  std::mt19937_64 rng = make_rng(mix64(seed, 0xf715f715ULL));
  std::uniform_int_distribution<int> tri(-1, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int i = 0; i < kFlightFeatures; ++i) s.latent_weights[i] = tri(rng);

  auto sample_option = [&]() {
    FlightOption x;
    for (int i = 0; i < kFlightFeatures; ++i) x[i] = unit(rng);
    return x;
  };

  for (FlightRound& round : s.support) {
    for (FlightOption& opt : round.options) opt = sample_option();
    int argmax = preferred_option(s.latent_weights, round.options);
    if (unit(rng) < choice_noise) {
      std::uniform_int_distribution<int> pick(0, kFlightOptionsPerRound - 1);
      round.chosen = pick(rng);
    } else {
      round.chosen = argmax;
    }
  }
  for (FlightOption& opt : s.holdout) opt = sample_option();
  return s;
}

TaskSpec flight_task_from_scenario(const FlightScenario& s) {
  TaskSpec task;
  task.name = "flight";
  task.kind = TaskKind::flight;
  task.scenario = s;
  task.k_max_default = 4;
  task.initial_query = "Pick the flight I will prefer, based on my past choices.";

  static const char* kFeatureNames[kFlightFeatures] = {
      "price",          "stops",          "duration",      "departure_time",
      "arrival_time",   "airline_rating", "seat_comfort",  "baggage_allowance"};

  task.hypotheses.reserve(kFlightHypotheses);
  for (int id = 0; id < kFlightHypotheses; ++id) {
    std::array<int, kFlightFeatures> w = flight_id_to_weights(id);
    std::string label = "w[";
    for (int i = 0; i < kFlightFeatures; ++i) {
      label += (w[i] < 0 ? "-" : (w[i] > 0 ? "+" : "0"));
    }
    label += "]";
    task.hypotheses.push_back({id, std::move(label)});
  }

  // Prior proportional to the likelihood of the observed support choices.
  std::vector<double> weights(kFlightHypotheses, 1.0);
  bool any_positive = false;
  for (int id = 0; id < kFlightHypotheses; ++id) {
    std::array<int, kFlightFeatures> w = flight_id_to_weights(id);
    for (const FlightRound& round : s.support) {
      int argmax = preferred_option(w, round.options);
      weights[id] *= choice_likelihood(round.chosen, argmax, s.choice_noise);
    }
    any_positive |= weights[id] > 0.0;
  }
  if (!any_positive)
    fail(Errc::degenerate_prior, "no weight vector explains the observed support choices");
  task.prior = normalize(weights);

  // One preference question per feature, states {lower, higher, none}.
  task.likelihood = AnswerLikelihood(kFlightFeatures, kFlightHypotheses);
  for (int f = 0; f < kFlightFeatures; ++f) {
    Question q;
    q.id = f;
    q.text = std::string("Do you prefer ") + kFeatureNames[f] +
             " to be lower, higher, or do you not care?";
    q.answer_labels = {"lower", "higher", "none"};
    task.questions.push_back(std::move(q));
  }
  double off = s.answer_noise / 2.0;
  for (int id = 0; id < kFlightHypotheses; ++id) {
    std::array<int, kFlightFeatures> w = flight_id_to_weights(id);
    for (int f = 0; f < kFlightFeatures; ++f) {
      int truth = w[f] < 0 ? 0 : (w[f] > 0 ? 1 : 2);  // lower / higher / none
      std::vector<double> row(3, off);
      row[truth] = 1.0 - s.answer_noise;
      task.likelihood.set_row(f, id, std::move(row));
    }
  }

  // Actions are the holdout options; utility is the min-max-normalized latent
  // reward of each option. When a hypothesis is indifferent across all three
  // options every action counts as optimal.
  task.actions = {"flight_1", "flight_2", "flight_3"};
  task.utility.num_hypotheses = kFlightHypotheses;
  task.utility.num_actions = kFlightOptionsPerRound;
  task.utility.values.assign(static_cast<size_t>(kFlightHypotheses) * kFlightOptionsPerRound, 0.0);
  for (int id = 0; id < kFlightHypotheses; ++id) {
    std::array<int, kFlightFeatures> w = flight_id_to_weights(id);
    std::array<double, kFlightOptionsPerRound> r;
    for (int a = 0; a < kFlightOptionsPerRound; ++a) r[a] = dot(w, s.holdout[a]);
    double lo = *std::min_element(r.begin(), r.end());
    double hi = *std::max_element(r.begin(), r.end());
    for (int a = 0; a < kFlightOptionsPerRound; ++a)
      task.utility.at(id, a) = hi > lo ? (r[a] - lo) / (hi - lo) : 1.0;
  }

  task.fixed_truth = flight_weights_to_id(s.latent_weights);
  task.validate();
  return task;
}

TaskSpec make_flight_task(uint64_t seed, double choice_noise, double answer_noise) {
  return flight_task_from_scenario(sample_flight_scenario(seed, choice_noise, answer_noise));
}

}  // namespace voi
