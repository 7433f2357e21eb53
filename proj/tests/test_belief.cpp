#include <doctest.h>

#include <random>

#include "support.hpp"
#include "voi/belief.hpp"

using namespace voi;
using testsupport::single_question_likelihood;
using testsupport::to_belief;

TEST_SUITE("belief") {

TEST_CASE("normalize splits equal weights evenly") {
  BeliefState b = normalize({2.0, 2.0});
  CHECK(b.probs[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.probs[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.turn == 0);
}

TEST_CASE("normalize keeps a one-hot vector") {
  BeliefState b = normalize({1.0, 0.0, 0.0});
  CHECK(b.probs == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("normalize divides by the sum") {
  // hand-checked: 0.54/0.62 = 27/31, 0.08/0.62 = 4/31
  BeliefState b = normalize({0.54, 0.08});
  CHECK(b.probs[0] == doctest::Approx(27.0 / 31.0).epsilon(1e-12));
  CHECK(b.probs[1] == doctest::Approx(4.0 / 31.0).epsilon(1e-12));
}

TEST_CASE("normalize rejects bad input") {
  CHECK_THROWS_AS_MESSAGE(normalize({0.0, 0.0}), Error, doctest::Contains("AllZero"));
  CHECK_THROWS_AS_MESSAGE(normalize({1.0, -0.1}), Error, doctest::Contains("NegativeWeight"));
  CHECK_THROWS_AS_MESSAGE(normalize({1.0, std::nan("")}), Error,
                          doctest::Contains("NonFinite"));
  CHECK_THROWS_AS(normalize({}), Error);
}

TEST_CASE("bayes_update matches a hand enumeration") {
  // prior (0.6, 0.4); p(y1|q,th1)=0.9, p(y1|q,th2)=0.2
  // posterior for y1: (0.54, 0.08)/0.62 = (27/31, 4/31)
  AnswerLikelihood L = single_question_likelihood({{0.9, 0.1}, {0.2, 0.8}});
  BeliefState b = to_belief({0.6, 0.4});

  BeliefState post = bayes_update(b, 0, 0, L);
  CHECK(post.probs[0] == doctest::Approx(27.0 / 31.0).epsilon(1e-12));
  CHECK(post.probs[1] == doctest::Approx(4.0 / 31.0).epsilon(1e-12));
  CHECK(post.turn == 1);
}

TEST_CASE("point mass is absorbing under any consistent update") {
  AnswerLikelihood L = single_question_likelihood({{0.9, 0.1}, {0.2, 0.8}});
  BeliefState b = to_belief({1.0, 0.0});
  for (int y : {0, 1}) {
    BeliefState post = bayes_update(b, 0, y, L);
    CHECK(post.probs[0] == 1.0);
    CHECK(post.probs[1] == 0.0);
  }
}

TEST_CASE("uninformative question leaves the belief unchanged") {
  AnswerLikelihood L = single_question_likelihood({{0.5, 0.5}, {0.5, 0.5}});
  BeliefState b = to_belief({0.3, 0.7});
  BeliefState post = bayes_update(b, 0, 0, L);
  CHECK(post.probs[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(post.probs[1] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("impossible answers raise ZeroEvidence") {
  AnswerLikelihood L = single_question_likelihood({{1.0, 0.0}, {1.0, 0.0}});
  BeliefState b = to_belief({0.5, 0.5});
  CHECK_THROWS_AS_MESSAGE(bayes_update(b, 0, 1, L), Error, doctest::Contains("ZeroEvidence"));
}

TEST_CASE("bayes_update is invariant to rescaling the prior weights") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto inst = testsupport::random_instance(rng);
    AnswerLikelihood L = single_question_likelihood(inst.rows);
    BeliefState b = to_belief(inst.belief);

    std::vector<double> scaled = inst.belief;
    for (double& w : scaled) w *= 37.5;
    BeliefState b2 = normalize(scaled);

    for (int y = 0; y < static_cast<int>(inst.rows[0].size()); ++y) {
      BeliefState p1 = bayes_update(b, 0, y, L);
      BeliefState p2 = bayes_update(b2, 0, y, L);
      for (int t = 0; t < p1.size(); ++t)
        CHECK(p1.probs[t] == doctest::Approx(p2.probs[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("answer_marginal is the belief-weighted row average") {
  AnswerLikelihood L = single_question_likelihood({{0.9, 0.1}, {0.2, 0.8}});
  AnswerDistribution m = answer_marginal(to_belief({0.6, 0.4}), 0, L);
  CHECK(m.probs[0] == doctest::Approx(0.62).epsilon(1e-12));  // 0.6*0.9 + 0.4*0.2

  // perfectly separating question at a symmetric belief
  AnswerLikelihood sep = single_question_likelihood({{1.0, 0.0}, {0.0, 1.0}});
  AnswerDistribution ms = answer_marginal(to_belief({0.5, 0.5}), 0, sep);
  CHECK(ms.probs[0] == doctest::Approx(0.5));
  CHECK(ms.probs[1] == doctest::Approx(0.5));

  // a point mass reproduces that hypothesis' row
  AnswerDistribution mp = answer_marginal(to_belief({1.0, 0.0}), 0, L);
  CHECK(mp.probs[0] == doctest::Approx(0.9));
  CHECK(mp.probs[1] == doctest::Approx(0.1));
}

TEST_CASE("answer marginals always sum to one") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto inst = testsupport::random_instance(rng);
    AnswerLikelihood L = single_question_likelihood(inst.rows);
    AnswerDistribution m = answer_marginal(to_belief(inst.belief), 0, L);
    double sum = 0.0;
    for (double p : m.probs) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mixture of posteriors reproduces the prior") {
  // Chapman-Kolmogorov consistency: sum_y p(y|q,b) * b_y = b
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    auto inst = testsupport::random_instance(rng);
    AnswerLikelihood L = single_question_likelihood(inst.rows);
    BeliefState b = to_belief(inst.belief);
    AnswerDistribution m = answer_marginal(b, 0, L);

    std::vector<double> mixture(b.size(), 0.0);
    for (int y = 0; y < m.size(); ++y) {
      if (m[y] <= 0.0) continue;
      BeliefState post = bayes_update(b, 0, y, L);
      for (int t = 0; t < b.size(); ++t) mixture[t] += m[y] * post.probs[t];
    }
    for (int t = 0; t < b.size(); ++t)
      CHECK(mixture[t] == doctest::Approx(b.probs[t]).epsilon(1e-9));
  }
}

TEST_CASE("max_belief picks the maximum and breaks ties low") {
  CHECK(max_belief(to_belief({0.2, 0.5, 0.3})) == std::pair<int, double>{1, 0.5});
  CHECK(max_belief(to_belief({0.5, 0.5})).first == 0);
  auto [id, p] = max_belief(to_belief({27.0 / 31.0, 4.0 / 31.0}));
  CHECK(id == 0);
  CHECK(p == doctest::Approx(0.87097).epsilon(1e-4));

  // repeated calls return identical ids
  BeliefState b = to_belief({0.25, 0.25, 0.25, 0.25});
  for (int i = 0; i < 5; ++i) CHECK(max_belief(b).first == 0);
}

TEST_CASE("likelihood rows must be stored for lookups") {
  AnswerLikelihood L(2, 3);
  L.set_row(0, 0, {0.5, 0.5});
  CHECK(L.has_row(0, 0));
  CHECK(!L.has_row(0, 1));
  CHECK(!L.has_question(1));
  CHECK_THROWS_AS_MESSAGE(L.row(0, 1), Error, doctest::Contains("MissingLikelihoodRow"));
  CHECK_THROWS_AS_MESSAGE(L.row(1, 0), Error, doctest::Contains("MissingLikelihoodRow"));
  CHECK_THROWS_AS(L.set_row(0, 1, {0.7, 0.7}), Error);  // not a distribution
}

}  // TEST_SUITE
