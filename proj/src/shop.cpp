#include <algorithm>
#include <set>

#include "voi/rng.hpp"
#include "voi/tasks.hpp"

namespace voi {

namespace {

const std::vector<std::string> kCategories = {"t-shirt", "jacket",   "sneakers",
                                              "backpack", "headphones", "watch"};
const std::vector<std::string> kColors = {"red",  "blue",  "black", "white",
                                          "green", "grey", "yellow", "brown"};
const std::vector<std::string> kSizes = {"small", "medium", "large", "x-large"};
const std::vector<std::string> kBrands = {"northpeak", "urbanline", "velocity",
                                          "cascade",   "summit",    "horizon"};
const std::vector<std::string> kPriceBands = {"budget", "mid-range", "premium"};

int attribute_matches(const Product& a, const Product& b) {
  return (a.color == b.color) + (a.size == b.size) + (a.brand == b.brand) +
         (a.price_band == b.price_band);
}

}  // namespace

ShopScenario sample_shop_scenario(uint64_t seed, int catalog_size) {
  if (catalog_size < 2) fail(Errc::bad_config, "catalog size must be at least 2");

  ShopScenario s;
  s.seed = seed;
  std::mt19937_64 rng = make_rng(mix64(seed, 0x5409b04eULL));

  // Distinct attribute tuples so that only the exact product scores 1.0.
  std::set<std::array<int, 5>> used;
  std::uniform_int_distribution<int> cat(0, static_cast<int>(kCategories.size()) - 1);
  std::uniform_int_distribution<int> col(0, static_cast<int>(kColors.size()) - 1);
  std::uniform_int_distribution<int> siz(0, static_cast<int>(kSizes.size()) - 1);
  std::uniform_int_distribution<int> brd(0, static_cast<int>(kBrands.size()) - 1);
  std::uniform_int_distribution<int> prc(0, static_cast<int>(kPriceBands.size()) - 1);

  while (static_cast<int>(s.catalog.size()) < catalog_size) {
    std::array<int, 5> key = {cat(rng), col(rng), siz(rng), brd(rng), prc(rng)};
    if (!used.insert(key).second) continue;
    Product p;
    p.id = static_cast<int>(s.catalog.size());
    p.category = kCategories[key[0]];
    p.color = kColors[key[1]];
    p.size = kSizes[key[2]];
    p.brand = kBrands[key[3]];
    p.price_band = kPriceBands[key[4]];
    s.catalog.push_back(std::move(p));
  }

  // Ground truth must come from a category with at least two members, so the
  // revealed category leaves genuine ambiguity.
  std::vector<int> eligible;
  for (const Product& p : s.catalog) {
    int same = 0;
    for (const Product& q : s.catalog) same += q.category == p.category;
    if (same >= 2) eligible.push_back(p.id);
  }
  if (eligible.empty())
    fail(Errc::empty_category, "no category has two or more products");
  std::uniform_int_distribution<int> pick(0, static_cast<int>(eligible.size()) - 1);
  s.truth = eligible[pick(rng)];
  return s;
}

TaskSpec shop_task_from_scenario(const ShopScenario& s) {
  TaskSpec task;
  task.name = "shop";
  task.kind = TaskKind::shop;
  task.scenario = s;
  task.k_max_default = 4;

  const Product& target = s.catalog[s.truth];
  task.initial_query = "buy a " + target.category;

  // Hypotheses: the products in the revealed category, in catalog order.
  std::vector<const Product*> members;
  for (const Product& p : s.catalog)
    if (p.category == target.category) members.push_back(&p);
  if (members.size() < 2)
    fail(Errc::empty_category, "revealed category has fewer than two products");

  int truth_index = -1;
  for (size_t i = 0; i < members.size(); ++i) {
    std::string label = members[i]->color + " " + members[i]->size + " " +
                        members[i]->brand + " " + members[i]->price_band + " " +
                        members[i]->category;
    task.hypotheses.push_back({static_cast<int>(i), label});
    task.actions.push_back("buy " + label);
    if (members[i]->id == s.truth) truth_index = static_cast<int>(i);
  }
  task.fixed_truth = truth_index;

  const int n = static_cast<int>(members.size());
  // Utility: fraction of the four hidden attributes the purchase shares with
  // the target; 1.0 only for the exact product (tuples are distinct).
  task.utility.num_hypotheses = n;
  task.utility.num_actions = n;
  task.utility.values.assign(static_cast<size_t>(n) * n, 0.0);
  for (int theta = 0; theta < n; ++theta)
    for (int a = 0; a < n; ++a)
      task.utility.at(theta, a) = attribute_matches(*members[theta], *members[a]) / 4.0;

  // One multiple-choice question per hidden attribute; truthful answers.
  struct Attr {
    const char* name;
    const std::vector<std::string>* vocab;
    std::string Product::*field;
  };
  const Attr attrs[4] = {{"color", &kColors, &Product::color},
                         {"size", &kSizes, &Product::size},
                         {"brand", &kBrands, &Product::brand},
                         {"price range", &kPriceBands, &Product::price_band}};

  task.likelihood = AnswerLikelihood(4, n);
  for (int qi = 0; qi < 4; ++qi) {
    Question q;
    q.id = qi;
    q.text = std::string("Which ") + attrs[qi].name + " do you want?";
    q.answer_labels = *attrs[qi].vocab;
    task.questions.push_back(std::move(q));
    for (int theta = 0; theta < n; ++theta) {
      const std::string& value = (*members[theta]).*(attrs[qi].field);
      std::vector<double> row(attrs[qi].vocab->size(), 0.0);
      auto it = std::find(attrs[qi].vocab->begin(), attrs[qi].vocab->end(), value);
      row[static_cast<size_t>(it - attrs[qi].vocab->begin())] = 1.0;
      task.likelihood.set_row(qi, theta, std::move(row));
    }
  }

  task.prior = normalize(std::vector<double>(n, 1.0));
  task.validate();
  return task;
}

TaskSpec make_shop_task(uint64_t seed, int catalog_size) {
  return shop_task_from_scenario(sample_shop_scenario(seed, catalog_size));
}

}  // namespace voi
