#include <nlohmann/json.hpp>

#include "voi/tasks.hpp"

namespace voi {

using nlohmann::json;

namespace {

json option_to_json(const FlightOption& x) { return json(std::vector<double>(x.begin(), x.end())); }

FlightOption option_from_json(const json& j) {
  FlightOption x;
  if (!j.is_array() || j.size() != kFlightFeatures)
    fail(Errc::parse_failure, "flight option must have 8 features");
  for (int i = 0; i < kFlightFeatures; ++i) x[i] = j[i].get<double>();
  return x;
}

}  // namespace

std::string task_manifest(const TaskSpec& task) {
  json j;
  if (const FlightScenario* s = std::get_if<FlightScenario>(&task.scenario)) {
    j["kind"] = "flight";
    j["seed"] = s->seed;
    j["choice_noise"] = s->choice_noise;
    j["answer_noise"] = s->answer_noise;
    j["latent_weights"] = std::vector<int>(s->latent_weights.begin(), s->latent_weights.end());
    json rounds = json::array();
    for (const FlightRound& r : s->support) {
      json jr;
      jr["options"] = {option_to_json(r.options[0]), option_to_json(r.options[1]),
                       option_to_json(r.options[2])};
      jr["chosen"] = r.chosen;
      rounds.push_back(jr);
    }
    j["support"] = rounds;
    j["holdout"] = {option_to_json(s->holdout[0]), option_to_json(s->holdout[1]),
                    option_to_json(s->holdout[2])};
  } else if (const ShopScenario* s = std::get_if<ShopScenario>(&task.scenario)) {
    j["kind"] = "shop";
    j["seed"] = s->seed;
    j["truth"] = s->truth;
    json catalog = json::array();
    for (const Product& p : s->catalog)
      catalog.push_back({{"id", p.id},
                         {"category", p.category},
                         {"color", p.color},
                         {"size", p.size},
                         {"brand", p.brand},
                         {"price_band", p.price_band}});
    j["catalog"] = catalog;
  } else {
    fail(Errc::bad_config, "task '" + task.name + "' has no generated scenario to serialize");
  }
  return j.dump();
}

TaskSpec task_from_manifest(const std::string& manifest_json) {
  json j;
  try {
    j = json::parse(manifest_json);
  } catch (const json::parse_error& e) {
    fail(Errc::parse_failure, std::string("manifest is not valid JSON: ") + e.what());
  }
  std::string kind = j.value("kind", "");
  if (kind == "flight") {
    FlightScenario s;
    s.seed = j.at("seed").get<uint64_t>();
    s.choice_noise = j.at("choice_noise").get<double>();
    s.answer_noise = j.at("answer_noise").get<double>();
    const json& w = j.at("latent_weights");
    if (w.size() != kFlightFeatures) fail(Errc::parse_failure, "bad latent weight count");
    for (int i = 0; i < kFlightFeatures; ++i) s.latent_weights[i] = w[i].get<int>();
    const json& rounds = j.at("support");
    if (rounds.size() != kFlightSupportRounds) fail(Errc::parse_failure, "bad support round count");
    for (int r = 0; r < kFlightSupportRounds; ++r) {
      const json& jr = rounds[r];
      for (int o = 0; o < kFlightOptionsPerRound; ++o)
        s.support[r].options[o] = option_from_json(jr.at("options")[o]);
      s.support[r].chosen = jr.at("chosen").get<int>();
    }
    for (int o = 0; o < kFlightOptionsPerRound; ++o)
      s.holdout[o] = option_from_json(j.at("holdout")[o]);
    return flight_task_from_scenario(s);
  }
  if (kind == "shop") {
    ShopScenario s;
    s.seed = j.at("seed").get<uint64_t>();
    s.truth = j.at("truth").get<int>();
    for (const json& jp : j.at("catalog")) {
      Product p;
      p.id = jp.at("id").get<int>();
      p.category = jp.at("category").get<std::string>();
      p.color = jp.at("color").get<std::string>();
      p.size = jp.at("size").get<std::string>();
      p.brand = jp.at("brand").get<std::string>();
      p.price_band = jp.at("price_band").get<std::string>();
      s.catalog.push_back(std::move(p));
    }
    return shop_task_from_scenario(s);
  }
  fail(Errc::parse_failure, "unknown manifest kind: '" + kind + "'");
}

}  // namespace voi
