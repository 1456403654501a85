#include "doctest.h"

#include "errplan/netmodel.hpp"
#include "errplan/postdisaster.hpp"
#include "errplan/predisaster.hpp"
#include "errplan/supernode.hpp"

#include <algorithm>

using namespace errplan;
using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(ERRPLAN_DATA_DIR) + "/" + name; }

// Grid at bus 1, load at buses 2..4, every line damaged.
FeederModel chain_feeder() {
  json j = {{"name", "chain"},
            {"bases", {{"s_mva", 1.0}, {"v_kv", 4.16}}},
            {"horizon", {{"n_periods", 8}, {"dt_hours", 1.0}}},
            {"buses", json::array()},
            {"lines", json::array()},
            {"loads", json::array()},
            {"ders", json::array()}};
  for (int b = 1; b <= 4; ++b) j["buses"].push_back({{"id", std::to_string(b)}, {"vmin", 0.9}, {"vmax", 1.1}});
  for (int b = 1; b < 4; ++b)
    j["lines"].push_back({{"id", std::to_string(b) + "-" + std::to_string(b + 1)},
                          {"from", std::to_string(b)},
                          {"to", std::to_string(b + 1)},
                          {"r", 0.001},
                          {"x", 0.002},
                          {"i2max", 25.0},
                          {"smax", 5.0}});
  for (int b = 2; b <= 4; ++b)
    j["loads"].push_back({{"bus", std::to_string(b)},
                          {"p_total", std::vector<double>(8, 0.3)},
                          {"p_crit", std::vector<double>(8, 0.1)},
                          {"q_total", std::vector<double>(8, 0.1)},
                          {"q_crit", std::vector<double>(8, 0.0)}});
  return FeederModel::from_json(j);
}

json chain_scenario() {
  return json::parse(R"({
    "damaged": ["1-2", "2-3", "3-4"],
    "repair_time": {"1-2": 2, "2-3": 2, "3-4": 2},
    "travel": [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
    "initial_travel": {"1-2": 1, "2-3": 1, "3-4": 1},
    "n_crews": 1,
    "grid": {"1": {"p": [10, 10, 10, 10, 10, 10, 10, 10], "q": [10, 10, 10, 10, 10, 10, 10, 10]}}
  })");
}

MerMixDecision no_units() { return MerMixDecision::from_json(json::parse(R"({"items": []})")); }

struct Solved {
  SuperNodeGraph graph;
  RestorationPlan plan;
};

Solved solve_chain() {
  const FeederModel f = chain_feeder();
  const DamageScenario s = DamageScenario::from_json(chain_scenario(), f);
  Solved r{aggregate(f, detect_islands(f, s), s), {}};
  const RestorationModel m = build_restoration_model(r.graph, no_units(), s, f.horizon);
  RestorationConfig cfg;
  cfg.bnb.gap = 1e-6;
  r.plan = solve_restoration(m, cfg);
  return r;
}

}  // namespace

TEST_CASE("binary count is lines x periods x (1 + 2 crews)") {
  const FeederModel f13 = load_feeder(data("ieee13.json"));
  const DamageScenario s13 = load_scenario(data("ieee13_scenario.json"), f13);
  const SuperNodeGraph g13 = aggregate(f13, detect_islands(f13, s13), s13);
  const MerMixDecision mix13 = MerMixDecision::from_json(read_json_file(data("ieee13_mix.json")));
  CHECK(build_restoration_model(g13, mix13, s13, f13.horizon).binary_count() == 72);

  const FeederModel f37 = load_feeder(data("ieee37.json"));
  const DamageScenario s37 = load_scenario(data("cs1_scenario.json"), f37);
  const SuperNodeGraph g37 = aggregate(f37, detect_islands(f37, s37), s37);
  CHECK(build_restoration_model(g37, mix13, s37, f37.horizon).binary_count() == 240);
}

TEST_CASE("no damage means no schedule variables") {
  const FeederModel f = chain_feeder();
  const DamageScenario s = DamageScenario::from_json(json::parse(R"({"damaged": [], "travel": []})"), f);
  const SuperNodeGraph g = aggregate(f, detect_islands(f, s), s);
  const RestorationModel m = build_restoration_model(g, no_units(), s, f.horizon);
  CHECK(m.u.empty());
  CHECK(m.binary_count() == 0);
}

TEST_CASE("chain without travel is repaired back to back from the grid side") {
  const Solved r = solve_chain();
  CHECK(r.plan.status == "optimal");
  CHECK(r.plan.energized_period() == std::vector<int>{3, 5, 7});
  // Load 0.3 per bus per hour; lines up at 3, 5, 7 leave 2, 4 and 6 hours dark.
  CHECK(r.plan.objective == doctest::Approx(0.3 * (2 + 4 + 6)).epsilon(1e-4));
}

TEST_CASE("solved plan passes the invariant checks") {
  const Solved r = solve_chain();
  const InvariantReport rep = check_plan_invariants(r.plan, r.graph);
  for (const auto& c : rep.checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.ok);
  }
  CHECK(rep.ok());
}

TEST_CASE("restored and served energy tie out to the objective") {
  const Solved r = solve_chain();
  const EnergySeries es = extract_energy_series(r.plan);
  REQUIRE(es.ter.size() == 8);
  for (size_t t = 0; t < es.ter.size(); ++t) {
    CHECK(es.tes[t] >= -1e-9);
    CHECK(es.tes[t] <= es.ter[t] + 1e-6);
  }
  CHECK(es.unserved() == doctest::Approx(r.plan.objective).epsilon(1e-6));
}

TEST_CASE("plan survives a JSON round trip") {
  const Solved r = solve_chain();
  const json once = r.plan.to_json();
  const RestorationPlan back = RestorationPlan::from_json(once);
  CHECK(back.to_json() == once);
  CHECK(back.energized_period() == r.plan.energized_period());
  CHECK(check_plan_invariants(back, r.graph).ok());
}
