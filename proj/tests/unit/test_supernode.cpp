#include "doctest.h"

#include "errplan/errors.hpp"
#include "errplan/netmodel.hpp"
#include "errplan/supernode.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace errplan;
using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(ERRPLAN_DATA_DIR) + "/" + name; }

json chain_feeder(int n) {
  json j = {{"name", "chain"},
            {"bases", {{"s_mva", 1.0}, {"v_kv", 4.16}}},
            {"horizon", {{"n_periods", 2}, {"dt_hours", 1.0}}},
            {"buses", json::array()},
            {"lines", json::array()},
            {"loads", json::array()},
            {"ders", json::array()}};
  for (int b = 1; b <= n; ++b) j["buses"].push_back({{"id", std::to_string(b)}, {"vmin", 0.95}, {"vmax", 1.05}});
  for (int b = 1; b < n; ++b)
    j["lines"].push_back({{"id", std::to_string(b) + "-" + std::to_string(b + 1)},
                          {"from", std::to_string(b)},
                          {"to", std::to_string(b + 1)},
                          {"r", 0.01 * b},
                          {"x", 0.02},
                          {"i2max", 4.0},
                          {"smax", 2.0}});
  return j;
}

json no_damage() { return json::parse(R"({"damaged": [], "travel": []})"); }

}  // namespace

TEST_CASE("case-study damage splits the feeders into the expected islands") {
  const FeederModel f13 = load_feeder(data("ieee13.json"));
  CHECK(detect_islands(f13, load_scenario(data("ieee13_scenario.json"), f13)).size() == 4);
  const FeederModel f37 = load_feeder(data("ieee37.json"));
  CHECK(detect_islands(f37, load_scenario(data("cs1_scenario.json"), f37)).size() == 7);
  const FeederModel f123 = load_feeder(data("ieee123.json"));
  CHECK(detect_islands(f123, load_scenario(data("cs2_scenario.json"), f123)).size() == 9);
}

TEST_CASE("13-node island around the substation") {
  const FeederModel f = load_feeder(data("ieee13.json"));
  const IslandSet is = detect_islands(f, load_scenario(data("ieee13_scenario.json"), f));
  const std::vector<std::string> want{"632", "633", "634", "650"};
  bool found = false;
  for (auto members : is.islands) {
    std::sort(members.begin(), members.end());
    if (members == want) found = true;
  }
  CHECK(found);
}

TEST_CASE("islands partition the buses") {
  const FeederModel f = load_feeder(data("ieee37.json"));
  const IslandSet is = detect_islands(f, load_scenario(data("cs1_scenario.json"), f));
  std::set<std::string> seen;
  size_t total = 0;
  for (size_t k = 0; k < is.islands.size(); ++k) {
    for (const auto& b : is.islands[k]) {
      seen.insert(b);
      CHECK(is.island_of[static_cast<size_t>(f.bus_index(b))] == static_cast<int>(k));
    }
    total += is.islands[k].size();
  }
  CHECK(total == f.buses.size());
  CHECK(seen.size() == f.buses.size());
}

TEST_CASE("no damage leaves one island") {
  const FeederModel f = load_feeder(data("ieee13.json"));
  const DamageScenario s = DamageScenario::from_json(no_damage(), f);
  const IslandSet is = detect_islands(f, s);
  CHECK(is.size() == 1);
  const SuperNodeGraph g = aggregate(f, is, s);
  CHECK(g.nodes.size() == 1);
  CHECK(g.edges.empty());
}

TEST_CASE("aggregation keeps load and DER capacity") {
  const FeederModel f = load_feeder(data("ieee13.json"));
  const DamageScenario s = load_scenario(data("ieee13_scenario.json"), f);
  const SuperNodeGraph g = aggregate(f, detect_islands(f, s), s);
  CHECK(g.nodes.size() == 4);
  CHECK(g.edges.size() + g.repair_only.size() == s.damaged.size());
  for (int t = 0; t < f.horizon.n_periods; ++t) CHECK(g.total_p(t) == doctest::Approx(f.total_p(t)));
  size_t ders = 0;
  for (const auto& n : g.nodes) ders += n.ders.size();
  CHECK(ders == f.ders.size());
  for (const auto& e : g.edges) CHECK(e.from != e.to);
}

TEST_CASE("graph survives a JSON round trip") {
  const FeederModel f = load_feeder(data("ieee37.json"));
  const DamageScenario s = load_scenario(data("cs1_scenario.json"), f);
  const SuperNodeGraph g = aggregate(f, detect_islands(f, s), s);
  const json once = g.to_json();
  CHECK(SuperNodeGraph::from_json(once).to_json() == once);
  // The scenario can be read back against the graph alone.
  const DamageScenario again = DamageScenario::from_json(s.to_json(f), graph_skeleton(g));
  CHECK(again.damaged == s.damaged);
  CHECK(again.repair_time == s.repair_time);
}

TEST_CASE("two buses joined by a damaged line give two nodes and one edge") {
  const FeederModel f = FeederModel::from_json(chain_feeder(2));
  const DamageScenario s = DamageScenario::from_json(
      json::parse(R"({"damaged": ["1-2"], "repair_time": {"1-2": 1}, "travel": [[0]]})"), f);
  const SuperNodeGraph g = aggregate(f, detect_islands(f, s), s);
  CHECK(g.nodes.size() == 2);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].line_id == "1-2");
}

TEST_CASE("single-bus island has no internal drop") {
  json j = chain_feeder(2);
  j["loads"].push_back({{"bus", "2"}, {"p_total", {1, 1}}, {"p_crit", {0.5, 0.5}}, {"q_total", {0.2, 0.2}},
                        {"q_crit", {0.1, 0.1}}});
  const FeederModel f = FeederModel::from_json(j);
  const DamageScenario s = DamageScenario::from_json(
      json::parse(R"({"damaged": ["1-2"], "repair_time": {"1-2": 1}, "travel": [[0]]})"), f);
  const ReductionReport rep = justify_reduction(f, detect_islands(f, s));
  for (const auto& d : rep.islands) {
    CHECK(d.dv_squared == 0.0);
    CHECK_FALSE(d.exceeds);
  }
}

TEST_CASE("three-bus chain drop matches the linear branch-flow formula") {
  json j = chain_feeder(3);
  j["loads"].push_back({{"bus", "3"}, {"p_total", {0.5, 0.8}}, {"p_crit", {0.2, 0.2}}, {"q_total", {0.1, 0.3}},
                        {"q_crit", {0.0, 0.0}}});
  const FeederModel f = FeederModel::from_json(j);
  const DamageScenario s = DamageScenario::from_json(no_damage(), f);
  const ReductionReport rep = justify_reduction(f, detect_islands(f, s), 0.05);
  REQUIRE(rep.islands.size() == 1);
  // Peak period: P = 0.8, Q = 0.3 through both lines.
  const double P = 0.8, Q = 0.3;
  double dv2 = 0.0;
  for (const auto& l : f.lines) dv2 += 2.0 * (l.r * P + l.x * Q);
  const IslandDrop& d = rep.islands[0];
  CHECK(d.dv_squared == doctest::Approx(dv2));
  CHECK(d.dv_pu == doctest::Approx(1.0 - std::sqrt(1.0 - dv2)));
  CHECK(d.path.size() == 3);
  CHECK(d.exceeds == (d.dv_pu > 0.05));
}
