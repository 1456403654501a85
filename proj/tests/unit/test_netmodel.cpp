#include "doctest.h"

#include "errplan/errors.hpp"
#include "errplan/netmodel.hpp"

#include <set>

using namespace errplan;
using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(ERRPLAN_DATA_DIR) + "/" + name; }

json two_bus_feeder() {
  return json::parse(R"({
    "name": "toy", "bases": {"s_mva": 10.0, "v_kv": 4.16},
    "horizon": {"n_periods": 2, "dt_hours": 1.0},
    "buses": [{"id": "1", "vmin": 0.95, "vmax": 1.05}, {"id": "2", "vmin": 0.95, "vmax": 1.05}],
    "lines": [{"id": "1-2", "from": "1", "to": "2", "r": 0.01, "x": 0.02, "i2max": 4.0, "smax": 2.0}],
    "loads": [{"bus": "2", "p_total": [5, 6], "p_crit": [2, 3], "q_total": [1, 1], "q_crit": [0.5, 0.5]}],
    "ders": []
  })");
}

}  // namespace

TEST_CASE("13-node fixture loads with 13 buses") {
  const FeederModel f = load_feeder(data("ieee13.json"));
  CHECK(f.buses.size() == 13);
  CHECK(f.horizon.n_periods == 8);
}

TEST_CASE("power is stored per unit of the feeder base") {
  const FeederModel f = FeederModel::from_json(two_bus_feeder());
  REQUIRE(f.loads.size() == 1);
  CHECK(f.loads[0].p_total[1] == doctest::Approx(0.6));
  CHECK(f.loads[0].q_critical[0] == doctest::Approx(0.05));
}

TEST_CASE("self-loop line is rejected") {
  json j = two_bus_feeder();
  j["lines"][0]["to"] = "1";
  CHECK_THROWS_AS(FeederModel::from_json(j), ValidationError);
}

TEST_CASE("critical load above total load is rejected with the bus named") {
  json j = two_bus_feeder();
  j["loads"][0]["p_crit"] = json::array({7, 3});
  try {
    FeederModel::from_json(j);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bus 2") != std::string::npos);
  }
}

TEST_CASE("123-node feeder round-trips to the same serialized form") {
  const FeederModel f = load_feeder(data("ieee123.json"));
  CHECK(f.buses.size() == 123);
  const json once = f.to_json();
  const json twice = FeederModel::from_json(once).to_json();
  CHECK(once == twice);
}

TEST_CASE("case-study scenarios carry their repair times") {
  const FeederModel f37 = load_feeder(data("ieee37.json"));
  const DamageScenario s1 = load_scenario(data("cs1_scenario.json"), f37);
  CHECK(s1.damaged.size() == 6);
  CHECK(s1.n_crews == 2);
  // hours (3,4,6,3,5,6) over 4 h periods, rounded up
  CHECK(s1.repair_time == std::vector<int>{1, 1, 2, 1, 2, 2});

  const FeederModel f123 = load_feeder(data("ieee123.json"));
  const DamageScenario s2 = load_scenario(data("cs2_scenario.json"), f123);
  CHECK(s2.damaged.size() == 8);
  CHECK(s2.repair_time == std::vector<int>{1, 1, 2, 1, 2, 1, 2, 2});
  CHECK(s2.travel_seed.has_value());
}

TEST_CASE("empty damage set is a valid scenario") {
  const FeederModel f = FeederModel::from_json(two_bus_feeder());
  const DamageScenario s = DamageScenario::from_json(json::parse(R"({"damaged": [], "travel": []})"), f);
  CHECK(s.damaged.empty());
  CHECK(s.travel.empty());
}

TEST_CASE("unknown damaged line is rejected") {
  const FeederModel f = FeederModel::from_json(two_bus_feeder());
  const json j = json::parse(R"({"damaged": ["9-9"], "repair_time": {"9-9": 1}, "travel": [[0]]})");
  CHECK_THROWS_AS(DamageScenario::from_json(j, f), UnknownLine);
}

TEST_CASE("travel matrix of the wrong size is rejected") {
  const FeederModel f = FeederModel::from_json(two_bus_feeder());
  const json j = json::parse(R"({"damaged": ["1-2"], "repair_time": {"1-2": 1}, "travel": [[0, 1], [1, 0]]})");
  CHECK_THROWS_AS(DamageScenario::from_json(j, f), DimensionError);
}

TEST_CASE("travel matrices are a pure function of their arguments") {
  CHECK(gen_travel_matrix(6, 42, 5) == gen_travel_matrix(6, 42, 5));
  CHECK(gen_travel_matrix(1, 99, 3) == std::vector<std::vector<int>>{{0}});

  const auto m = gen_travel_matrix(8, 7, 5);
  REQUIRE(m.size() == 8);
  std::set<int> seen;
  for (size_t a = 0; a < 8; ++a) {
    CHECK(m[a][a] == 0);
    for (size_t b = 0; b < 8; ++b) {
      CHECK(m[a][b] == m[b][a]);
      if (a != b) {
        CHECK(m[a][b] >= 1);
        CHECK(m[a][b] <= 5);
        seen.insert(m[a][b]);
      }
    }
  }
  CHECK(seen.size() > 1);
}

TEST_CASE("half-sine profile averages daylight and is zero at night") {
  const auto p = half_sine_profile(8, 4.0);
  REQUIRE(p.size() == 8);
  CHECK(p[0] == doctest::Approx(p[1]));
  CHECK(p[3] == 0.0);
  CHECK(p[4] == 0.0);
  for (double v : p) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("bus ids order numerically when both are numbers") {
  CHECK(bus_id_less("9", "10"));
  CHECK_FALSE(bus_id_less("10", "9"));
  CHECK(bus_id_less("a", "b"));
}
