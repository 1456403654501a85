#include "doctest.h"

#include "errplan/errors.hpp"
#include "errplan/netmodel.hpp"
#include "errplan/oracle.hpp"
#include "errplan/postdisaster.hpp"
#include "errplan/supernode.hpp"

using namespace errplan;
using nlohmann::json;

namespace {

// Bus 1 has the grid; every other bus hangs off the previous one (chain) or
// off bus 1 (star) and carries 0.3 MW. All lines are damaged.
FeederModel toy_feeder(int n_buses, bool star) {
  const int T = 8;
  json j = {{"name", "toy"},
            {"bases", {{"s_mva", 1.0}, {"v_kv", 4.16}}},
            {"horizon", {{"n_periods", T}, {"dt_hours", 1.0}}},
            {"buses", json::array()},
            {"lines", json::array()},
            {"loads", json::array()},
            {"ders", json::array()}};
  for (int b = 1; b <= n_buses; ++b) j["buses"].push_back({{"id", std::to_string(b)}, {"vmin", 0.9}, {"vmax", 1.1}});
  for (int b = 2; b <= n_buses; ++b) {
    const std::string from = star ? "1" : std::to_string(b - 1);
    j["lines"].push_back({{"id", from + "-" + std::to_string(b)},
                          {"from", from},
                          {"to", std::to_string(b)},
                          {"r", 0.001},
                          {"x", 0.002},
                          {"i2max", 25.0},
                          {"smax", 5.0}});
    j["loads"].push_back({{"bus", std::to_string(b)},
                          {"p_total", std::vector<double>(T, 0.3)},
                          {"p_crit", std::vector<double>(T, 0.1)},
                          {"q_total", std::vector<double>(T, 0.1)},
                          {"q_crit", std::vector<double>(T, 0.0)}});
  }
  return FeederModel::from_json(j);
}

json toy_scenario(const FeederModel& f, const std::vector<int>& repair, const std::vector<int>& travel_off_diag,
                  int crews) {
  const size_t n = f.lines.size();
  json s = {{"damaged", json::array()}, {"repair_time", json::object()}, {"initial_travel", json::object()}};
  json travel = json::array();
  for (size_t a = 0; a < n; ++a) {
    s["damaged"].push_back(f.lines[a].id);
    s["repair_time"][f.lines[a].id] = repair[a];
    s["initial_travel"][f.lines[a].id] = 1;
    json row = json::array();
    for (size_t b = 0; b < n; ++b) row.push_back(a == b ? 0 : travel_off_diag[std::min(a, b)]);
    travel.push_back(row);
  }
  s["travel"] = travel;
  s["n_crews"] = crews;
  s["grid"] = {{"1", {{"p", std::vector<double>(8, 10.0)}, {"q", std::vector<double>(8, 10.0)}}}};
  return s;
}

MerMixDecision no_units() { return MerMixDecision::from_json(json::parse(R"({"items": []})")); }

struct Toy {
  FeederModel feeder;
  DamageScenario scenario;
  SuperNodeGraph graph;
};

Toy make_toy(int n_buses, bool star, const std::vector<int>& repair, const std::vector<int>& travel, int crews) {
  Toy t{toy_feeder(n_buses, star), {}, {}};
  t.scenario = DamageScenario::from_json(toy_scenario(t.feeder, repair, travel, crews), t.feeder);
  t.graph = aggregate(t.feeder, detect_islands(t.feeder, t.scenario), t.scenario);
  return t;
}

RestorationPlan solve(const Toy& t) {
  RestorationConfig cfg;
  cfg.bnb.gap = 1e-6;
  return solve_restoration(build_restoration_model(t.graph, no_units(), t.scenario, t.feeder.horizon), cfg);
}

}  // namespace

TEST_CASE("two lines with two crews are repaired in parallel") {
  const Toy t = make_toy(3, true, {2, 3}, {1, 1}, 2);
  const ScheduleOracleResult r = enumerate_schedules(t.graph, no_units(), t.scenario, t.feeder.horizon);
  CHECK(r.energized == std::vector<int>{3, 4});
  CHECK(r.best_objective == doctest::Approx(0.3 * (2 + 3)).epsilon(1e-4));
}

TEST_CASE("schedule enumeration refuses large instances") {
  const Toy t = make_toy(6, true, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 1}, 1);
  CHECK_THROWS_AS(enumerate_schedules(t.graph, no_units(), t.scenario, t.feeder.horizon), TooLarge);
}

TEST_CASE("enumerated optimum matches branch and bound on small instances") {
  for (int crews : {1, 2}) {
    CAPTURE(crews);
    const Toy t = make_toy(4, false, {2, 1, 2}, {2, 1, 1}, crews);
    const ScheduleOracleResult r = enumerate_schedules(t.graph, no_units(), t.scenario, t.feeder.horizon, 2);
    const RestorationPlan p = solve(t);
    CHECK(p.objective == doctest::Approx(r.best_objective).epsilon(1e-4));
  }
}

TEST_CASE("enumerated optimum is no worse than any single timetable") {
  const Toy t = make_toy(4, true, {2, 1, 2}, {1, 2, 1}, 1);
  const RestorationModel m = build_restoration_model(t.graph, no_units(), t.scenario, t.feeder.horizon);
  const ScheduleOracleResult r = enumerate_schedules(t.graph, no_units(), t.scenario, t.feeder.horizon);
  for (const std::vector<int>& prio : {std::vector<int>{0, 1, 2}, {2, 1, 0}, {1, 0, 2}}) {
    const CrewTimetable tt = list_schedule(m, prio);
    const auto plan = dispatch_for_schedule(m, integer_point(m, tt, {}));
    REQUIRE(plan.has_value());
    CHECK(r.best_objective <= plan->objective + 1e-6);
  }
}

TEST_CASE("exact-equation residuals") {
  const Toy t = make_toy(4, false, {2, 1, 2}, {1, 1, 1}, 1);
  RestorationPlan plan = solve(t);

  SUBCASE("vanish when flows satisfy the equation") {
    for (size_t k = 0; k < plan.flows.size(); ++k)
      for (size_t e = 0; e < plan.flows[k].size(); ++e) {
        auto& f = plan.flows[k][e];
        const double v = plan.dispatch[k][static_cast<size_t>(t.graph.edges[e].from)].v;
        f.l = (f.p * f.p + f.q * f.q) / v;
      }
    const FeasibilityReport rep = check_nonconvex_feasibility(plan, t.graph);
    CHECK_FALSE(rep.flow.empty());
    CHECK(rep.max_residual <= 1e-12);
  }

  SUBCASE("vanish at zero flow") {
    for (auto& row : plan.flows)
      for (auto& f : row) f = EdgeDispatch{};
    const FeasibilityReport rep = check_nonconvex_feasibility(plan, t.graph);
    for (const auto& r : rep.flow) CHECK(r.value == 0.0);
  }

  SUBCASE("match the equation computed from the plan") {
    const FeasibilityReport rep = check_nonconvex_feasibility(plan, t.graph);
    for (const auto& r : rep.flow) {
      size_t e = 0;
      while (plan.edges[e] != r.owner) ++e;
      const auto k = static_cast<size_t>(r.period - 1);
      const auto& f = plan.flows[k][e];
      const double v = plan.dispatch[k][static_cast<size_t>(t.graph.edges[e].from)].v;
      CHECK(r.value == doctest::Approx(std::abs(f.p * f.p + f.q * f.q - f.l * v)));
    }
    CHECK(rep.repaired_objective >= rep.plan_objective - 1e-6);
  }
}

TEST_CASE("residual check rejects a plan for another graph") {
  const Toy t = make_toy(4, false, {2, 1, 2}, {1, 1, 1}, 1);
  const RestorationPlan plan = solve(t);
  const Toy other = make_toy(3, true, {1, 1}, {1, 1}, 1);
  CHECK_THROWS_AS(check_nonconvex_feasibility(plan, other.graph), DimensionError);
}
