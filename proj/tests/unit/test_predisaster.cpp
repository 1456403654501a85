#include "doctest.h"

#include "errplan/netmodel.hpp"
#include "errplan/oracle.hpp"
#include "errplan/predisaster.hpp"

#include <numeric>

using namespace errplan;
using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(ERRPLAN_DATA_DIR) + "/" + name; }

ShortageForecast flat_forecast(double mw) {
  return ShortageForecast::from_json({{"horizon", {{"n_periods", 4}, {"dt_hours", 1.0}}},
                                      {"p_total", {mw, mw, mw, mw}},
                                      {"critical_fraction", 1.0},
                                      {"q_ratio", 0.3},
                                      {"ders", json::array()}});
}

int units(const MerMixDecision& m) { return std::accumulate(m.counts.begin(), m.counts.end(), 0); }

}  // namespace

TEST_CASE("flat 1 MW shortage is covered by one small generator") {
  const auto catalog = load_catalog(data("catalog.json"));
  const ShortageForecast fc = flat_forecast(1.0);
  const SizingSolution sol = solve_sizing(build_sizing_model(fc, catalog, fc.horizon));
  CHECK(sol.mix.total_cost == doctest::Approx(1000.0));
  CHECK(units(sol.mix) == 1);
  CHECK(sol.mix.count(MerKind::MDG, 1) == 1);

  const MixOracleResult brute = enumerate_mixes(fc, catalog, fc.horizon);
  REQUIRE(brute.found);
  CHECK(brute.best_cost == doctest::Approx(1000.0));
}

TEST_CASE("no shortage needs no mobile units") {
  const auto catalog = load_catalog(data("catalog.json"));
  const ShortageForecast fc = flat_forecast(0.0);
  const SizingSolution sol = solve_sizing(build_sizing_model(fc, catalog, fc.horizon));
  CHECK(units(sol.mix) == 0);
  CHECK(sol.mix.total_cost == 0.0);
}

TEST_CASE("case-study sizing cost matches mix enumeration") {
  const auto catalog = load_catalog(data("catalog.json"));
  for (const char* name : {"cs1_forecast.json", "cs2_forecast.json"}) {
    CAPTURE(name);
    const ShortageForecast fc = load_forecast(data(name));
    const SizingModel model = build_sizing_model(fc, catalog, fc.horizon);
    const SizingSolution sol = solve_sizing(model);
    const MixOracleResult brute = enumerate_mixes(fc, catalog, fc.horizon);
    REQUIRE(brute.found);
    CHECK(sol.mix.total_cost == doctest::Approx(brute.best_cost));
    CHECK(sizing_residual(model, sol) <= 1e-6);
  }
}

TEST_CASE("sizing dispatch serves at least the critical load and balances") {
  const auto catalog = load_catalog(data("catalog.json"));
  const ShortageForecast fc = load_forecast(data("cs1_forecast.json"));
  const SizingModel model = build_sizing_model(fc, catalog, fc.horizon);
  const SizingSolution sol = solve_sizing(model);
  REQUIRE(sol.dispatch.size() == static_cast<size_t>(fc.horizon.n_periods));
  double mess_energy = 0.0;
  double mess_cap = 0.0;
  for (size_t j = 0; j < catalog.size(); ++j)
    if (catalog[j].kind == MerKind::MESS) mess_cap += sol.mix.counts[j] * catalog[j].e_size;
  for (size_t t = 0; t < sol.dispatch.size(); ++t) {
    const SizingPeriod& d = sol.dispatch[t];
    CHECK(d.p_load >= fc.p_critical[t] - 1e-6);
    CHECK(d.p_load <= fc.p_total[t] + 1e-6);
    CHECK(std::accumulate(d.p.begin(), d.p.end(), 0.0) == doctest::Approx(d.p_load).epsilon(1e-6));
    CHECK(std::accumulate(d.q.begin(), d.q.end(), 0.0) == doctest::Approx(d.q_load).epsilon(1e-6));
    mess_energy += d.p[static_cast<size_t>(ResourceClass::MES)] * fc.horizon.dt;
    CHECK(mess_energy <= mess_cap + 1e-6);
  }
}

TEST_CASE("a fixed mix too small for the shortage has no dispatch") {
  const auto catalog = load_catalog(data("catalog.json"));
  const ShortageForecast fc = flat_forecast(1.0);
  const SizingModel model = build_sizing_model(fc, catalog, fc.horizon);
  CHECK_FALSE(dispatch_for_mix(model, std::vector<int>(catalog.size(), 0)).has_value());
  std::vector<int> one(catalog.size(), 0);
  one[0] = 1;
  CHECK(dispatch_for_mix(model, one).has_value());
}

TEST_CASE("sizing cost does not fall when the shortage grows") {
  const auto catalog = load_catalog(data("catalog.json"));
  double last = -1.0;
  for (double mw : {0.5, 1.0, 1.8, 2.6}) {
    const ShortageForecast fc = flat_forecast(mw);
    const double cost = solve_sizing(build_sizing_model(fc, catalog, fc.horizon)).mix.total_cost;
    CHECK(cost >= last);
    last = cost;
  }
}

TEST_CASE("mix survives a JSON round trip") {
  const auto catalog = load_catalog(data("catalog.json"));
  const ShortageForecast fc = load_forecast(data("cs2_forecast.json"));
  const SizingSolution sol = solve_sizing(build_sizing_model(fc, catalog, fc.horizon));
  const MerMixDecision back = MerMixDecision::from_json(sol.mix.to_json());
  CHECK(back.counts == sol.mix.counts);
  CHECK(back.total_cost == doctest::Approx(sol.mix.total_cost));
}
