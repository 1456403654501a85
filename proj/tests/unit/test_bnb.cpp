#include "doctest.h"

#include "errplan/bnb.hpp"

#include <random>

using namespace errplan;

namespace {

ConicProgram knapsack(const std::vector<double>& val, const std::vector<double>& wt, double cap) {
  ConicProgram p;
  AffineExpr row;
  for (size_t i = 0; i < val.size(); ++i) {
    const int v = p.add_variable("x" + std::to_string(i), 0, 1, Integrality::binary);
    p.set_objective(v, -val[i]);
    row.add(v, wt[i]);
  }
  p.add_linear(row, Sense::le, cap);
  return p;
}

double brute_force(const std::vector<double>& val, const std::vector<double>& wt, double cap) {
  const size_t n = val.size();
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double v = 0, w = 0;
    for (size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        v += val[i];
        w += wt[i];
      }
    if (w <= cap) best = std::max(best, v);
  }
  return -best;
}

}  // namespace

TEST_CASE("knapsack instances match exhaustive enumeration") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<double> val(5), wt(5);
    for (int i = 0; i < 5; ++i) {
      val[i] = std::round(u(rng));
      wt[i] = std::round(u(rng));
    }
    const double cap = 12.0;
    BnBConfig cfg;
    cfg.gap = 1e-6;
    const MipSolution s = solve_michp(knapsack(val, wt, cap), cfg);
    REQUIRE(s.status == MipStatus::optimal);
    CHECK(s.objective == doctest::Approx(brute_force(val, wt, cap)).epsilon(1e-6));
  }
}

TEST_CASE("integral root relaxation stops after one node") {
  ConicProgram p;
  const int x = p.add_variable("x", 0, 10, Integrality::integer);
  p.set_objective(x, 1.0);
  p.add_linear(AffineExpr({{x, 1.0}}), Sense::ge, 2.0);
  const MipSolution s = solve_michp(p);
  REQUIRE(s.status == MipStatus::optimal);
  CHECK(s.node_count == 1);
  CHECK(s.x(x) == doctest::Approx(2.0));
}

TEST_CASE("integer program with a cone") {
  // min -x - y s.t. x^2 + y^2 <= 10.5, x, y integer -> best is 3 + 1 = 4 (or 1 + 3)
  ConicProgram p;
  const int x = p.add_variable("x", -5, 5, Integrality::integer);
  const int y = p.add_variable("y", -5, 5, Integrality::integer);
  p.set_objective(x, -1.0);
  p.set_objective(y, -1.0);
  p.add_soc({AffineExpr({{x, 1.0}}), AffineExpr({{y, 1.0}})}, AffineExpr({}, std::sqrt(10.5)));
  BnBConfig cfg;
  cfg.gap = 1e-6;
  const MipSolution s = solve_michp(p, cfg);
  REQUIRE(s.status == MipStatus::optimal);
  CHECK(s.objective == doctest::Approx(-4.0).epsilon(1e-7));
  CHECK(p.max_violation(s.x) <= 1e-6);
}

TEST_CASE("infeasible integer program") {
  ConicProgram p;
  const int x = p.add_variable("x", 0, 10, Integrality::integer);
  p.add_linear(AffineExpr({{x, 2.0}}), Sense::eq, 3.0);
  CHECK(solve_michp(p).status == MipStatus::infeasible);
}

TEST_CASE("gap formula and determinism") {
  CHECK(relative_gap(10.0, 9.0) == doctest::Approx(0.1));
  CHECK(relative_gap(0.5, 0.0) == doctest::Approx(0.5));
  const std::vector<double> val{4, 7, 3, 9, 5, 6, 2, 8}, wt{3, 5, 2, 6, 4, 5, 1, 7};
  BnBConfig cfg;
  cfg.gap = 1e-6;
  const MipSolution a = solve_michp(knapsack(val, wt, 15), cfg);
  const MipSolution b = solve_michp(knapsack(val, wt, 15), cfg);
  CHECK(a.objective == b.objective);
  CHECK(a.node_count == b.node_count);
  CHECK(a.gap == doctest::Approx(relative_gap(a.objective, a.bound)));
  cfg.threads = 2;
  const MipSolution c = solve_michp(knapsack(val, wt, 15), cfg);
  CHECK(c.objective == doctest::Approx(a.objective).epsilon(1e-9));
}

TEST_CASE("node limit returns the incumbent with its gap") {
  const std::vector<double> val{4, 7, 3, 9, 5, 6, 2, 8, 3, 5}, wt{3, 5, 2, 6, 4, 5, 1, 7, 2, 4};
  BnBConfig cfg;
  cfg.gap = 1e-9;
  cfg.node_limit = 3;
  const MipSolution s = solve_michp(knapsack(val, wt, 17), cfg);
  CHECK((s.status == MipStatus::feasible || s.status == MipStatus::limit || s.status == MipStatus::optimal));
  CHECK(s.node_count <= 3);
}
