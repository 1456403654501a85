#include "doctest.h"

#include "errplan/backend.hpp"
#include "errplan/cones.hpp"
#include "errplan/socp.hpp"

#include <random>

using namespace errplan;

TEST_CASE("nt scaling maps z and s to the same lambda") {
  ConeLayout k;
  k.orthant = 2;
  k.soc = {3, 4};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd s(k.dim()), z(k.dim());
    for (int i = 0; i < k.dim(); ++i) {
      s(i) = u(rng);
      z(i) = u(rng);
    }
    s.head(2) = s.head(2).cwiseAbs().array() + 0.1;
    z.head(2) = z.head(2).cwiseAbs().array() + 0.1;
    int off = 2;
    for (int q : k.soc) {
      s(off) = s.segment(off + 1, q - 1).norm() + 0.2 + std::abs(u(rng));
      z(off) = z.segment(off + 1, q - 1).norm() + 0.2 + std::abs(u(rng));
      off += q;
    }
    NtScaling<double> w;
    REQUIRE(w.compute(k, s, z));
    CHECK((w.apply(z) - w.lambda()).norm() < 1e-10);
    CHECK((w.apply_inverse(s) - w.lambda()).norm() < 1e-10);
    CHECK((w.apply(w.apply_inverse(s)) - s).norm() < 1e-10);
  }
}

TEST_CASE("jordan divide inverts the product") {
  ConeLayout k;
  k.orthant = 1;
  k.soc = {3};
  Eigen::VectorXd lam(4), r(4);
  lam << 2.0, 3.0, 1.0, -0.5;
  r << 0.3, -1.0, 2.0, 0.7;
  const Eigen::VectorXd v = jordan_divide(k, lam, r);
  CHECK((jordan_product(k, lam, v) - r).norm() < 1e-12);
}

TEST_CASE("max cone step stops on the boundary") {
  ConeLayout k;
  k.soc = {3};
  Eigen::VectorXd u(3), d(3);
  u << 1.0, 0.0, 0.0;
  d << 0.0, 1.0, 0.0;
  CHECK(max_cone_step(k, u, d) == doctest::Approx(1.0));
}

TEST_CASE("continuous: min x subject to x >= 3") {
  ConicProgram p;
  const int x = p.add_variable("x", -kInf, kInf);
  p.set_objective(x, 1.0);
  p.add_linear(AffineExpr({{x, 1.0}}), Sense::ge, 3.0);
  const RelaxResult r = solve_continuous(p);
  REQUIRE(r.status == RelaxStatus::optimal);
  CHECK(r.x(x) == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("continuous: hull cone with q = 0, v = 1, l <= 1 gives p = 1") {
  ConicProgram p;
  const int vp = p.add_variable("p", -10, 10);
  const int vq = p.add_variable("q", 0, 0);
  const int vl = p.add_variable("l", 0, 1);
  const int vv = p.add_variable("v", 1, 1);
  p.set_objective(vp, -1.0);
  // ||(sqrt2 p, sqrt2 q, l, v)|| <= l + v
  p.add_soc({AffineExpr({{vp, std::sqrt(2.0)}}), AffineExpr({{vq, std::sqrt(2.0)}}), AffineExpr({{vl, 1.0}}),
             AffineExpr({{vv, 1.0}})},
            AffineExpr({{vl, 1.0}, {vv, 1.0}}));
  const RelaxResult r = solve_continuous(p);
  REQUIRE(r.status == RelaxStatus::optimal);
  CHECK(r.x(vp) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x(vl) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("continuous: infeasible box is reported") {
  ConicProgram p;
  const int x = p.add_variable("x", -kInf, kInf);
  p.set_objective(x, 1.0);
  p.add_linear(AffineExpr({{x, 1.0}}), Sense::ge, 2.0);
  p.add_linear(AffineExpr({{x, 1.0}}), Sense::le, 1.0);
  CHECK(solve_continuous(p).status == RelaxStatus::infeasible);
}

TEST_CASE("continuous: unbounded objective is reported") {
  ConicProgram p;
  const int x = p.add_variable("x", -kInf, kInf);
  const int y = p.add_variable("y", 0, 1);
  p.set_objective(x, 1.0);
  p.add_linear(AffineExpr({{x, 1.0}, {y, 1.0}}), Sense::le, 5.0);
  CHECK(solve_continuous(p).status == RelaxStatus::unbounded);
}

TEST_CASE("continuous: equality-constrained socp matches closed form") {
  // min t s.t. ||(x - 1, y - 2)|| <= t, x + y = 0  -> distance from (1,2) to line x+y=0
  ConicProgram p;
  const int x = p.add_variable("x", -kInf, kInf);
  const int y = p.add_variable("y", -kInf, kInf);
  const int t = p.add_variable("t", -kInf, kInf);
  p.set_objective(t, 1.0);
  p.add_linear(AffineExpr({{x, 1.0}, {y, 1.0}}), Sense::eq, 0.0);
  p.add_soc({AffineExpr({{x, 1.0}}, -1.0), AffineExpr({{y, 1.0}}, -2.0)}, AffineExpr({{t, 1.0}}));
  const RelaxResult r = solve_continuous(p);
  REQUIRE(r.status == RelaxStatus::optimal);
  CHECK(r.objective == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-7));
}

TEST_CASE("continuous: random feasible lps agree with a vertex enumeration bound") {
  // min c'x over the box [0,1]^n with one knapsack row; the LP optimum is the
  // fractional greedy solution.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    ConicProgram p;
    std::vector<double> val(n), wt(n);
    AffineExpr knap;
    for (int i = 0; i < n; ++i) {
      p.add_variable("x" + std::to_string(i), 0, 1);
      val[i] = u(rng);
      wt[i] = u(rng);
      p.set_objective(i, -val[i]);
      knap.add(i, wt[i]);
    }
    const double cap = 1.5;
    p.add_linear(knap, Sense::le, cap);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] / wt[a] > val[b] / wt[b]; });
    double left = cap, best = 0;
    for (int i : order) {
      const double take = std::min(1.0, left / wt[i]);
      best += take * val[i];
      left -= take * wt[i];
      if (left <= 0) break;
    }
    const RelaxResult r = solve_continuous(p);
    REQUIRE(r.status == RelaxStatus::optimal);
    CHECK(-r.objective == doctest::Approx(best).epsilon(1e-7));
  }
}
