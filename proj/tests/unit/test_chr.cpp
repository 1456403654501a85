#include "doctest.h"

#include "errplan/chr.hpp"
#include "errplan/errors.hpp"
#include "errplan/netmodel.hpp"

#include <random>

using namespace errplan;

namespace {

// Direct form of the rotated cone: p^2 + q^2 <= l v with l, v >= 0.
bool in_rotated_cone(const Eigen::Vector4d& y) {
  return y(0) * y(0) + y(1) * y(1) <= y(2) * y(3) + 1e-12 && y(2) >= 0 && y(3) >= 0;
}

}  // namespace

TEST_CASE("flow cone agrees with its rotated-cone form") {
  const HullConstraintSet h = hull_line_flow(1.0, SquaredVoltage{0.9025, 1.1025});
  REQUIRE(h.cones.size() == 1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int disagreements = 0;
  for (int k = 0; k < 5000; ++k) {
    const Eigen::Vector4d y(u(rng), u(rng), 1.0 + u(rng), 1.0 + 0.2 * u(rng));
    const bool cone = h.cones[0].violation(y) <= 1e-12;
    if (cone != in_rotated_cone(y)) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("flow hull is tight on the exact equation") {
  const HullConstraintSet h = hull_line_flow(1.0, SquaredVoltage{0.9025, 1.1025});
  const Eigen::Vector4d on(0.5, 0.5, 0.5, 1.0);
  CHECK(h.cones[0].violation(on) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(h.max_violation(on) <= 1e-12);
}

TEST_CASE("zero flow at nominal voltage is feasible with slack in the cut") {
  const HullConstraintSet h = hull_line_flow(1.0, SquaredVoltage{0.9025, 1.1025});
  const Eigen::Vector4d y(0, 0, 0, 1);
  CHECK(h.cones[0].violation(y) <= 1e-12);
  REQUIRE(h.cuts.size() == 1);
  CHECK(h.cuts[0].violation(y) < -0.5);
}

TEST_CASE("flow hull contains sampled points of the exact equation") {
  const HullConstraintSet h = hull_line_flow(1.3, SquaredVoltage{0.9025, 1.1025});
  ManifoldParams mp;
  mp.v = {0.9025, 1.1025};
  mp.smax = 1.3;
  const SoundnessReport r = soundness_check(h, Manifold::branch_flow, mp, 10000, 11);
  CHECK(r.samples == 10000);
  CHECK(r.violating_points == 0);
  CHECK(r.max_tightness <= 1e-9);
}

TEST_CASE("equal voltage bounds still give a sound hull") {
  const SquaredVoltage v{1.0, 1.0};
  const HullConstraintSet h = hull_line_flow(0.7, v);
  ManifoldParams mp;
  mp.v = v;
  mp.smax = 0.7;
  CHECK(soundness_check(h, Manifold::branch_flow, mp, 2000, 5).violating_points == 0);
  CHECK(h.max_violation(Eigen::Vector4d(0.7, 0.0, 0.49, 1.0)) <= 1e-12);
}

TEST_CASE("storage hull rejects converter resistance above the total") {
  CHECK_THROWS_AS(hull_storage_loss(0.01, 0.02, 1.0, SquaredVoltage{}), ValidationError);
}

TEST_CASE("idle storage is inside both storage hulls") {
  for (auto variant : {StorageHull::unscaled, StorageHull::scaled}) {
    const HullConstraintSet h = hull_storage_loss(0.05, 0.02, 0.5, SquaredVoltage{0.9025, 1.1025}, variant);
    CHECK(h.cones.size() == 2);
    CHECK(h.max_violation(Eigen::Vector4d(0, 0, 0, 1.0)) <= 1e-12);
  }
}

TEST_CASE("scaled storage hull is sound where the unscaled first cone is not") {
  const SquaredVoltage v{0.9025, 1.1025};
  ManifoldParams mp;
  mp.v = v;
  mp.smax = 0.5;
  mp.r_e = 0.05;
  mp.r_ct = 0.02;
  const auto unscaled = hull_storage_loss(0.05, 0.02, 0.5, v, StorageHull::unscaled);
  const auto scaled = hull_storage_loss(0.05, 0.02, 0.5, v, StorageHull::scaled);
  CHECK(soundness_check(unscaled, Manifold::storage_loss, mp, 10000, 2).violating_points > 0);
  CHECK(soundness_check(scaled, Manifold::storage_loss, mp, 10000, 2).violating_points == 0);
  CHECK(select_storage_hull(0.05, 0.02, 0.5, v) == StorageHull::scaled);
}

TEST_CASE("soundness sampling is reproducible for a seed") {
  const HullConstraintSet h = hull_line_flow(1.0, SquaredVoltage{0.9025, 1.1025});
  ManifoldParams mp;
  mp.v = {0.9025, 1.1025};
  const auto a = soundness_check(h, Manifold::branch_flow, mp, 500, 9);
  const auto b = soundness_check(h, Manifold::branch_flow, mp, 500, 9);
  CHECK(a.max_violation == b.max_violation);
  CHECK(a.max_tightness == b.max_tightness);
}
