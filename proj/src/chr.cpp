#include "errplan/chr.hpp"

#include "errplan/errors.hpp"

#include <cmath>
#include <random>

namespace errplan {

const char* to_string(StorageHull h) { return h == StorageHull::scaled ? "scaled" : "unscaled"; }

HullConstraintSet hull_line_flow(double smax, SquaredVoltage v) {
  HullConstraintSet h;
  h.variables = "p,q,l,v";
  HullCone cone;
  cone.a << std::sqrt(2.0), std::sqrt(2.0), 1.0, 1.0;
  cone.b << 0.0, 0.0, 1.0, 1.0;
  h.cones.push_back(cone);
  HullCut cut;
  const double s2 = smax * smax;
  cut.c << 0.0, 0.0, v.lo * v.hi, s2;
  cut.d = (v.hi + v.lo) * s2;
  h.cuts.push_back(cut);
  return h;
}

HullConstraintSet hull_line_flow(const Line& line, const Bus& bus) {
  return hull_line_flow(line.smax, squared_bounds(bus.vmin, bus.vmax));
}

HullConstraintSet hull_storage_loss(double r_e, double r_ct, double s_cap, SquaredVoltage v, StorageHull variant) {
  if (!(r_e >= 0) || !(r_ct >= 0) || r_ct > r_e) throw ValidationError("storage hull: requires 0 <= r_ct <= r_e");
  HullConstraintSet h;
  h.variables = "p,q,p_loss,v";
  const double s2 = s_cap * s_cap;
  const double e = r_e * s2;

  HullCone first;
  if (variant == StorageHull::unscaled)
    first.a << std::sqrt(2.0), std::sqrt(2.0), 1.0, 1.0;
  else
    first.a << std::sqrt(2.0 * r_e), std::sqrt(2.0 * r_ct), 1.0, 1.0;
  first.b << 0.0, 0.0, 1.0, 1.0;
  h.cones.push_back(first);

  HullCone second;
  second.a << 0.0, std::sqrt(2.0 * battery_resistance(r_e, r_ct)), 1.0, 1.0;
  second.b << 0.0, 0.0, 1.0, 1.0;
  second.e = e;
  h.cones.push_back(second);

  HullCut cut;
  cut.c << 0.0, 0.0, v.lo * v.hi, e;
  cut.d = r_e * (v.hi + v.lo) * s2;
  h.cuts.push_back(cut);
  return h;
}

HullConstraintSet hull_storage_loss(const DerUnit& storage, const Bus& bus, StorageHull variant) {
  if (!storage.r_e || !storage.r_ct) throw MissingParameter("storage at bus " + storage.bus + ": r_e/r_ct not set");
  if (!(storage.s_cap > 0)) throw MissingParameter("storage at bus " + storage.bus + ": s_cap not set");
  return hull_storage_loss(*storage.r_e, *storage.r_ct, storage.s_cap, squared_bounds(bus.vmin, bus.vmax), variant);
}

HullConstraintSet hull_storage_loss(const MerSpec& storage, const Bus& bus, StorageHull variant) {
  if (!(storage.s_size > 0)) throw MissingParameter(storage.label() + ": s_size not set");
  return hull_storage_loss(storage.r_e, storage.r_ct, storage.s_size, squared_bounds(bus.vmin, bus.vmax), variant);
}

nlohmann::json SoundnessReport::to_json() const {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& y : examples) ex.push_back({y(0), y(1), y(2), y(3)});
  return {{"manifold", manifold},          {"samples", samples},
          {"threshold", threshold},        {"max_violation", max_violation},
          {"violating_points", violating_points}, {"max_first_cone_residual", max_tightness},
          {"examples", ex}};
}

SoundnessReport soundness_check(const HullConstraintSet& hull, Manifold manifold, const ManifoldParams& params,
                                int n_samples, std::uint64_t seed, double threshold) {
  SoundnessReport rep;
  rep.manifold = manifold == Manifold::branch_flow ? "branch_flow" : "storage_loss";
  rep.threshold = threshold;
  rep.max_violation = 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = params.smax;
  int accepted = 0;
  long attempts = 0;
  while (accepted < n_samples && attempts < 1000L * n_samples) {
    ++attempts;
    // Uniform over the disk p^2 + q^2 <= s^2.
    const double rad = s * std::sqrt(unit(rng));
    const double ang = 2.0 * M_PI * unit(rng);
    const double p = rad * std::cos(ang);
    const double q = rad * std::sin(ang);
    const double v = params.v.lo + (params.v.hi - params.v.lo) * unit(rng);
    double dep = 0.0;
    if (manifold == Manifold::branch_flow) {
      dep = (p * p + q * q) / v;
      if (dep > params.i2max) continue;
    } else {
      dep = (params.r_e * p * p + params.r_ct * q * q) / v;
    }
    ++accepted;
    const Eigen::Vector4d y(p, q, dep, v);
    const double w = hull.max_violation(y);
    rep.max_violation = std::max(rep.max_violation, w);
    if (w > threshold) {
      ++rep.violating_points;
      if (rep.examples.size() < 5) rep.examples.push_back(y);
    }
    if (!hull.cones.empty()) rep.max_tightness = std::max(rep.max_tightness, std::abs(hull.cones[0].violation(y)));
  }
  rep.samples = accepted;
  return rep;
}

StorageHull select_storage_hull(double r_e, double r_ct, double s_cap, SquaredVoltage v, std::uint64_t seed,
                                int n_samples) {
  const auto h = hull_storage_loss(r_e, r_ct, s_cap, v, StorageHull::unscaled);
  ManifoldParams mp;
  mp.v = v;
  mp.smax = s_cap;
  mp.r_e = r_e;
  mp.r_ct = r_ct;
  const auto rep = soundness_check(h, Manifold::storage_loss, mp, n_samples, seed);
  return rep.violating_points == 0 ? StorageHull::unscaled : StorageHull::scaled;
}

}  // namespace errplan
