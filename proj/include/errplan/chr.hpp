#pragma once

// Second-order cone hulls of the nonconvex branch-flow equation
// p^2 + q^2 = l v and the storage loss equation r_e p^2 + r_ct q^2 = p_loss v.
// Each constraint acts on a 4-vector y of model variables.

#include "errplan/netmodel.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace errplan {

// || diag(a) y ||_2 - b'y <= e
struct HullCone {
  Eigen::Vector4d a = Eigen::Vector4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  double e = 0.0;

  template <typename Derived>
  double violation(const Eigen::MatrixBase<Derived>& y) const {
    return a.cwiseProduct(y).norm() - b.dot(y) - e;
  }
};

// c'y <= d
struct HullCut {
  Eigen::Vector4d c = Eigen::Vector4d::Zero();
  double d = 0.0;

  template <typename Derived>
  double violation(const Eigen::MatrixBase<Derived>& y) const {
    return c.dot(y) - d;
  }
};

struct HullConstraintSet {
  std::vector<HullCone> cones;
  std::vector<HullCut> cuts;
  std::string variables;  // e.g. "p,q,l,v"

  template <typename Derived>
  double max_violation(const Eigen::MatrixBase<Derived>& y) const {
    double w = -std::numeric_limits<double>::infinity();
    for (const auto& c : cones) w = std::max(w, c.violation(y));
    for (const auto& c : cuts) w = std::max(w, c.violation(y));
    return w;
  }
};

// Squared voltage bounds of a bus (the model's v is squared magnitude).
struct SquaredVoltage {
  double lo = 0.9025;
  double hi = 1.1025;
};

inline SquaredVoltage squared_bounds(double vmin, double vmax) { return {vmin * vmin, vmax * vmax}; }

// Branch flow over y = (p, q, l, v).
HullConstraintSet hull_line_flow(double smax, SquaredVoltage v);
HullConstraintSet hull_line_flow(const Line& line, const Bus& bus);

enum class StorageHull {
  unscaled,  // first cone p^2 + q^2 <= p_loss v
  scaled,    // first cone r_e p^2 + r_ct q^2 <= p_loss v
};

const char* to_string(StorageHull h);

// Battery-side resistance: total minus converter.
inline double battery_resistance(double r_e, double r_ct) { return r_e - r_ct; }

// Storage loss over y = (p, q, p_loss, v).
HullConstraintSet hull_storage_loss(double r_e, double r_ct, double s_cap, SquaredVoltage v,
                                    StorageHull variant = StorageHull::unscaled);
HullConstraintSet hull_storage_loss(const DerUnit& storage, const Bus& bus,
                                    StorageHull variant = StorageHull::unscaled);
HullConstraintSet hull_storage_loss(const MerSpec& storage, const Bus& bus,
                                    StorageHull variant = StorageHull::unscaled);

enum class Manifold { branch_flow, storage_loss };

struct ManifoldParams {
  SquaredVoltage v;
  double smax = 1.0;
  double i2max = kInfinityI2;
  double r_e = 0.0;
  double r_ct = 0.0;
  static constexpr double kInfinityI2 = 1e300;
};

struct SoundnessReport {
  std::string manifold;
  int samples = 0;
  double max_violation = 0.0;    // largest positive violation over all samples
  int violating_points = 0;      // samples with violation above the threshold
  double threshold = 1e-9;
  double max_tightness = 0.0;    // largest |cone residual| of the first cone
  std::vector<Eigen::Vector4d> examples;  // up to 5 violating samples

  nlohmann::json to_json() const;
};

// Samples points on the exact equation within the variable box and evaluates
// every hull constraint at them.
SoundnessReport soundness_check(const HullConstraintSet& hull, Manifold manifold, const ManifoldParams& params,
                                int n_samples, std::uint64_t seed, double threshold = 1e-9);

// Appendix variant when it passes the sampling check for these parameters,
// the scaled variant otherwise.
StorageHull select_storage_hull(double r_e, double r_ct, double s_cap, SquaredVoltage v, std::uint64_t seed = 1,
                                int n_samples = 2000);

}  // namespace errplan
