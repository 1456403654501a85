#pragma once

// Primal-dual interior-point method for
//
//   minimize c'x  subject to  A x = b,  G x + s = h,  s in K,
//
// using the homogeneous self-dual embedding, Nesterov-Todd scaling and
// Mehrotra predictor-corrector steps. The regularized quasi-definite KKT
// system is factored with a sparse LDL' and polished by iterative refinement.

#include "errplan/cones.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace errplan {

template <typename Scalar>
struct ConeProblem {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Sparse = Eigen::SparseMatrix<Scalar>;

  Vec c;
  Sparse A;  // p x n, may have zero rows
  Vec b;
  Sparse G;  // m x n
  Vec h;
  ConeLayout cones;
};

enum class ConeStatus { optimal, inaccurate, primal_infeasible, dual_infeasible, max_iterations, numerical_error };

inline const char* to_string(ConeStatus s) {
  switch (s) {
    case ConeStatus::optimal: return "optimal";
    case ConeStatus::inaccurate: return "inaccurate";
    case ConeStatus::primal_infeasible: return "primal_infeasible";
    case ConeStatus::dual_infeasible: return "dual_infeasible";
    case ConeStatus::max_iterations: return "max_iterations";
    default: return "numerical_error";
  }
}

struct IpmSettings {
  double feastol = 1e-9;
  double abstol = 1e-9;
  double reltol = 1e-9;
  double feastol_inaccurate = 1e-4;
  double abstol_inaccurate = 5e-5;
  double reltol_inaccurate = 5e-5;
  double infeasibility_tol = 1e-8;
  int max_iterations = 150;
  double static_regularization = 1e-8;
  int refinement_steps = 10;
  int equilibration_passes = 10;
  double step_fraction = 0.99;
  bool keep_log = false;
};

template <typename Scalar>
struct ConeSolution {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  ConeStatus status = ConeStatus::numerical_error;
  Vec x, y, s, z;
  Scalar primal_objective = 0;
  Scalar dual_objective = 0;
  Scalar primal_residual = 0;
  Scalar dual_residual = 0;
  Scalar gap = 0;
  int iterations = 0;
  std::string log;
};

template <typename Scalar>
class InteriorPointSolver {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Sparse = Eigen::SparseMatrix<Scalar>;

  explicit InteriorPointSolver(IpmSettings settings = {}) : settings_(settings) {}

  ConeSolution<Scalar> solve(const ConeProblem<Scalar>& problem) {
    setup(problem);
    return iterate();
  }

 private:
  struct Iterate {
    Vec x, y, s, z;
    Scalar tau = 1, kappa = 1;
  };
  struct Direction {
    Vec dx, dy, ds, dz;
    Scalar dtau = 0, dkappa = 0;
  };

  // ---- setup: equilibration and KKT pattern ------------------------------

  void setup(const ConeProblem<Scalar>& problem) {
    n_ = static_cast<int>(problem.c.size());
    p_ = static_cast<int>(problem.b.size());
    m_ = static_cast<int>(problem.h.size());
    cones_ = problem.cones;
    orig_ = &problem;
    equilibrate(problem);
    build_kkt_pattern();
  }

  // Ruiz equilibration of [A; G]: columns scaled by D, rows of A by EA and
  // rows of G by EG (uniform within each second-order cone block).
  void equilibrate(const ConeProblem<Scalar>& pr) {
    col_scale_ = Vec::Ones(n_);
    row_a_ = Vec::Ones(p_);
    row_g_ = Vec::Ones(m_);
    A_ = pr.A;
    G_ = pr.G;
    for (int pass = 0; pass < settings_.equilibration_passes; ++pass) {
      Vec cn = Vec::Zero(n_);
      Vec an = Vec::Zero(p_);
      Vec gn = Vec::Zero(m_);
      for (int k = 0; k < A_.outerSize(); ++k)
        for (typename Sparse::InnerIterator it(A_, k); it; ++it) {
          const Scalar v = std::abs(it.value());
          cn(it.col()) = std::max(cn(it.col()), v);
          an(it.row()) = std::max(an(it.row()), v);
        }
      for (int k = 0; k < G_.outerSize(); ++k)
        for (typename Sparse::InnerIterator it(G_, k); it; ++it) {
          const Scalar v = std::abs(it.value());
          cn(it.col()) = std::max(cn(it.col()), v);
          gn(it.row()) = std::max(gn(it.row()), v);
        }
      int off = cones_.orthant;
      for (int q : cones_.soc) {
        const Scalar mx = gn.segment(off, q).maxCoeff();
        gn.segment(off, q).setConstant(mx);
        off += q;
      }
      auto inv_sqrt = [](Scalar v) { return v > Scalar(1e-12) ? Scalar(1) / std::sqrt(v) : Scalar(1); };
      const Vec dc = cn.unaryExpr(inv_sqrt);
      const Vec da = an.unaryExpr(inv_sqrt);
      const Vec dg = gn.unaryExpr(inv_sqrt);
      A_ = da.asDiagonal() * A_ * dc.asDiagonal();
      G_ = dg.asDiagonal() * G_ * dc.asDiagonal();
      col_scale_ = col_scale_.cwiseProduct(dc);
      row_a_ = row_a_.cwiseProduct(da);
      row_g_ = row_g_.cwiseProduct(dg);
    }
    A_.makeCompressed();
    G_.makeCompressed();
    At_ = A_.transpose();
    Gt_ = G_.transpose();
    c_ = pr.c.cwiseProduct(col_scale_);
    b_ = pr.b.cwiseProduct(row_a_);
    h_ = pr.h.cwiseProduct(row_g_);
  }

  void build_kkt_pattern() {
    const int dim = n_ + p_ + m_;
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(static_cast<size_t>(dim + A_.nonZeros() + G_.nonZeros() + 16 * cones_.soc.size()));
    const Scalar reg = settings_.static_regularization;
    for (int i = 0; i < n_; ++i) trip.emplace_back(i, i, reg);
    for (int k = 0; k < A_.outerSize(); ++k)
      for (typename Sparse::InnerIterator it(A_, k); it; ++it) trip.emplace_back(n_ + it.row(), it.col(), it.value());
    for (int k = 0; k < G_.outerSize(); ++k)
      for (typename Sparse::InnerIterator it(G_, k); it; ++it)
        trip.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
    for (int i = 0; i < p_; ++i) trip.emplace_back(n_ + i, n_ + i, -reg);
    const int base = n_ + p_;
    for (int i = 0; i < cones_.orthant; ++i) trip.emplace_back(base + i, base + i, Scalar(-1));
    int off = cones_.orthant;
    for (int q : cones_.soc) {
      for (int j = 0; j < q; ++j)
        for (int i = j; i < q; ++i) trip.emplace_back(base + off + i, base + off + j, i == j ? Scalar(-1) : Scalar(0));
      off += q;
    }
    kkt_.resize(dim, dim);
    kkt_.setFromTriplets(trip.begin(), trip.end());
    kkt_.makeCompressed();
    // Remember where the scaling block lives so each iteration only rewrites values.
    scaling_slots_.clear();
    for (int i = 0; i < cones_.orthant; ++i) scaling_slots_.push_back(&kkt_.coeffRef(base + i, base + i));
    off = cones_.orthant;
    for (int q : cones_.soc) {
      for (int j = 0; j < q; ++j)
        for (int i = j; i < q; ++i) scaling_slots_.push_back(&kkt_.coeffRef(base + off + i, base + off + j));
      off += q;
    }
    diag_slots_.clear();
    for (int i = 0; i < n_ + p_; ++i) diag_slots_.push_back(&kkt_.coeffRef(i, i));
    ldlt_.analyzePattern(kkt_);
  }

  // Writes -(W'W) - reg*I into the scaling block and refactors. A zero pivot
  // is retried with regularization raised a hundredfold, up to three times.
  bool factor(const NtScaling<Scalar>* w) {
    Scalar reg = settings_.static_regularization;
    for (int attempt = 0; attempt < 4; ++attempt, reg *= Scalar(100))
      if (factor_with(w, reg)) return true;
    return false;
  }

  bool factor_with(const NtScaling<Scalar>* w, Scalar reg) {
    for (int i = 0; i < n_ + p_; ++i) *diag_slots_[static_cast<size_t>(i)] = i < n_ ? reg : -reg;
    size_t slot = 0;
    wtw_diag_.resize(cones_.orthant);
    wtw_blocks_.assign(cones_.soc.size(), {});
    for (int i = 0; i < cones_.orthant; ++i) {
      const Scalar d = w ? w->orthant_diag()(i) : Scalar(1);
      wtw_diag_(i) = d * d;
      *scaling_slots_[slot++] = -(d * d) - reg;
    }
    for (size_t c = 0; c < cones_.soc.size(); ++c) {
      const int q = cones_.soc[c];
      using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
      Mat wtw = w ? Mat(w->blocks()[c] * w->blocks()[c]) : Mat(Mat::Identity(q, q));
      wtw_blocks_[c] = wtw;
      for (int j = 0; j < q; ++j)
        for (int i = j; i < q; ++i) *scaling_slots_[slot++] = -wtw(i, j) - (i == j ? reg : Scalar(0));
    }
    ldlt_.factorize(kkt_);
    return ldlt_.info() == Eigen::Success;
  }

  // Product with the unregularized KKT matrix.
  Vec kkt_apply(const Vec& v) const {
    Vec out(v.size());
    const auto vx = v.head(n_);
    const auto vy = v.segment(n_, p_);
    const auto vz = v.tail(m_);
    out.head(n_) = At_ * vy + Gt_ * vz;
    out.segment(n_, p_) = A_ * vx;
    Vec wz(m_);
    wz.head(cones_.orthant) = wtw_diag_.cwiseProduct(vz.head(cones_.orthant));
    int off = cones_.orthant;
    for (size_t c = 0; c < cones_.soc.size(); ++c) {
      const int q = cones_.soc[c];
      wz.segment(off, q) = wtw_blocks_[c] * vz.segment(off, q);
      off += q;
    }
    out.tail(m_) = G_ * vx - wz;
    return out;
  }

  Vec kkt_solve(const Vec& rhs) const {
    Vec sol = ldlt_.solve(rhs);
    const Scalar scale = Scalar(1) + rhs.template lpNorm<Eigen::Infinity>();
    Vec err = rhs - kkt_apply(sol);
    Scalar err_norm = err.template lpNorm<Eigen::Infinity>();
    for (int k = 0; k < settings_.refinement_steps && err_norm > Scalar(1e-14) * scale; ++k) {
      const Vec trial = sol + ldlt_.solve(err);
      Vec trial_err = rhs - kkt_apply(trial);
      const Scalar trial_norm = trial_err.template lpNorm<Eigen::Infinity>();
      if (!(trial_norm < err_norm)) break;  // refinement stalled
      sol = trial;
      err.swap(trial_err);
      err_norm = trial_norm;
    }
    return sol;
  }

  // ---- main loop -----------------------------------------------------------

  Iterate initial_point() {
    Iterate it;
    factor(nullptr);
    Vec rhs = Vec::Zero(n_ + p_ + m_);
    rhs.segment(n_, p_) = b_;
    rhs.tail(m_) = h_;
    Vec sol = kkt_solve(rhs);
    it.x = sol.head(n_);
    it.s = -sol.tail(m_);
    const Scalar ap = cone_violation(cones_, it.s);
    const Vec e = cone_identity<Scalar>(cones_);
    if (ap >= Scalar(-1e-8)) it.s += (Scalar(1) + std::max(ap, Scalar(0))) * e;

    rhs.setZero();
    rhs.head(n_) = -c_;
    sol = kkt_solve(rhs);
    it.y = sol.segment(n_, p_);
    it.z = sol.tail(m_);
    const Scalar ad = cone_violation(cones_, it.z);
    if (ad >= Scalar(-1e-8)) it.z += (Scalar(1) + std::max(ad, Scalar(0))) * e;
    it.tau = 1;
    it.kappa = 1;
    return it;
  }

  struct Residuals {
    Vec rx, ry, rz;
    Scalar rt = 0;
  };

  Residuals residuals(const Iterate& it) const {
    Residuals r;
    r.rx = At_ * it.y + Gt_ * it.z + c_ * it.tau;
    r.ry = A_ * it.x - b_ * it.tau;
    r.rz = it.s + G_ * it.x - h_ * it.tau;
    r.rt = it.kappa + c_.dot(it.x) + b_.dot(it.y) + h_.dot(it.z);
    return r;
  }

  // Unscaled quantities for termination tests.
  struct Metrics {
    Scalar pres = 0, dres = 0, pcost = 0, dcost = 0, gap = 0, relgap = 0;
    Scalar pinf = 0, dinf = 0;
    bool pinf_candidate = false, dinf_candidate = false;
  };

  Metrics metrics(const Iterate& it) const {
    Metrics mt;
    const auto& pr = *orig_;
    const Vec x = it.x.cwiseProduct(col_scale_);
    const Vec s = it.s.cwiseQuotient(row_g_);
    const Vec y = it.y.cwiseProduct(row_a_);
    const Vec z = it.z.cwiseProduct(row_g_);
    const Scalar tau = it.tau;
    const Scalar nb = std::max(Scalar(1), pr.b.norm());
    const Scalar nh = std::max(Scalar(1), pr.h.norm());
    const Scalar nc = std::max(Scalar(1), pr.c.norm());
    const Vec ax = pr.A * x;
    const Vec gxs = pr.G * x + s;
    const Vec aty_gtz = pr.A.transpose() * y + pr.G.transpose() * z;
    mt.pres = std::max(p_ > 0 ? (ax - pr.b * tau).norm() / tau / nb : Scalar(0), (gxs - pr.h * tau).norm() / tau / nh);
    mt.dres = (aty_gtz + pr.c * tau).norm() / tau / nc;
    mt.pcost = pr.c.dot(x) / tau;
    mt.dcost = -(pr.b.dot(y) + pr.h.dot(z)) / tau;
    mt.gap = s.dot(z) / (tau * tau);
    if (mt.pcost < 0)
      mt.relgap = mt.gap / -mt.pcost;
    else if (mt.dcost > 0)
      mt.relgap = mt.gap / mt.dcost;
    else
      mt.relgap = std::numeric_limits<Scalar>::infinity();
    const Scalar hz_by = pr.h.dot(z) + pr.b.dot(y);
    if (hz_by < 0) {
      mt.pinf_candidate = true;
      mt.pinf = aty_gtz.norm() / -hz_by;
    }
    const Scalar cx = pr.c.dot(x);
    if (cx < 0) {
      mt.dinf_candidate = true;
      mt.dinf = std::max(ax.norm() / nb, gxs.norm() / nh) / -cx;
    }
    return mt;
  }

  bool converged(const Metrics& mt, Scalar feastol, Scalar abstol, Scalar reltol) const {
    return mt.pres < feastol && mt.dres < feastol && (mt.gap < abstol || mt.relgap < reltol);
  }

  ConeSolution<Scalar> finish(const Iterate& it, ConeStatus status, int iters, const Metrics& mt) {
    ConeSolution<Scalar> out;
    out.status = status;
    out.iterations = iters;
    Scalar div = Scalar(1);
    if (status == ConeStatus::optimal || status == ConeStatus::inaccurate || status == ConeStatus::max_iterations ||
        status == ConeStatus::numerical_error)
      div = it.tau;
    if (status == ConeStatus::primal_infeasible) div = -(orig_->h.dot(it.z.cwiseProduct(row_g_)) + orig_->b.dot(it.y.cwiseProduct(row_a_)));
    if (status == ConeStatus::dual_infeasible) div = -orig_->c.dot(it.x.cwiseProduct(col_scale_));
    if (!(div > 0)) div = Scalar(1);
    out.x = it.x.cwiseProduct(col_scale_) / div;
    out.s = it.s.cwiseQuotient(row_g_) / div;
    out.y = it.y.cwiseProduct(row_a_) / div;
    out.z = it.z.cwiseProduct(row_g_) / div;
    out.primal_objective = mt.pcost;
    out.dual_objective = mt.dcost;
    out.primal_residual = mt.pres;
    out.dual_residual = mt.dres;
    out.gap = mt.gap;
    out.log = log_.str();
    return out;
  }

  Direction direction(const Iterate& it, const NtScaling<Scalar>& w, const Residuals& r, Scalar eta, const Vec& rc,
                      Scalar rk, const Vec& x2, const Vec& y2, const Vec& z2) const {
    Direction d;
    const Vec u = jordan_divide(cones_, w.lambda(), rc);
    const Vec wu = w.apply(u);
    Vec rhs(n_ + p_ + m_);
    rhs.head(n_) = -eta * r.rx;
    rhs.segment(n_, p_) = -eta * r.ry;
    rhs.tail(m_) = -eta * r.rz - wu;
    const Vec sol = kkt_solve(rhs);
    const auto x1 = sol.head(n_);
    const auto y1 = sol.segment(n_, p_);
    const auto z1 = sol.tail(m_);
    const Scalar denom = c_.dot(x2) + b_.dot(y2) + h_.dot(z2) - it.kappa / it.tau;
    d.dtau = (-eta * r.rt - rk / it.tau - (c_.dot(x1) + b_.dot(y1) + h_.dot(z1))) / denom;
    d.dx = x1 + d.dtau * x2;
    d.dy = y1 + d.dtau * y2;
    d.dz = z1 + d.dtau * z2;
    d.ds = wu - w.apply(w.apply(d.dz));
    d.dkappa = (rk - it.kappa * d.dtau) / it.tau;
    return d;
  }

  Scalar step_length(const Iterate& it, const Direction& d) const {
    Scalar a = std::min(max_cone_step(cones_, it.s, d.ds), max_cone_step(cones_, it.z, d.dz));
    if (d.dtau < 0) a = std::min(a, -it.tau / d.dtau);
    if (d.dkappa < 0) a = std::min(a, -it.kappa / d.dkappa);
    return a;
  }

  ConeSolution<Scalar> iterate() {
    log_.str("");
    Iterate it = initial_point();
    const Vec e = cone_identity<Scalar>(cones_);
    const Scalar degree = Scalar(cones_.degree() + 1);
    Metrics mt;
    Metrics best_mt;
    Iterate best_it = it;
    bool have_best = false;
    NtScaling<Scalar> w;
    for (int iter = 0; iter <= settings_.max_iterations; ++iter) {
      const Residuals r = residuals(it);
      mt = metrics(it);
      const Scalar mu = (it.s.dot(it.z) + it.tau * it.kappa) / degree;
      if (settings_.keep_log)
        log_ << "it " << iter << " pcost " << mt.pcost << " dcost " << mt.dcost << " gap " << mt.gap << " pres "
             << mt.pres << " dres " << mt.dres << " tau " << it.tau << " kappa " << it.kappa << "\n";
      if (converged(mt, settings_.feastol, settings_.abstol, settings_.reltol))
        return finish(it, ConeStatus::optimal, iter, mt);
      if (mt.pinf_candidate && mt.pinf < settings_.infeasibility_tol && it.tau < it.kappa)
        return finish(it, ConeStatus::primal_infeasible, iter, mt);
      if (mt.dinf_candidate && mt.dinf < settings_.infeasibility_tol && it.tau < it.kappa)
        return finish(it, ConeStatus::dual_infeasible, iter, mt);
      if (converged(mt, settings_.feastol_inaccurate, settings_.abstol_inaccurate, settings_.reltol_inaccurate)) {
        if (!have_best || std::max(mt.pres, mt.dres) < std::max(best_mt.pres, best_mt.dres)) {
          best_it = it;
          best_mt = mt;
          have_best = true;
        }
      }
      if (iter == settings_.max_iterations) break;

      if (!w.compute(cones_, it.s, it.z)) {
        if (settings_.keep_log) log_ << "stop: scaling failed\n";
        break;
      }
      if (!factor(&w)) {
        if (settings_.keep_log) log_ << "stop: factorization failed\n";
        break;
      }
      Vec rhs2(n_ + p_ + m_);
      rhs2.head(n_) = -c_;
      rhs2.segment(n_, p_) = b_;
      rhs2.tail(m_) = h_;
      const Vec sol2 = kkt_solve(rhs2);
      const Vec x2 = sol2.head(n_);
      const Vec y2 = sol2.segment(n_, p_);
      const Vec z2 = sol2.tail(m_);

      const Vec& lam = w.lambda();
      const Vec rc_aff = -jordan_product(cones_, lam, lam);
      const Direction aff = direction(it, w, r, Scalar(1), rc_aff, -it.tau * it.kappa, x2, y2, z2);
      const Scalar alpha_aff = std::min(Scalar(1), step_length(it, aff));
      const Scalar sigma = std::clamp(std::pow(Scalar(1) - alpha_aff, Scalar(3)), Scalar(0), Scalar(1));

      const Vec ds_scaled = w.apply_inverse(aff.ds);
      const Vec dz_scaled = w.apply(aff.dz);
      const Vec rc = rc_aff + sigma * mu * e - jordan_product(cones_, ds_scaled, dz_scaled);
      const Scalar rk = -it.tau * it.kappa + sigma * mu - aff.dtau * aff.dkappa;
      const Direction d = direction(it, w, r, Scalar(1) - sigma, rc, rk, x2, y2, z2);
      const Scalar alpha = std::min(Scalar(1), settings_.step_fraction * step_length(it, d));
      if (!(alpha > Scalar(1e-12)) || !std::isfinite(alpha)) {
        if (settings_.keep_log) log_ << "stop: step length " << alpha << "\n";
        break;
      }
      it.x += alpha * d.dx;
      it.y += alpha * d.dy;
      it.s += alpha * d.ds;
      it.z += alpha * d.dz;
      it.tau += alpha * d.dtau;
      it.kappa += alpha * d.dkappa;
      // Rescale the embedding to keep tau + kappa from drifting to extremes.
      const Scalar norm = it.tau + it.kappa;
      if (norm > Scalar(1e6) || norm < Scalar(1e-6)) {
        it.x /= norm;
        it.y /= norm;
        it.s /= norm;
        it.z /= norm;
        it.tau /= norm;
        it.kappa /= norm;
      }
    }
    if (have_best) return finish(best_it, ConeStatus::inaccurate, settings_.max_iterations, best_mt);
    mt = metrics(it);
    if (mt.pinf_candidate && mt.pinf < Scalar(1e-5) && it.tau < it.kappa)
      return finish(it, ConeStatus::primal_infeasible, settings_.max_iterations, mt);
    if (mt.dinf_candidate && mt.dinf < Scalar(1e-5) && it.tau < it.kappa)
      return finish(it, ConeStatus::dual_infeasible, settings_.max_iterations, mt);
    return finish(it, ConeStatus::numerical_error, settings_.max_iterations, mt);
  }

  IpmSettings settings_;
  int n_ = 0, p_ = 0, m_ = 0;
  ConeLayout cones_;
  const ConeProblem<Scalar>* orig_ = nullptr;
  Sparse A_, G_, At_, Gt_;
  Vec c_, b_, h_;
  Vec col_scale_, row_a_, row_g_;
  Sparse kkt_;
  std::vector<Scalar*> scaling_slots_;
  std::vector<Scalar*> diag_slots_;
  Vec wtw_diag_;
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> wtw_blocks_;
  Eigen::SimplicialLDLT<Sparse, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  std::ostringstream log_;
};

}  // namespace errplan
