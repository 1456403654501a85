#pragma once

// Jordan-algebra primitives for the cone K = R+^l x Q^{q1} x ... x Q^{qk},
// where Q^q = { (u0, u1) : u0 >= ||u1|| } is the second-order cone.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace errplan {

struct ConeLayout {
  int orthant = 0;
  std::vector<int> soc;

  int dim() const {
    int d = orthant;
    for (int q : soc) d += q;
    return d;
  }
  // Barrier degree: one per orthant coordinate and one per cone.
  int degree() const { return orthant + static_cast<int>(soc.size()); }
};

// u o v
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> jordan_product(const ConeLayout& k,
                                                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                                                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(u.size());
  out.head(k.orthant) = u.head(k.orthant).cwiseProduct(v.head(k.orthant));
  int off = k.orthant;
  for (int q : k.soc) {
    const auto us = u.segment(off, q);
    const auto vs = v.segment(off, q);
    out(off) = us.dot(vs);
    out.segment(off + 1, q - 1) = us(0) * vs.tail(q - 1) + vs(0) * us.tail(q - 1);
    off += q;
  }
  return out;
}

// Solves lambda o u = r for u.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> jordan_divide(const ConeLayout& k,
                                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lambda,
                                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(r.size());
  out.head(k.orthant) = r.head(k.orthant).cwiseQuotient(lambda.head(k.orthant));
  int off = k.orthant;
  for (int q : k.soc) {
    const auto l = lambda.segment(off, q);
    const auto rs = r.segment(off, q);
    const Scalar l0 = l(0);
    const Scalar det = l0 * l0 - l.tail(q - 1).squaredNorm();
    const Scalar u0 = (l0 * rs(0) - l.tail(q - 1).dot(rs.tail(q - 1))) / det;
    out(off) = u0;
    out.segment(off + 1, q - 1) = (rs.tail(q - 1) - u0 * l.tail(q - 1)) / l0;
    off += q;
  }
  return out;
}

// Identity element e of the cone.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cone_identity(const ConeLayout& k) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k.dim());
  e.head(k.orthant).setOnes();
  int off = k.orthant;
  for (int q : k.soc) {
    e(off) = Scalar(1);
    off += q;
  }
  return e;
}

// Negated smallest "eigenvalue" of u; u lies in int K iff the result is < 0.
template <typename Scalar>
Scalar cone_violation(const ConeLayout& k, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u) {
  Scalar worst = -std::numeric_limits<Scalar>::infinity();
  if (k.orthant > 0) worst = -u.head(k.orthant).minCoeff();
  int off = k.orthant;
  for (int q : k.soc) {
    worst = std::max(worst, u.segment(off + 1, q - 1).norm() - u(off));
    off += q;
  }
  return worst;
}

// Largest alpha >= 0 such that u + alpha*du stays in K (infinity if unbounded).
template <typename Scalar>
Scalar max_cone_step(const ConeLayout& k, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& u,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& du) {
  Scalar alpha = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < k.orthant; ++i)
    if (du(i) < 0) alpha = std::min(alpha, -u(i) / du(i));
  int off = k.orthant;
  for (int q : k.soc) {
    const auto us = u.segment(off, q);
    const auto ds = du.segment(off, q);
    // f(a) = (u0 + a d0)^2 - ||u1 + a d1||^2 = qa a^2 + 2 qb a + qc, qc > 0.
    const Scalar qa = ds(0) * ds(0) - ds.tail(q - 1).squaredNorm();
    const Scalar qb = us(0) * ds(0) - us.tail(q - 1).dot(ds.tail(q - 1));
    const Scalar qc = std::max(Scalar(0), us(0) * us(0) - us.tail(q - 1).squaredNorm());
    Scalar root = std::numeric_limits<Scalar>::infinity();
    const Scalar scale = std::max({std::abs(qa), std::abs(qb), Scalar(1e-300)});
    if (std::abs(qa) <= Scalar(1e-14) * scale) {
      if (qb < 0) root = -qc / (Scalar(2) * qb);
    } else {
      const Scalar disc = qb * qb - qa * qc;
      if (disc >= 0) {
        const Scalar sq = std::sqrt(disc);
        const Scalar t = -(qb + (qb >= 0 ? sq : -sq));
        const Scalar r1 = t / qa;
        const Scalar r2 = t != 0 ? qc / t : std::numeric_limits<Scalar>::infinity();
        for (Scalar r : {r1, r2})
          if (r > 0) root = std::min(root, r);
      }
    }
    // The lower nappe is reached only through f = 0, but guard u0 as well.
    if (ds(0) < 0) root = std::min(root, us(0) / -ds(0));
    alpha = std::min(alpha, root);
    off += q;
  }
  return alpha;
}

// Nesterov-Todd scaling W (symmetric, block diagonal) with W z = W^{-1} s = lambda.
template <typename Scalar>
class NtScaling {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  NtScaling() = default;

  // Returns false when s or z has left the interior of K.
  bool compute(const ConeLayout& k, const Vec& s, const Vec& z) {
    layout_ = k;
    diag_.resize(k.orthant);
    lambda_.resize(s.size());
    for (int i = 0; i < k.orthant; ++i) {
      if (!(s(i) > 0 && z(i) > 0)) return false;
      diag_(i) = std::sqrt(s(i) / z(i));
      lambda_(i) = std::sqrt(s(i) * z(i));
    }
    blocks_.resize(k.soc.size());
    inverse_blocks_.resize(k.soc.size());
    int off = k.orthant;
    for (size_t c = 0; c < k.soc.size(); ++c) {
      const int q = k.soc[c];
      const Vec ss = s.segment(off, q);
      const Vec zs = z.segment(off, q);
      const Scalar s_res = ss(0) * ss(0) - ss.tail(q - 1).squaredNorm();
      const Scalar z_res = zs(0) * zs(0) - zs.tail(q - 1).squaredNorm();
      if (!(s_res > 0 && z_res > 0 && ss(0) > 0 && zs(0) > 0)) return false;
      const Vec sb = ss / std::sqrt(s_res);
      const Vec zb = zs / std::sqrt(z_res);
      const Scalar gamma = std::sqrt((Scalar(1) + sb.dot(zb)) / Scalar(2));
      Vec w(q);
      w(0) = (sb(0) + zb(0)) / (Scalar(2) * gamma);
      w.tail(q - 1) = (sb.tail(q - 1) - zb.tail(q - 1)) / (Scalar(2) * gamma);
      const Scalar eta = std::sqrt(std::sqrt(s_res / z_res));
      Mat wm(q, q);
      Mat wi(q, q);
      const auto w1 = w.tail(q - 1);
      wm(0, 0) = w(0);
      wm.block(0, 1, 1, q - 1) = w1.transpose();
      wm.block(1, 0, q - 1, 1) = w1;
      wm.block(1, 1, q - 1, q - 1) = Mat::Identity(q - 1, q - 1) + w1 * w1.transpose() / (Scalar(1) + w(0));
      wi = wm;
      wi.block(0, 1, 1, q - 1) *= Scalar(-1);
      wi.block(1, 0, q - 1, 1) *= Scalar(-1);
      blocks_[c] = eta * wm;
      inverse_blocks_[c] = wi / eta;
      lambda_.segment(off, q) = blocks_[c] * zs;
      off += q;
    }
    return true;
  }

  Vec apply(const Vec& v) const { return apply_impl(v, false); }
  Vec apply_inverse(const Vec& v) const { return apply_impl(v, true); }

  const Vec& lambda() const { return lambda_; }
  const Vec& orthant_diag() const { return diag_; }
  const std::vector<Mat>& blocks() const { return blocks_; }

 private:
  Vec apply_impl(const Vec& v, bool inverse) const {
    Vec out(v.size());
    if (inverse)
      out.head(layout_.orthant) = v.head(layout_.orthant).cwiseQuotient(diag_);
    else
      out.head(layout_.orthant) = v.head(layout_.orthant).cwiseProduct(diag_);
    int off = layout_.orthant;
    for (size_t c = 0; c < layout_.soc.size(); ++c) {
      const int q = layout_.soc[c];
      out.segment(off, q) = (inverse ? inverse_blocks_[c] : blocks_[c]) * v.segment(off, q);
      off += q;
    }
    return out;
  }

  ConeLayout layout_;
  Vec diag_;
  Vec lambda_;
  std::vector<Mat> blocks_;
  std::vector<Mat> inverse_blocks_;
};

}  // namespace errplan
