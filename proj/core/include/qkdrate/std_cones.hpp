#pragma once

// Companion cones and the cone descriptors used in problems.
//
//   nonneg        x >= 0,                       f = -sum log x_i,          nu = len
//   second_order  (t, x) with t >= |x|,         f = -log(t^2 - |x|^2),     nu = 2
//   rel_entropy   (h, X, Y) with h >= D(X||Y),  f = -log(h - D) - logdet X - logdet Y,
//                                               nu = 1 + 2n
//   qkd           see qkd_cone.hpp

#include <memory>
#include <optional>

#include "qkdrate/cone.hpp"
#include "qkdrate/entropy_kernel.hpp"
#include "qkdrate/herm_vec.hpp"
#include "qkdrate/qkd_cone.hpp"

namespace qkdrate {

template <typename Real>
bool soc_is_interior(const Vec<Real>& v);

template <typename Real>
class NonnegCone final : public Cone<Real> {
 public:
  explicit NonnegCone(Index n);
  ConeKind kind() const override { return ConeKind::nonneg; }
  Index dim() const override { return n_; }
  Real nu() const override { return Real(n_); }
  Vec<Real> initial_point() const override { return Vec<Real>::Ones(n_); }
  bool set_point(const Vec<Real>& x) override;
  bool has_point() const override { return ok_; }
  Real barrier() const override;
  Vec<Real> gradient() const override;
  Mat<Real> hess_prod(const Mat<Real>& d) const override;
  Mat<Real> inv_hess_prod(const Mat<Real>& d) const override;
  bool has_third_order() const override { return true; }
  Vec<Real> third_order(const Vec<Real>& d) const override;
  Real max_step(const Vec<Real>& x, const Vec<Real>& d) const override;

 private:
  Index n_;
  Vec<Real> x_;
  bool ok_ = false;
};

template <typename Real>
class SecondOrderCone final : public Cone<Real> {
 public:
  explicit SecondOrderCone(Index n);
  ConeKind kind() const override { return ConeKind::second_order; }
  Index dim() const override { return n_; }
  Real nu() const override { return Real(2); }
  Vec<Real> initial_point() const override;
  bool set_point(const Vec<Real>& x) override;
  bool has_point() const override { return ok_; }
  Real barrier() const override;
  Vec<Real> gradient() const override;
  Mat<Real> hess_prod(const Mat<Real>& d) const override;
  Mat<Real> inv_hess_prod(const Mat<Real>& d) const override;
  bool has_third_order() const override { return true; }
  Vec<Real> third_order(const Vec<Real>& d) const override;
  Real max_step(const Vec<Real>& x, const Vec<Real>& d) const override;

 private:
  Vec<Real> jmul(const Vec<Real>& v) const;

  Index n_;
  Vec<Real> x_;
  Real disc_{0};  // t^2 - |x|^2
  bool ok_ = false;
};

template <typename T>
struct RelEntropyPoint {
  RealOf<T> h{0};
  Mat<T> X;
  Mat<T> Y;
};

template <typename T>
struct RelEntropyState {
  RealOf<T> u{0};
  RealOf<T> logdet{0};  // logdet X + logdet Y
  EigDecomposition<T> eig_x, eig_y;
  Mat<RealOf<T>> gamma1_x, gamma1_y;
  std::optional<Gamma2Table<RealOf<T>>> gamma2_y;
  Mat<T> x_inv, y_inv;
  Mat<T> grad_x, grad_y;  // gradient of u = h - D(X||Y) in X and Y
};

/// Relative entropy cone on pairs of n x n matrices; dense derivatives only.
template <typename T>
class RelEntropyCone {
 public:
  using Real = RealOf<T>;

  explicit RelEntropyCone(Index side_dim);

  Index side_dim() const { return n_; }
  Index dim() const { return 1 + 2 * svec_length(n_, field_mode_of<T>()); }
  Real nu() const { return Real(1 + 2 * n_); }

  /// D(X||Y) = tr X (log X - log Y), natural log.
  static Real relative_entropy(const Mat<T>& x, const Mat<T>& y);

  std::optional<RelEntropyState<T>> is_interior(const RelEntropyPoint<T>& p) const;
  Real barrier(const RelEntropyState<T>& s) const;
  RelEntropyPoint<T> gradient(const RelEntropyState<T>& s) const;
  RelEntropyPoint<T> hessian_apply(const RelEntropyState<T>& s, const RelEntropyPoint<T>& p,
                                   const RelEntropyPoint<T>& dir) const;
  /// hessian_apply without the rank-one term in the gradient of h - D; the h
  /// component of `dir` is ignored.
  RelEntropyPoint<T> curvature_apply(const RelEntropyState<T>& s, const RelEntropyPoint<T>& p,
                                     const RelEntropyPoint<T>& dir) const;
  RelEntropyPoint<T> initial_point() const;

  Vec<Real> to_vector(const RelEntropyPoint<T>& p) const;
  RelEntropyPoint<T> from_vector(const Eigen::Ref<const Vec<Real>>& v) const;

 private:
  Index n_;
};

template <typename T>
class RelEntropyConeOracle final : public Cone<RealOf<T>> {
 public:
  using Real = RealOf<T>;

  explicit RelEntropyConeOracle(Index side_dim) : cone_(side_dim) {}
  const RelEntropyCone<T>& cone() const { return cone_; }

  ConeKind kind() const override { return ConeKind::rel_entropy; }
  Index dim() const override { return cone_.dim(); }
  Real nu() const override { return cone_.nu(); }
  Vec<Real> initial_point() const override { return cone_.to_vector(cone_.initial_point()); }
  bool set_point(const Vec<Real>& x) override;
  bool has_point() const override { return state_.has_value(); }
  Real barrier() const override;
  Vec<Real> gradient() const override;
  Mat<Real> hess_prod(const Mat<Real>& d) const override;
  Mat<Real> inv_hess_prod(const Mat<Real>& d) const override;

 private:
  const RelEntropyState<T>& state() const;

  RelEntropyCone<T> cone_;
  RelEntropyPoint<T> point_;
  std::optional<RelEntropyState<T>> state_;
  mutable std::optional<Eigen::LLT<Mat<Real>>> factor_;  // of the (X, Y) curvature
  mutable Vec<Real> grad_d_;
};

/// Serializable description of one cone block of a problem.
template <typename T>
struct ConeDescriptor {
  ConeKind kind = ConeKind::nonneg;
  Index size = 0;      // vector length for nonneg / second_order
  Index side_dim = 0;  // matrix side for rel_entropy / qkd
  KrausMap<T> ghat;    // qkd only; both maps empty means the pure logdet cone
  KrausMap<T> zhat;

  static ConeDescriptor nonneg(Index n);
  static ConeDescriptor second_order(Index n);
  static ConeDescriptor rel_entropy(Index side);
  static ConeDescriptor qkd(KrausMap<T> ghat, KrausMap<T> zhat);
  static ConeDescriptor pure_logdet(Index side);

  Index dim() const;
  RealOf<T> nu() const;
};

template <typename T>
std::unique_ptr<Cone<RealOf<T>>> make_cone(const ConeDescriptor<T>& desc,
                                           InverseHessianMode mode = InverseHessianMode::automatic);

}  // namespace qkdrate
