#pragma once

// The cone {(h, sigma) : sigma >= 0, h >= -H(G(sigma)) + H(Z(sigma))} with
// barrier f = -log(u) - logdet(sigma), u = h + H(G(sigma)) - H(Z(sigma)).
//
// Both maps are split into output blocks on construction (see
// split_output_blocks), so entropies and their derivatives are evaluated block
// by block. G may be the identity, which is recognised and served from the
// eigendecomposition of sigma itself, or absent (pure logdet cone, u = h).

#include <memory>
#include <optional>
#include <vector>

#include "qkdrate/cone.hpp"
#include "qkdrate/entropy_kernel.hpp"
#include "qkdrate/herm_vec.hpp"

namespace qkdrate {

template <typename T>
struct QkdPoint {
  RealOf<T> h{0};
  Mat<T> sigma;
};

template <typename T>
struct BarrierState {
  RealOf<T> u{0};
  RealOf<T> logdet_sigma{0};
  EigDecomposition<T> eig_sigma;
  Mat<T> sigma_inv;
  std::vector<EigDecomposition<T>> eig_g;  // per G block; empty when G is identity or absent
  std::vector<EigDecomposition<T>> eig_z;  // per Z block
  std::vector<Mat<RealOf<T>>> gamma1_g;
  std::vector<Mat<RealOf<T>>> gamma1_z;
  Mat<RealOf<T>> gamma1_sigma;  // filled when G is the identity
  Mat<T> grad_u;
};

enum class GhatKind { identity, none, general };

template <typename T>
class QkdCone {
 public:
  using Real = RealOf<T>;

  QkdCone(KrausMap<T> ghat, KrausMap<T> zhat);
  /// u = h: the epigraph of -logdet with one extra log term.
  static QkdCone pure_logdet(Index side_dim);

  Index side_dim() const { return n_; }
  Index dim() const { return 1 + svec_length(n_, field_mode_of<T>()); }
  Real nu() const { return Real(n_ + 1); }
  GhatKind ghat_kind() const { return gkind_; }
  const KrausMap<T>& ghat() const { return ghat_; }
  const KrausMap<T>& zhat() const { return zhat_; }
  const std::vector<KrausMap<T>>& ghat_blocks() const { return gblocks_; }
  const std::vector<KrausMap<T>>& zhat_blocks() const { return zblocks_; }

  /// -H(G(sigma)) + H(Z(sigma)) for sigma >= 0.
  Real entropy_gap(const Mat<T>& sigma) const;

  std::optional<BarrierState<T>> is_interior(const QkdPoint<T>& p) const;
  Real barrier(const BarrierState<T>& s, const QkdPoint<T>& p) const;
  QkdPoint<T> gradient(const BarrierState<T>& s, const QkdPoint<T>& p) const;
  QkdPoint<T> hessian_apply(const BarrierState<T>& s, const QkdPoint<T>& p, const QkdPoint<T>& dir) const;
  QkdPoint<T> third_order_dir(const BarrierState<T>& s, const QkdPoint<T>& p, const QkdPoint<T>& dir) const;
  QkdPoint<T> initial_point() const;

  /// Second derivative of u along xi (as a matrix), and its contraction.
  Mat<T> hess_u(const BarrierState<T>& s, const Mat<T>& xi) const;

  Vec<Real> to_vector(const QkdPoint<T>& p) const;
  QkdPoint<T> from_vector(const Eigen::Ref<const Vec<Real>>& v) const;

 private:
  QkdCone() = default;

  Index n_ = 0;
  GhatKind gkind_ = GhatKind::none;
  KrausMap<T> ghat_;
  KrausMap<T> zhat_;
  std::vector<KrausMap<T>> gblocks_;
  std::vector<KrausMap<T>> zblocks_;
};

enum class InverseHessianMode { automatic, dense };

/// Vector-level oracle over x = (h, svec sigma).
template <typename T>
class QkdConeOracle final : public Cone<RealOf<T>> {
 public:
  using Real = RealOf<T>;

  explicit QkdConeOracle(QkdCone<T> cone, InverseHessianMode mode = InverseHessianMode::automatic);
  ~QkdConeOracle() override;

  const QkdCone<T>& cone() const { return cone_; }
  bool structured_inverse() const;

  ConeKind kind() const override { return ConeKind::qkd; }
  Index dim() const override { return cone_.dim(); }
  Real nu() const override { return cone_.nu(); }
  Vec<Real> initial_point() const override;
  bool set_point(const Vec<Real>& x) override;
  bool has_point() const override { return state_.has_value(); }
  Real barrier() const override;
  Vec<Real> gradient() const override;
  Mat<Real> hess_prod(const Mat<Real>& d) const override;
  Mat<Real> inv_hess_prod(const Mat<Real>& d) const override;
  bool has_third_order() const override { return true; }
  Vec<Real> third_order(const Vec<Real>& d) const override;

 private:
  struct Factor;
  const BarrierState<T>& state() const;
  const Factor& factor() const;

  QkdCone<T> cone_;
  InverseHessianMode mode_;
  QkdPoint<T> point_;
  std::optional<BarrierState<T>> state_;
  mutable std::unique_ptr<Factor> factor_;
};

}  // namespace qkdrate
