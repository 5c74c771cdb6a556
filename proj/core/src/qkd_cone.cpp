#include "qkdrate/qkd_cone.hpp"

#include <cmath>
#include <string>

#include "instantiate.hpp"

namespace qkdrate {

namespace {

template <typename T>
void require_full_range(const std::vector<KrausMap<T>>& blocks, const char* which) {
  using Real = RealOf<T>;
  using std::sqrt;
  for (const auto& b : blocks) {
    const Mat<T> image = b.apply(Mat<T>::Identity(b.in_dim(), b.in_dim()));
    const Vec<Real> l = eig_hermitian<T>(image).lambda;
    const Real tol = Real(b.out_dim()) * sqrt(machine_epsilon<Real>()) * l.maxCoeff();
    if (!(l.minCoeff() > tol))
      throw DomainError(std::string("qkd cone: ") + which +
                        " does not have full-rank range; restrict it to its range first");
  }
}

}  // namespace

template <typename T>
QkdCone<T>::QkdCone(KrausMap<T> ghat, KrausMap<T> zhat) : ghat_(std::move(ghat)), zhat_(std::move(zhat)) {
  if (ghat_.empty() && zhat_.empty()) throw DimensionError("qkd cone: both maps are empty; use pure_logdet");
  n_ = ghat_.empty() ? zhat_.in_dim() : ghat_.in_dim();
  if (!zhat_.empty() && zhat_.in_dim() != n_) throw DimensionError("qkd cone: G and Z input dimensions differ");
  if (ghat_.empty()) {
    gkind_ = GhatKind::none;
  } else if (is_identity_map(ghat_, Real(0))) {
    gkind_ = GhatKind::identity;
  } else {
    gkind_ = GhatKind::general;
    gblocks_ = split_output_blocks(ghat_);
    require_full_range(gblocks_, "G");
  }
  if (!zhat_.empty()) {
    zblocks_ = split_output_blocks(zhat_);
    require_full_range(zblocks_, "Z");
  }
}

template <typename T>
QkdCone<T> QkdCone<T>::pure_logdet(Index side_dim) {
  if (side_dim <= 0) throw DimensionError("pure_logdet: side dimension must be positive");
  QkdCone<T> c;
  c.n_ = side_dim;
  c.gkind_ = GhatKind::none;
  return c;
}

template <typename T>
RealOf<T> QkdCone<T>::entropy_gap(const Mat<T>& sigma) const {
  Real gap(0);
  if (gkind_ == GhatKind::identity) gap -= entropy<T>(sigma);
  for (const auto& b : gblocks_) gap -= entropy<T>(b.apply(sigma));
  for (const auto& b : zblocks_) gap += entropy<T>(b.apply(sigma));
  return gap;
}

template <typename T>
std::optional<BarrierState<T>> QkdCone<T>::is_interior(const QkdPoint<T>& p) const {
  using std::abs;
  using std::isfinite;
  using std::log;
  if (p.sigma.rows() != n_ || p.sigma.cols() != n_) throw DimensionError("qkd cone: point has wrong dimension");
  if (!p.sigma.allFinite() || !isfinite(p.h)) return std::nullopt;
  const Real eps = machine_epsilon<Real>();

  BarrierState<T> s;
  s.eig_sigma = eig_hermitian<T>(p.sigma);
  const Vec<Real>& lam = s.eig_sigma.lambda;
  const Real lmax = lam.maxCoeff();
  if (!(lmax > 0) || !(lam.minCoeff() > Real(n_) * eps * lmax)) return std::nullopt;

  const Mat<T> eye = Mat<T>::Identity(n_, n_);
  Real u = p.h;
  Mat<T> grad = Mat<T>::Zero(n_, n_);

  auto spectral_part = [&](const EigDecomposition<T>& e, Real sign) -> bool {
    if (!(e.lambda.minCoeff() > Real(e.dim()) * eps * e.lambda.maxCoeff())) return false;
    u -= sign * entropy_of_spectrum<Real>(e.lambda);
    return true;
  };

  if (gkind_ == GhatKind::identity) {
    spectral_part(s.eig_sigma, Real(-1));
    s.gamma1_sigma = gamma1<Real>(lam);
    grad -= eye + log_hermitian<T>(s.eig_sigma);
  }
  for (const auto& b : gblocks_) {
    auto e = eig_hermitian<T>(b.apply(p.sigma));
    if (!spectral_part(e, Real(-1))) return std::nullopt;
    const Index d = b.out_dim();
    grad -= b.adjoint_apply(Mat<T>::Identity(d, d) + log_hermitian<T>(e));
    s.gamma1_g.push_back(gamma1<Real>(e.lambda));
    s.eig_g.push_back(std::move(e));
  }
  for (const auto& b : zblocks_) {
    auto e = eig_hermitian<T>(b.apply(p.sigma));
    if (!spectral_part(e, Real(1))) return std::nullopt;
    const Index d = b.out_dim();
    grad += b.adjoint_apply(Mat<T>::Identity(d, d) + log_hermitian<T>(e));
    s.gamma1_z.push_back(gamma1<Real>(e.lambda));
    s.eig_z.push_back(std::move(e));
  }
  if (!(u > eps * (Real(1) + abs(p.h)))) return std::nullopt;

  s.u = u;
  s.grad_u = hermitian_part<T>(grad);
  Vec<T> inv(n_);
  s.logdet_sigma = Real(0);
  for (Index i = 0; i < n_; ++i) {
    inv(i) = T(Real(1) / lam(i));
    s.logdet_sigma += log(lam(i));
  }
  s.sigma_inv = s.eig_sigma.U * inv.asDiagonal() * s.eig_sigma.U.adjoint();
  return s;
}

template <typename T>
RealOf<T> QkdCone<T>::barrier(const BarrierState<T>& s, const QkdPoint<T>&) const {
  using std::log;
  return -log(s.u) - s.logdet_sigma;
}

template <typename T>
QkdPoint<T> QkdCone<T>::gradient(const BarrierState<T>& s, const QkdPoint<T>&) const {
  QkdPoint<T> g;
  g.h = Real(-1) / s.u;
  g.sigma = -s.grad_u / s.u - s.sigma_inv;
  return g;
}

template <typename T>
Mat<T> QkdCone<T>::hess_u(const BarrierState<T>& s, const Mat<T>& xi) const {
  Mat<T> out = Mat<T>::Zero(n_, n_);
  if (gkind_ == GhatKind::identity) out -= dlog<T>(s.eig_sigma, s.gamma1_sigma, xi);
  for (std::size_t b = 0; b < gblocks_.size(); ++b)
    out -= gblocks_[b].adjoint_apply(dlog<T>(s.eig_g[b], s.gamma1_g[b], gblocks_[b].apply(xi)));
  for (std::size_t b = 0; b < zblocks_.size(); ++b)
    out += zblocks_[b].adjoint_apply(dlog<T>(s.eig_z[b], s.gamma1_z[b], zblocks_[b].apply(xi)));
  return out;
}

template <typename T>
QkdPoint<T> QkdCone<T>::hessian_apply(const BarrierState<T>& s, const QkdPoint<T>&, const QkdPoint<T>& dir) const {
  const Real u = s.u;
  const Real t = dir.h + inner<T>(s.grad_u, dir.sigma);
  QkdPoint<T> out;
  out.h = t / (u * u);
  out.sigma = (t / (u * u)) * s.grad_u - hess_u(s, dir.sigma) / u + s.sigma_inv * dir.sigma * s.sigma_inv;
  out.sigma = hermitian_part<T>(out.sigma);
  return out;
}

template <typename T>
QkdPoint<T> QkdCone<T>::third_order_dir(const BarrierState<T>& s, const QkdPoint<T>&, const QkdPoint<T>& dir) const {
  const Real u = s.u;
  const Mat<T>& xi = dir.sigma;
  const Real t = dir.h + inner<T>(s.grad_u, xi);
  const Mat<T> hu = hess_u(s, xi);
  const Real q = inner<T>(hu, xi);

  Mat<T> d3u = Mat<T>::Zero(n_, n_);
  if (gkind_ == GhatKind::identity) {
    const Gamma2Table<Real> g2(s.eig_sigma.lambda, s.gamma1_sigma);
    d3u -= d2log<T>(s.eig_sigma, g2, xi);
  }
  for (std::size_t b = 0; b < gblocks_.size(); ++b) {
    const Gamma2Table<Real> g2(s.eig_g[b].lambda, s.gamma1_g[b]);
    d3u -= gblocks_[b].adjoint_apply(d2log<T>(s.eig_g[b], g2, gblocks_[b].apply(xi)));
  }
  for (std::size_t b = 0; b < zblocks_.size(); ++b) {
    const Gamma2Table<Real> g2(s.eig_z[b].lambda, s.gamma1_z[b]);
    d3u += zblocks_[b].adjoint_apply(d2log<T>(s.eig_z[b], g2, zblocks_[b].apply(xi)));
  }

  const Real u2 = u * u;
  const Real scal = Real(-2) * t * t / (u2 * u) + q / u2;
  QkdPoint<T> out;
  out.h = scal;
  const Mat<T> sx = s.sigma_inv * xi;
  out.sigma = scal * s.grad_u + (Real(2) * t / u2) * hu - d3u / u - Real(2) * sx * sx * s.sigma_inv;
  out.sigma = hermitian_part<T>(out.sigma);
  return out;
}

template <typename T>
QkdPoint<T> QkdCone<T>::initial_point() const {
  using std::sqrt;
  QkdPoint<T> p;
  p.sigma = Mat<T>::Identity(n_, n_);
  const Real d = entropy_gap(p.sigma);
  p.h = d / Real(2) + sqrt(Real(1) + d * d / Real(4));
  return p;
}

template <typename T>
Vec<RealOf<T>> QkdCone<T>::to_vector(const QkdPoint<T>& p) const {
  Vec<Real> v(dim());
  v(0) = p.h;
  v.tail(dim() - 1) = svec<T>(p.sigma);
  return v;
}

template <typename T>
QkdPoint<T> QkdCone<T>::from_vector(const Eigen::Ref<const Vec<Real>>& v) const {
  if (v.size() != dim()) throw DimensionError("qkd cone: vector has wrong length");
  QkdPoint<T> p;
  p.h = v(0);
  p.sigma = smat<T>(v.tail(dim() - 1));
  return p;
}

// ---------------------------------------------------------------------------

template <typename T>
struct QkdConeOracle<T>::Factor {
  bool structured = false;
  Eigen::LLT<Mat<Real>> dense;
  // Structured inverse in the eigenbasis of sigma.
  Mat<T> U;
  Vec<Real> w;
  Mat<Real> R;
  Eigen::LDLT<Mat<Real>> K;
  Vec<Real> grad_u;
  Real u{0};
};

template <typename T>
QkdConeOracle<T>::QkdConeOracle(QkdCone<T> cone, InverseHessianMode mode) : cone_(std::move(cone)), mode_(mode) {}

template <typename T>
QkdConeOracle<T>::~QkdConeOracle() = default;

template <typename T>
bool QkdConeOracle<T>::structured_inverse() const {
  return mode_ == InverseHessianMode::automatic && cone_.ghat_kind() != GhatKind::general;
}

template <typename T>
Vec<RealOf<T>> QkdConeOracle<T>::initial_point() const {
  return cone_.to_vector(cone_.initial_point());
}

template <typename T>
bool QkdConeOracle<T>::set_point(const Vec<Real>& x) {
  factor_.reset();
  point_ = cone_.from_vector(x);
  state_ = cone_.is_interior(point_);
  return state_.has_value();
}

template <typename T>
const BarrierState<T>& QkdConeOracle<T>::state() const {
  if (!state_) throw ContractViolation("qkd cone: derivative requested without an interior point");
  return *state_;
}

template <typename T>
RealOf<T> QkdConeOracle<T>::barrier() const {
  return cone_.barrier(state(), point_);
}

template <typename T>
Vec<RealOf<T>> QkdConeOracle<T>::gradient() const {
  return cone_.to_vector(cone_.gradient(state(), point_));
}

template <typename T>
Mat<RealOf<T>> QkdConeOracle<T>::hess_prod(const Mat<Real>& d) const {
  const auto& s = state();
  Mat<Real> out(d.rows(), d.cols());
  for (Index j = 0; j < d.cols(); ++j) {
    const Vec<Real> col = d.col(j);
    out.col(j) = cone_.to_vector(cone_.hessian_apply(s, point_, cone_.from_vector(col)));
  }
  return out;
}

template <typename T>
Vec<RealOf<T>> QkdConeOracle<T>::third_order(const Vec<Real>& d) const {
  return cone_.to_vector(cone_.third_order_dir(state(), point_, cone_.from_vector(d)));
}

template <typename T>
const typename QkdConeOracle<T>::Factor& QkdConeOracle<T>::factor() const {
  if (factor_) return *factor_;
  const auto& s = state();
  auto f = std::make_unique<Factor>();
  constexpr FieldMode mode = field_mode_of<T>();
  if (!structured_inverse()) {
    f->dense.compute(this->hessian());
    if (f->dense.info() != Eigen::Success) throw NumericalError("qkd cone: Hessian is not numerically positive definite");
    factor_ = std::move(f);
    return *factor_;
  }
  const Index n = cone_.side_dim();
  const Vec<Real>& lam = s.eig_sigma.lambda;
  Mat<Real> wm(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      wm(i, j) = Real(1) / (lam(i) * lam(j));
      if (cone_.ghat_kind() == GhatKind::identity) wm(i, j) += s.gamma1_sigma(i, j) / s.u;
    }
  f->structured = true;
  f->U = s.eig_sigma.U;
  f->w = svec_weights<Real>(wm, mode);
  f->u = s.u;
  f->grad_u = svec<T>(s.grad_u);

  const auto& zb = cone_.zhat_blocks();
  Index rows = 0;
  for (const auto& b : zb) rows += svec_length(b.out_dim(), mode);
  if (rows > 0) {
    const Index ns = svec_length(n, mode);
    f->R = Mat<Real>::Zero(rows, ns);
    Vec<Real> gam(rows);
    Index off = 0;
    for (std::size_t b = 0; b < zb.size(); ++b) {
      const Index len = svec_length(zb[b].out_dim(), mode);
      for (const auto& op : zb[b].operators()) {
        const Mat<T> rotated = s.eig_z[b].U.adjoint() * op * f->U;
        f->R.middleRows(off, len) += skron<T>(rotated).matrix;
      }
      gam.segment(off, len) = svec_weights<Real>(s.gamma1_z[b], mode);
      off += len;
    }
    Mat<Real> k = -(f->R * f->w.cwiseInverse().asDiagonal() * f->R.transpose());
    k.diagonal() += s.u * gam.cwiseInverse();
    f->K.compute(k);
    if (f->K.info() != Eigen::Success) throw NumericalError("qkd cone: reduced Hessian factorization failed");
  }
  factor_ = std::move(f);
  return *factor_;
}

template <typename T>
Mat<RealOf<T>> QkdConeOracle<T>::inv_hess_prod(const Mat<Real>& d) const {
  const Factor& f = factor();
  if (!f.structured) return f.dense.solve(d);
  const Index ns = d.rows() - 1;
  Mat<Real> out(d.rows(), d.cols());
  for (Index j = 0; j < d.cols(); ++j) {
    const Real rh = d(0, j);
    const Vec<Real> rs = d.col(j).tail(ns) - rh * f.grad_u;
    Vec<Real> y = svec<T>(f.U.adjoint() * smat<T>(rs) * f.U);
    y.array() /= f.w.array();
    if (f.R.rows() > 0) {
      const Vec<Real> z = f.K.solve(f.R * y);
      y += (f.R.transpose() * z).cwiseQuotient(f.w);
    }
    const Vec<Real> ds = svec<T>(f.U * smat<T>(y) * f.U.adjoint());
    out(0, j) = f.u * f.u * rh - f.grad_u.dot(ds);
    out.col(j).tail(ns) = ds;
  }
  return out;
}

#define QKDRATE_INSTANTIATE(T)   \
  template class QkdCone<T>;     \
  template class QkdConeOracle<T>;
QKDRATE_FOR_EACH_ENTRY(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

}  // namespace qkdrate
