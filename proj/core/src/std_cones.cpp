#include "qkdrate/std_cones.hpp"

#include <array>
#include <cmath>

#include "instantiate.hpp"

namespace qkdrate {

template <typename Real>
bool soc_is_interior(const Vec<Real>& v) {
  if (v.size() < 2) throw DimensionError("second-order cone needs length >= 2");
  return v(0) > v.tail(v.size() - 1).norm();
}

// --- nonneg ----------------------------------------------------------------

template <typename Real>
NonnegCone<Real>::NonnegCone(Index n) : n_(n) {
  if (n <= 0) throw DimensionError("nonneg cone: length must be positive");
}

template <typename Real>
bool NonnegCone<Real>::set_point(const Vec<Real>& x) {
  if (x.size() != n_) throw DimensionError("nonneg cone: wrong length");
  x_ = x;
  ok_ = (x.array() > Real(0)).all() && x.allFinite();
  return ok_;
}

template <typename Real>
Real NonnegCone<Real>::barrier() const {
  if (!ok_) throw ContractViolation("nonneg cone: no interior point");
  using std::log;
  Real f(0);
  for (Index i = 0; i < n_; ++i) f -= log(x_(i));
  return f;
}

template <typename Real>
Vec<Real> NonnegCone<Real>::gradient() const {
  if (!ok_) throw ContractViolation("nonneg cone: no interior point");
  return -x_.cwiseInverse();
}

template <typename Real>
Mat<Real> NonnegCone<Real>::hess_prod(const Mat<Real>& d) const {
  if (!ok_) throw ContractViolation("nonneg cone: no interior point");
  return x_.array().square().inverse().matrix().asDiagonal() * d;
}

template <typename Real>
Mat<Real> NonnegCone<Real>::inv_hess_prod(const Mat<Real>& d) const {
  if (!ok_) throw ContractViolation("nonneg cone: no interior point");
  return x_.array().square().matrix().asDiagonal() * d;
}

template <typename Real>
Vec<Real> NonnegCone<Real>::third_order(const Vec<Real>& d) const {
  if (!ok_) throw ContractViolation("nonneg cone: no interior point");
  return Real(-2) * d.array().square() / x_.array().cube();
}

template <typename Real>
Real NonnegCone<Real>::max_step(const Vec<Real>& x, const Vec<Real>& d) const {
  Real a = std::numeric_limits<Real>::infinity();
  for (Index i = 0; i < n_; ++i)
    if (d(i) < 0) a = std::min(a, -x(i) / d(i));
  return a;
}

// --- second order ------------------------------------------------------------

template <typename Real>
SecondOrderCone<Real>::SecondOrderCone(Index n) : n_(n) {
  if (n < 2) throw DimensionError("second-order cone needs length >= 2");
}

template <typename Real>
Vec<Real> SecondOrderCone<Real>::initial_point() const {
  using std::sqrt;
  Vec<Real> v = Vec<Real>::Zero(n_);
  v(0) = sqrt(Real(2));
  return v;
}

template <typename Real>
Vec<Real> SecondOrderCone<Real>::jmul(const Vec<Real>& v) const {
  Vec<Real> out = -v;
  out(0) = v(0);
  return out;
}

template <typename Real>
bool SecondOrderCone<Real>::set_point(const Vec<Real>& x) {
  if (x.size() != n_) throw DimensionError("second-order cone: wrong length");
  x_ = x;
  ok_ = x.allFinite() && soc_is_interior<Real>(x);
  if (ok_) {
    const Real r = x.tail(n_ - 1).norm();
    disc_ = (x(0) - r) * (x(0) + r);
    ok_ = disc_ > Real(0);
  }
  return ok_;
}

template <typename Real>
Real SecondOrderCone<Real>::barrier() const {
  if (!ok_) throw ContractViolation("second-order cone: no interior point");
  using std::log;
  return -log(disc_);
}

template <typename Real>
Vec<Real> SecondOrderCone<Real>::gradient() const {
  if (!ok_) throw ContractViolation("second-order cone: no interior point");
  return Real(-2) * jmul(x_) / disc_;
}

template <typename Real>
Mat<Real> SecondOrderCone<Real>::hess_prod(const Mat<Real>& d) const {
  if (!ok_) throw ContractViolation("second-order cone: no interior point");
  const Vec<Real> jv = jmul(x_);
  Mat<Real> out(d.rows(), d.cols());
  for (Index c = 0; c < d.cols(); ++c) {
    const Vec<Real> dc = d.col(c);
    out.col(c) = Real(-2) * jmul(dc) / disc_ + (Real(4) * jv.dot(dc) / (disc_ * disc_)) * jv;
  }
  return out;
}

template <typename Real>
Mat<Real> SecondOrderCone<Real>::inv_hess_prod(const Mat<Real>& d) const {
  if (!ok_) throw ContractViolation("second-order cone: no interior point");
  Mat<Real> out(d.rows(), d.cols());
  for (Index c = 0; c < d.cols(); ++c) {
    const Vec<Real> dc = d.col(c);
    out.col(c) = x_.dot(dc) * x_ - (disc_ / Real(2)) * jmul(dc);
  }
  return out;
}

template <typename Real>
Vec<Real> SecondOrderCone<Real>::third_order(const Vec<Real>& d) const {
  if (!ok_) throw ContractViolation("second-order cone: no interior point");
  const Vec<Real> jv = jmul(x_), jd = jmul(d);
  const Real vjd = jv.dot(d), djd = jd.dot(d);
  const Real d2 = disc_ * disc_;
  return (Real(8) * vjd / d2) * jd + (Real(4) * djd / d2 - Real(16) * vjd * vjd / (d2 * disc_)) * jv;
}

template <typename Real>
Real SecondOrderCone<Real>::max_step(const Vec<Real>& x, const Vec<Real>& d) const {
  using std::abs;
  using std::sqrt;
  const Real inf = std::numeric_limits<Real>::infinity();
  const Vec<Real> jd = jmul(d);
  const Real a = jd.dot(d);
  const Real b = Real(2) * jd.dot(x);
  const Real c = jmul(x).dot(x);
  if (!(c > 0)) return Real(0);
  if (a == Real(0)) return b < 0 ? -c / b : inf;
  const Real disc = b * b - Real(4) * a * c;
  if (disc < 0) return inf;
  const Real q = Real(-0.5) * (b + (b < 0 ? -sqrt(disc) : sqrt(disc)));
  Real best = inf;
  for (Real r : {q / a, q != Real(0) ? c / q : inf})
    if (r > 0 && r < best) best = r;
  return best;
}

// --- relative entropy --------------------------------------------------------

template <typename T>
RelEntropyCone<T>::RelEntropyCone(Index side_dim) : n_(side_dim) {
  if (side_dim <= 0) throw DimensionError("relative entropy cone: side dimension must be positive");
}

template <typename T>
RealOf<T> RelEntropyCone<T>::relative_entropy(const Mat<T>& x, const Mat<T>& y) {
  const auto ey = eig_hermitian<T>(y);
  if (!(ey.lambda.minCoeff() > 0)) throw DomainError("relative entropy: second argument is not positive definite");
  return -entropy<T>(x) - inner<T>(x, log_hermitian<T>(ey));
}

template <typename T>
std::optional<RelEntropyState<T>> RelEntropyCone<T>::is_interior(const RelEntropyPoint<T>& p) const {
  using std::abs;
  using std::isfinite;
  using std::log;
  if (p.X.rows() != n_ || p.Y.rows() != n_) throw DimensionError("relative entropy cone: wrong dimension");
  if (!p.X.allFinite() || !p.Y.allFinite() || !isfinite(p.h)) return std::nullopt;
  const Real eps = machine_epsilon<Real>();
  RelEntropyState<T> s;
  s.eig_x = eig_hermitian<T>(p.X);
  s.eig_y = eig_hermitian<T>(p.Y);
  for (const auto* e : {&s.eig_x, &s.eig_y}) {
    const Real lmax = e->lambda.maxCoeff();
    if (!(lmax > 0) || !(e->lambda.minCoeff() > Real(n_) * eps * lmax)) return std::nullopt;
  }
  const Mat<T> log_x = log_hermitian<T>(s.eig_x);
  const Mat<T> log_y = log_hermitian<T>(s.eig_y);
  const Real d = inner<T>(p.X, log_x) - inner<T>(p.X, log_y);
  s.u = p.h - d;
  if (!(s.u > eps * (Real(1) + abs(p.h)))) return std::nullopt;
  s.gamma1_x = gamma1<Real>(s.eig_x.lambda);
  s.gamma1_y = gamma1<Real>(s.eig_y.lambda);
  s.gamma2_y.emplace(s.eig_y.lambda, s.gamma1_y);
  s.grad_x = -(log_x + Mat<T>::Identity(n_, n_) - log_y);
  s.grad_y = hermitian_part<T>(dlog<T>(s.eig_y, s.gamma1_y, p.X));
  s.logdet = Real(0);
  Vec<T> ix(n_), iy(n_);
  for (Index i = 0; i < n_; ++i) {
    s.logdet += log(s.eig_x.lambda(i)) + log(s.eig_y.lambda(i));
    ix(i) = T(Real(1) / s.eig_x.lambda(i));
    iy(i) = T(Real(1) / s.eig_y.lambda(i));
  }
  s.x_inv = s.eig_x.U * ix.asDiagonal() * s.eig_x.U.adjoint();
  s.y_inv = s.eig_y.U * iy.asDiagonal() * s.eig_y.U.adjoint();
  return s;
}

template <typename T>
RealOf<T> RelEntropyCone<T>::barrier(const RelEntropyState<T>& s) const {
  using std::log;
  return -log(s.u) - s.logdet;
}

template <typename T>
RelEntropyPoint<T> RelEntropyCone<T>::gradient(const RelEntropyState<T>& s) const {
  RelEntropyPoint<T> g;
  g.h = Real(-1) / s.u;
  g.X = -s.grad_x / s.u - s.x_inv;
  g.Y = -s.grad_y / s.u - s.y_inv;
  return g;
}

template <typename T>
RelEntropyPoint<T> RelEntropyCone<T>::hessian_apply(const RelEntropyState<T>& s, const RelEntropyPoint<T>& p,
                                                    const RelEntropyPoint<T>& dir) const {
  const Real t = dir.h + inner<T>(s.grad_x, dir.X) + inner<T>(s.grad_y, dir.Y);
  const Real c = t / (s.u * s.u);
  RelEntropyPoint<T> out = curvature_apply(s, p, dir);
  out.h = c;
  out.X = hermitian_part<T>(Mat<T>(out.X + c * s.grad_x));
  out.Y = hermitian_part<T>(Mat<T>(out.Y + c * s.grad_y));
  return out;
}

template <typename T>
RelEntropyPoint<T> RelEntropyCone<T>::curvature_apply(const RelEntropyState<T>& s, const RelEntropyPoint<T>& p,
                                                      const RelEntropyPoint<T>& dir) const {
  const Real u = s.u;
  const Mat<T> dly_eta = dlog<T>(s.eig_y, s.gamma1_y, dir.Y);
  const Mat<T> dly_xi = dlog<T>(s.eig_y, s.gamma1_y, dir.X);

  // Mixed second derivative of log at Y applied to (X, eta), in Y's eigenbasis.
  const Mat<T>& U = s.eig_y.U;
  const Mat<T> xt = U.adjoint() * p.X * U;
  const Mat<T> et = U.adjoint() * dir.Y * U;
  const auto& g2 = *s.gamma2_y;
  Mat<T> m(n_, n_);
  for (Index b = 0; b < n_; ++b)
    for (Index a = 0; a < n_; ++a) {
      T acc(0);
      for (Index k = 0; k < n_; ++k) acc += g2(a, b, k) * (xt(a, k) * et(k, b) + et(a, k) * xt(k, b));
      m(a, b) = acc;
    }
  const Mat<T> d2 = U * m * U.adjoint();

  RelEntropyPoint<T> out;
  out.h = Real(0);
  out.X = hermitian_part<T>(Mat<T>((dlog<T>(s.eig_x, s.gamma1_x, dir.X) - dly_eta) / u + s.x_inv * dir.X * s.x_inv));
  out.Y = hermitian_part<T>(Mat<T>(-(dly_xi + d2) / u + s.y_inv * dir.Y * s.y_inv));
  return out;
}

template <typename T>
RelEntropyPoint<T> RelEntropyCone<T>::initial_point() const {
  // Central point of the form (h, a I, b I): solve -g(x) = x in three scalars.
  using std::abs;
  using std::log;
  const double n = static_cast<double>(n_);
  auto residual = [n](const std::array<double, 3>& z) {
    const double h = z[0], a = z[1], b = z[2];
    const double u = h - n * a * std::log(a / b);
    return std::array<double, 3>{h * u - 1.0, -(std::log(a / b) + 1.0) / u + 1.0 / a - a, (a / b) / u + 1.0 / b - b};
  };
  std::array<double, 3> z{1.5, 1.0, 1.0};
  bool converged = false;
  for (int it = 0; it < 100 && !converged; ++it) {
    const auto r = residual(z);
    if (std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]) < 1e-14) {
      converged = true;
      break;
    }
    Eigen::Matrix3d jac;
    for (int j = 0; j < 3; ++j) {
      auto zp = z;
      const double step = 1e-7 * std::max(1.0, std::abs(z[static_cast<std::size_t>(j)]));
      zp[static_cast<std::size_t>(j)] += step;
      const auto rp = residual(zp);
      for (int i = 0; i < 3; ++i) jac(i, j) = (rp[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)]) / step;
    }
    const Eigen::Vector3d dz = jac.fullPivLu().solve(-Eigen::Vector3d(r[0], r[1], r[2]));
    double alpha = 1.0;
    for (; alpha > 1e-6; alpha /= 2) {
      const std::array<double, 3> zn{z[0] + alpha * dz(0), z[1] + alpha * dz(1), z[2] + alpha * dz(2)};
      if (zn[1] > 0 && zn[2] > 0 && zn[0] - n * zn[1] * std::log(zn[1] / zn[2]) > 0) {
        z = zn;
        break;
      }
    }
    if (alpha <= 1e-6) break;
  }
  RelEntropyPoint<T> p;
  if (!converged) z = {2.0, 1.0, 1.0};
  p.h = Real(z[0]);
  p.X = Real(z[1]) * Mat<T>::Identity(n_, n_);
  p.Y = Real(z[2]) * Mat<T>::Identity(n_, n_);
  return p;
}

template <typename T>
Vec<RealOf<T>> RelEntropyCone<T>::to_vector(const RelEntropyPoint<T>& p) const {
  const Index len = svec_length(n_, field_mode_of<T>());
  Vec<Real> v(dim());
  v(0) = p.h;
  v.segment(1, len) = svec<T>(p.X);
  v.tail(len) = svec<T>(p.Y);
  return v;
}

template <typename T>
RelEntropyPoint<T> RelEntropyCone<T>::from_vector(const Eigen::Ref<const Vec<Real>>& v) const {
  if (v.size() != dim()) throw DimensionError("relative entropy cone: vector has wrong length");
  const Index len = svec_length(n_, field_mode_of<T>());
  RelEntropyPoint<T> p;
  p.h = v(0);
  p.X = smat<T>(v.segment(1, len));
  p.Y = smat<T>(v.tail(len));
  return p;
}

template <typename T>
bool RelEntropyConeOracle<T>::set_point(const Vec<Real>& x) {
  factor_.reset();
  point_ = cone_.from_vector(x);
  state_ = cone_.is_interior(point_);
  return state_.has_value();
}

template <typename T>
const RelEntropyState<T>& RelEntropyConeOracle<T>::state() const {
  if (!state_) throw ContractViolation("relative entropy cone: derivative requested without an interior point");
  return *state_;
}

template <typename T>
RealOf<T> RelEntropyConeOracle<T>::barrier() const {
  return cone_.barrier(state());
}

template <typename T>
Vec<RealOf<T>> RelEntropyConeOracle<T>::gradient() const {
  return cone_.to_vector(cone_.gradient(state()));
}

template <typename T>
Mat<RealOf<T>> RelEntropyConeOracle<T>::hess_prod(const Mat<Real>& d) const {
  const auto& s = state();
  Mat<Real> out(d.rows(), d.cols());
  for (Index j = 0; j < d.cols(); ++j) {
    const Vec<Real> col = d.col(j);
    out.col(j) = cone_.to_vector(cone_.hessian_apply(s, point_, cone_.from_vector(col)));
  }
  return out;
}

template <typename T>
Mat<RealOf<T>> RelEntropyConeOracle<T>::inv_hess_prod(const Mat<Real>& d) const {
  // H = g g'/u^2 + M with g = (1, -grad D) and M the (X, Y) curvature, so
  // H (a, z) = (r0, r) gives z = M^-1 (r + r0 grad D), a = u^2 r0 + <grad D, z>.
  // The 1/u^2 term never enters a factorization.
  const auto& s = state();
  const Index m = dim() - 1;
  if (!factor_) {
    Mat<Real> curv(m, m);
    Vec<Real> e = Vec<Real>::Zero(dim());
    for (Index j = 0; j < m; ++j) {
      e.setZero();
      e(1 + j) = Real(1);
      curv.col(j) = cone_.to_vector(cone_.curvature_apply(s, point_, cone_.from_vector(e))).tail(m);
    }
    curv = (curv + curv.transpose()).eval() / Real(2);
    factor_.emplace(curv);
    if (factor_->info() != Eigen::Success) {
      factor_.reset();
      throw NumericalError("relative entropy cone: curvature is not numerically positive definite");
    }
    RelEntropyPoint<T> g;
    g.h = Real(0);
    g.X = -s.grad_x;
    g.Y = -s.grad_y;
    grad_d_ = cone_.to_vector(g).tail(m);
  }
  Mat<Real> out(d.rows(), d.cols());
  for (Index j = 0; j < d.cols(); ++j) {
    const Real r0 = d(0, j);
    const Vec<Real> z = factor_->solve(Vec<Real>(d.col(j).tail(m) + r0 * grad_d_));
    out(0, j) = s.u * s.u * r0 + grad_d_.dot(z);
    out.col(j).tail(m) = z;
  }
  return out;
}

// --- descriptors -------------------------------------------------------------

template <typename T>
ConeDescriptor<T> ConeDescriptor<T>::nonneg(Index n) {
  ConeDescriptor d;
  d.kind = ConeKind::nonneg;
  d.size = n;
  return d;
}

template <typename T>
ConeDescriptor<T> ConeDescriptor<T>::second_order(Index n) {
  ConeDescriptor d;
  d.kind = ConeKind::second_order;
  d.size = n;
  return d;
}

template <typename T>
ConeDescriptor<T> ConeDescriptor<T>::rel_entropy(Index side) {
  ConeDescriptor d;
  d.kind = ConeKind::rel_entropy;
  d.side_dim = side;
  return d;
}

template <typename T>
ConeDescriptor<T> ConeDescriptor<T>::qkd(KrausMap<T> ghat, KrausMap<T> zhat) {
  ConeDescriptor d;
  d.kind = ConeKind::qkd;
  d.side_dim = ghat.empty() ? zhat.in_dim() : ghat.in_dim();
  d.ghat = std::move(ghat);
  d.zhat = std::move(zhat);
  return d;
}

template <typename T>
ConeDescriptor<T> ConeDescriptor<T>::pure_logdet(Index side) {
  ConeDescriptor d;
  d.kind = ConeKind::qkd;
  d.side_dim = side;
  return d;
}

template <typename T>
Index ConeDescriptor<T>::dim() const {
  switch (kind) {
    case ConeKind::nonneg:
    case ConeKind::second_order: return size;
    case ConeKind::rel_entropy: return 1 + 2 * svec_length(side_dim, field_mode_of<T>());
    case ConeKind::qkd: return 1 + svec_length(side_dim, field_mode_of<T>());
  }
  return 0;
}

template <typename T>
RealOf<T> ConeDescriptor<T>::nu() const {
  switch (kind) {
    case ConeKind::nonneg: return RealOf<T>(size);
    case ConeKind::second_order: return RealOf<T>(2);
    case ConeKind::rel_entropy: return RealOf<T>(1 + 2 * side_dim);
    case ConeKind::qkd: return RealOf<T>(side_dim + 1);
  }
  return RealOf<T>(0);
}

template <typename T>
std::unique_ptr<Cone<RealOf<T>>> make_cone(const ConeDescriptor<T>& desc, InverseHessianMode mode) {
  using Real = RealOf<T>;
  switch (desc.kind) {
    case ConeKind::nonneg: return std::make_unique<NonnegCone<Real>>(desc.size);
    case ConeKind::second_order: return std::make_unique<SecondOrderCone<Real>>(desc.size);
    case ConeKind::rel_entropy: return std::make_unique<RelEntropyConeOracle<T>>(desc.side_dim);
    case ConeKind::qkd:
      if (desc.ghat.empty() && desc.zhat.empty())
        return std::make_unique<QkdConeOracle<T>>(QkdCone<T>::pure_logdet(desc.side_dim), mode);
      return std::make_unique<QkdConeOracle<T>>(QkdCone<T>(desc.ghat, desc.zhat), mode);
  }
  throw ContractViolation("make_cone: unknown cone kind");
}

#define QKDRATE_INSTANTIATE(R)                     \
  template bool soc_is_interior<R>(const Vec<R>&); \
  template class NonnegCone<R>;                    \
  template class SecondOrderCone<R>;
QKDRATE_FOR_EACH_REAL(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

#define QKDRATE_INSTANTIATE(T)             \
  template class RelEntropyCone<T>;        \
  template class RelEntropyConeOracle<T>;  \
  template struct ConeDescriptor<T>;       \
  template std::unique_ptr<Cone<RealOf<T>>> make_cone<T>(const ConeDescriptor<T>&, InverseHessianMode);
QKDRATE_FOR_EACH_ENTRY(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

}  // namespace qkdrate
