#include "qkdrate/entropy_kernel.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>

#include "instantiate.hpp"

namespace qkdrate {

template <typename T>
Mat<T> EigDecomposition<T>::reconstruct() const {
  return U * lambda.template cast<T>().asDiagonal() * U.adjoint();
}

template <typename T>
EigDecomposition<T> eig_hermitian(const Mat<T>& x) {
  if (x.rows() != x.cols()) throw DimensionError("eig_hermitian: matrix is not square");
  if (!x.allFinite()) throw NumericalError("eig_hermitian: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(x);
  if (es.info() != Eigen::Success)
    throw NumericalError("eig_hermitian: eigensolver did not converge (dim " + std::to_string(x.rows()) + ")");
  return {es.eigenvectors(), es.eigenvalues()};
}

template <typename Real>
Real entropy_of_spectrum(const Vec<Real>& lambda) {
  using std::abs;
  using std::log;
  const Index n = lambda.size();
  Real scale(1);
  for (Index i = 0; i < n; ++i) scale = std::max(scale, abs(lambda(i)));
  const Real tol = Real(100) * Real(std::max<Index>(n, 1)) * machine_epsilon<Real>() * scale;
  Real h(0);
  for (Index i = 0; i < n; ++i) {
    const Real l = lambda(i);
    if (l < -tol) throw DomainError("entropy: matrix has a negative eigenvalue " + to_string(l, 6));
    if (l > 0) h -= l * log(l);
  }
  return h;
}

template <typename T>
RealOf<T> entropy(const Mat<T>& x) {
  return entropy_of_spectrum<RealOf<T>>(eig_hermitian<T>(x).lambda);
}

namespace {

template <typename Real>
void require_positive(const Vec<Real>& lambda, const char* who) {
  for (Index i = 0; i < lambda.size(); ++i)
    if (!(lambda(i) > 0)) throw DomainError(std::string(who) + ": non-positive eigenvalue");
}

template <typename Real>
bool near(const Real& a, const Real& b, const Real& reltol) {
  using std::abs;
  return abs(a - b) <= reltol * std::max(abs(a), abs(b));
}

}  // namespace

template <typename Real>
Mat<Real> gamma1(const Vec<Real>& lambda) {
  using std::log;
  using std::log1p;
  require_positive(lambda, "gamma1");
  const Index n = lambda.size();
  const Real reltol = gamma_reltol<Real>();
  Mat<Real> g(n, n);
  for (Index j = 0; j < n; ++j) {
    const Real lj = lambda(j);
    g(j, j) = Real(1) / lj;
    for (Index i = j + 1; i < n; ++i) {
      const Real li = lambda(i);
      Real v;
      if (near(li, lj, reltol)) {
        v = Real(2) / (li + lj);
      } else {
        const Real d = li - lj;
        const Real r = li / lj;
        if (r > Real(0.5) && r < Real(2)) {
          v = log1p(d / lj) / d;
        } else {
          v = (log(li) - log(lj)) / d;
        }
      }
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

template <typename Real>
Gamma2Table<Real>::Gamma2Table(Vec<Real> lambda, Mat<Real> g1)
    : lambda_(std::move(lambda)), g1_(std::move(g1)), reltol_(gamma_reltol<Real>()) {
  const Index n = lambda_.size();
  if (n > kStoreLimit) return;
  data_.resize(static_cast<std::size_t>(n * n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) data_[static_cast<std::size_t>((i * n + j) * n + k)] = compute(i, j, k);
}

template <typename Real>
Real Gamma2Table<Real>::compute(Index i, Index j, Index k) const {
  const Real li = lambda_(i), lj = lambda_(j), lk = lambda_(k);
  if (!near(lj, lk, reltol_)) return (g1_(i, j) - g1_(i, k)) / (lj - lk);
  if (!near(li, lj, reltol_)) return (g1_(i, j) - g1_(j, k)) / (li - lk);
  const Real m = (li + lj + lk) / Real(3);
  return Real(-1) / (Real(2) * m * m);
}

template <typename Real>
Gamma2Table<Real> gamma2(const Vec<Real>& lambda) {
  return Gamma2Table<Real>(lambda, gamma1<Real>(lambda));
}

template <typename T>
Mat<T> log_hermitian(const EigDecomposition<T>& eig) {
  require_positive(eig.lambda, "log_hermitian");
  using std::log;
  Vec<T> l(eig.dim());
  for (Index i = 0; i < eig.dim(); ++i) l(i) = T(log(eig.lambda(i)));
  return eig.U * l.asDiagonal() * eig.U.adjoint();
}

template <typename T>
Mat<T> dlog(const EigDecomposition<T>& eig, const Mat<RealOf<T>>& g1, const Mat<T>& xi) {
  if (xi.rows() != eig.dim() || xi.cols() != eig.dim()) throw DimensionError("dlog: dimension mismatch");
  Mat<T> xt = eig.U.adjoint() * xi * eig.U;
  xt.array() *= g1.template cast<T>().array();
  return eig.U * xt * eig.U.adjoint();
}

template <typename T>
Mat<T> dlog(const EigDecomposition<T>& eig, const Mat<T>& xi) {
  return dlog<T>(eig, gamma1<RealOf<T>>(eig.lambda), xi);
}

template <typename T>
Mat<T> d2log(const EigDecomposition<T>& eig, const Gamma2Table<RealOf<T>>& g2, const Mat<T>& xi) {
  const Index n = eig.dim();
  if (xi.rows() != n || xi.cols() != n || g2.dim() != n) throw DimensionError("d2log: dimension mismatch");
  const Mat<T> xt = eig.U.adjoint() * xi * eig.U;
  Mat<T> m(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      T acc(0);
      for (Index k = 0; k < n; ++k) acc += xt(i, k) * xt(k, j) * g2(i, j, k);
      m(i, j) = RealOf<T>(2) * acc;
      if constexpr (is_complex_v<T>) {
        m(j, i) = std::conj(m(i, j));
      } else {
        m(j, i) = m(i, j);
      }
    }
  }
  return eig.U * m * eig.U.adjoint();
}

template <typename T>
Mat<T> d2log(const EigDecomposition<T>& eig, const Mat<T>& xi) {
  return d2log<T>(eig, gamma2<RealOf<T>>(eig.lambda), xi);
}

#define QKDRATE_INSTANTIATE(T)                                                                    \
  template struct EigDecomposition<T>;                                                            \
  template EigDecomposition<T> eig_hermitian<T>(const Mat<T>&);                                   \
  template RealOf<T> entropy<T>(const Mat<T>&);                                                   \
  template Mat<T> log_hermitian<T>(const EigDecomposition<T>&);                                   \
  template Mat<T> dlog<T>(const EigDecomposition<T>&, const Mat<T>&);                             \
  template Mat<T> dlog<T>(const EigDecomposition<T>&, const Mat<RealOf<T>>&, const Mat<T>&);      \
  template Mat<T> d2log<T>(const EigDecomposition<T>&, const Mat<T>&);                            \
  template Mat<T> d2log<T>(const EigDecomposition<T>&, const Gamma2Table<RealOf<T>>&, const Mat<T>&);
QKDRATE_FOR_EACH_ENTRY(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

#define QKDRATE_INSTANTIATE(R)                            \
  template R entropy_of_spectrum<R>(const Vec<R>&);       \
  template Mat<R> gamma1<R>(const Vec<R>&);               \
  template class Gamma2Table<R>;                          \
  template Gamma2Table<R> gamma2<R>(const Vec<R>&);
QKDRATE_FOR_EACH_REAL(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

}  // namespace qkdrate
