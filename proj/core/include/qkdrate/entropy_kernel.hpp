#pragma once

// Spectral calculus for the matrix logarithm: eigendecompositions, von Neumann
// entropy, divided-difference tables of log and the first two Frechet
// derivatives of log built from them. All logs are natural.

#include <vector>

#include "qkdrate/errors.hpp"
#include "qkdrate/scalar.hpp"

namespace qkdrate {

template <typename T>
struct EigDecomposition {
  Mat<T> U;                  // columns are eigenvectors
  Vec<RealOf<T>> lambda;     // ascending

  Index dim() const { return lambda.size(); }
  Mat<T> reconstruct() const;
};

template <typename T>
EigDecomposition<T> eig_hermitian(const Mat<T>& x);

/// Relative gap below which two eigenvalues are treated as equal by the
/// divided-difference tables: sqrt(machine epsilon).
template <typename Real>
Real gamma_reltol() {
  using std::sqrt;
  return sqrt(machine_epsilon<Real>());
}

/// -sum lambda log lambda over a spectrum, 0 log 0 := 0. Throws DomainError on
/// eigenvalues below -tol.
template <typename Real>
Real entropy_of_spectrum(const Vec<Real>& lambda);

template <typename T>
RealOf<T> entropy(const Mat<T>& x);

/// First divided differences of log over lambda (all entries must be > 0).
template <typename Real>
Mat<Real> gamma1(const Vec<Real>& lambda);

/// Second divided differences of log. Stored as a full tensor for dim <= 64,
/// evaluated on demand from the first-order table otherwise.
template <typename Real>
class Gamma2Table {
 public:
  static constexpr Index kStoreLimit = 64;

  Gamma2Table(Vec<Real> lambda, Mat<Real> g1);

  Index dim() const { return lambda_.size(); }
  bool stored() const { return !data_.empty(); }
  Real operator()(Index i, Index j, Index k) const {
    const Index n = lambda_.size();
    return stored() ? data_[static_cast<std::size_t>((i * n + j) * n + k)] : compute(i, j, k);
  }

 private:
  Real compute(Index i, Index j, Index k) const;

  Vec<Real> lambda_;
  Mat<Real> g1_;
  Real reltol_;
  std::vector<Real> data_;
};

template <typename Real>
Gamma2Table<Real> gamma2(const Vec<Real>& lambda);

/// log of the matrix U diag(lambda) U^dagger.
template <typename T>
Mat<T> log_hermitian(const EigDecomposition<T>& eig);

/// Frechet derivative of log at U diag(lambda) U^dagger along xi:
/// U (G1 .* (U^dagger xi U)) U^dagger.
template <typename T>
Mat<T> dlog(const EigDecomposition<T>& eig, const Mat<T>& xi);
template <typename T>
Mat<T> dlog(const EigDecomposition<T>& eig, const Mat<RealOf<T>>& g1, const Mat<T>& xi);

/// Second Frechet derivative of log applied to (xi, xi): U M U^dagger with
/// M_ij = 2 sum_k xt_ik xt_kj G2_ijk and xt = U^dagger xi U.
template <typename T>
Mat<T> d2log(const EigDecomposition<T>& eig, const Mat<T>& xi);
template <typename T>
Mat<T> d2log(const EigDecomposition<T>& eig, const Gamma2Table<RealOf<T>>& g2, const Mat<T>& xi);

}  // namespace qkdrate
