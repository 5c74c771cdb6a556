#pragma once

// Real vectorization of Hermitian matrices and matrix representations of
// linear maps on them.
//
// svec layout (stable; the problem-file format depends on it):
//   * columns of the upper triangle in order, i.e. (0,0), (0,1), (1,1), (0,2), ...
//   * off-diagonal entries scaled by sqrt(2)
//   * complex mode: every off-diagonal entry X(i,j), i < j, occupies two slots,
//     (sqrt(2) Re X(i,j), -sqrt(2) Im X(i,j)); diagonal entries occupy one slot.
// With this scaling <X, Y> = tr(XY) = dot(svec X, svec Y).

#include <vector>

#include "qkdrate/errors.hpp"
#include "qkdrate/scalar.hpp"

namespace qkdrate {

enum class FieldMode { real, complex };

template <typename T>
constexpr FieldMode field_mode_of() {
  return is_complex_v<T> ? FieldMode::complex : FieldMode::real;
}

inline Index svec_length(Index side_dim, FieldMode mode) {
  return mode == FieldMode::real ? side_dim * (side_dim + 1) / 2 : side_dim * side_dim;
}

/// Side dimension whose svec has `length` entries; throws DimensionError if none.
Index svec_side_dim(Index length, FieldMode mode);

/// Flat real coordinates of a Hermitian matrix.
template <typename Real>
struct SVec {
  Vec<Real> data;
  Index side_dim = 0;
  FieldMode field_mode = FieldMode::real;
};

/// Dense real matrix acting on svec coordinates: out = matrix * in.
template <typename Real>
struct LinearMapMatrix {
  Mat<Real> matrix;
  Index in_side_dim = 0;
  Index out_side_dim = 0;
};

template <typename T>
Vec<RealOf<T>> svec(const Mat<T>& x);

template <typename T>
Mat<T> smat(const Eigen::Ref<const Vec<RealOf<T>>>& v);

/// Typed variants carrying side dimension and field mode.
template <typename T>
SVec<RealOf<T>> to_svec(const Mat<T>& x);
template <typename T>
Mat<T> from_svec(const SVec<RealOf<T>>& v);

/// Largest |X - X^dagger| entry, used by builders to validate input.
template <typename T>
RealOf<T> hermiticity_defect(const Mat<T>& x);

/// (X + X^dagger) / 2.
template <typename T>
Mat<T> hermitian_part(const Mat<T>& x);

/// tr(XY) for Hermitian X, Y.
template <typename T>
RealOf<T> inner(const Mat<T>& x, const Mat<T>& y);

/// Matrix of X -> K X K^dagger on svec coordinates, built column by column from
/// rank-one updates so the Kronecker product is never formed.
template <typename T>
LinearMapMatrix<RealOf<T>> skron(const Mat<T>& k);

/// Kronecker product a (x) b.
template <typename T>
Mat<T> kron(const Mat<T>& a, const Mat<T>& b) {
  Mat<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Completely positive map X -> sum_i K_i X K_i^dagger.
template <typename T>
class KrausMap {
 public:
  KrausMap() = default;
  explicit KrausMap(std::vector<Mat<T>> ops);

  static KrausMap identity(Index dim);

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }
  const std::vector<Mat<T>>& operators() const { return ops_; }
  bool empty() const { return ops_.empty(); }

  Mat<T> apply(const Mat<T>& x) const;
  Mat<T> adjoint_apply(const Mat<T>& y) const;

  /// Kraus operators of this map followed by `after`: after(this(X)).
  KrausMap then(const KrausMap& after) const;

  /// Matrix of the map on svec coordinates.
  LinearMapMatrix<RealOf<T>> matrix() const;

 private:
  std::vector<Mat<T>> ops_;
  Index in_dim_ = 0;
  Index out_dim_ = 0;
};

template <typename T>
Mat<T> kraus_apply(const KrausMap<T>& map, const Mat<T>& x, bool adjoint);

/// Splits a map into maps onto disjoint groups of output coordinates so that
/// map(X) is block diagonal with these blocks. Output rows are grouped when
/// some Kraus operator has nonzero entries in both; all-zero operators vanish.
template <typename T>
std::vector<KrausMap<T>> split_output_blocks(const KrausMap<T>& map);

/// True when the map is X -> X up to `tol` (single square identity operator).
template <typename T>
bool is_identity_map(const KrausMap<T>& map, RealOf<T> tol);

/// svec-layout vector whose slots carry W(i,j) for the entry (i,j) they encode;
/// used for maps that act entrywise in an eigenbasis.
template <typename Real>
Vec<Real> svec_weights(const Mat<Real>& w, FieldMode mode);

}  // namespace qkdrate
