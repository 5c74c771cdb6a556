#include "qkdrate/herm_vec.hpp"

#include <string>

#include "instantiate.hpp"

namespace qkdrate {

Index svec_side_dim(Index length, FieldMode mode) {
  if (length <= 0) throw DimensionError("svec length must be positive");
  Index n = 0;
  if (mode == FieldMode::real) {
    while (n * (n + 1) / 2 < length) ++n;
  } else {
    while (n * n < length) ++n;
  }
  if (svec_length(n, mode) != length)
    throw DimensionError("svec length " + std::to_string(length) + " is not realizable");
  return n;
}

template <typename T>
Vec<RealOf<T>> svec(const Mat<T>& x) {
  using Real = RealOf<T>;
  if (x.rows() != x.cols()) throw DimensionError("svec: matrix is not square");
  const Index n = x.rows();
  const Real rt2 = sqrt(Real(2));
  Vec<Real> out(svec_length(n, field_mode_of<T>()));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if constexpr (is_complex_v<T>) {
        out(k++) = rt2 * x(i, j).real();
        out(k++) = -rt2 * x(i, j).imag();
      } else {
        out(k++) = rt2 * x(i, j);
      }
    }
    if constexpr (is_complex_v<T>) {
      out(k++) = x(j, j).real();
    } else {
      out(k++) = x(j, j);
    }
  }
  return out;
}

template <typename T>
Mat<T> smat(const Eigen::Ref<const Vec<RealOf<T>>>& v) {
  using Real = RealOf<T>;
  const Index n = svec_side_dim(v.size(), field_mode_of<T>());
  const Real inv_rt2 = Real(1) / sqrt(Real(2));
  Mat<T> x(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if constexpr (is_complex_v<T>) {
        const T z(v(k) * inv_rt2, -v(k + 1) * inv_rt2);
        k += 2;
        x(i, j) = z;
        x(j, i) = std::conj(z);
      } else {
        x(i, j) = v(k) * inv_rt2;
        x(j, i) = x(i, j);
        ++k;
      }
    }
    x(j, j) = T(v(k++));
  }
  return x;
}

template <typename T>
SVec<RealOf<T>> to_svec(const Mat<T>& x) {
  return {svec<T>(x), x.rows(), field_mode_of<T>()};
}

template <typename T>
Mat<T> from_svec(const SVec<RealOf<T>>& v) {
  if (v.field_mode != field_mode_of<T>())
    throw DimensionError("from_svec: field mode does not match entry type");
  if (v.data.size() != svec_length(v.side_dim, v.field_mode))
    throw DimensionError("from_svec: length does not match side dimension");
  return smat<T>(v.data);
}

template <typename T>
RealOf<T> hermiticity_defect(const Mat<T>& x) {
  if (x.rows() != x.cols()) throw DimensionError("matrix is not square");
  if (x.size() == 0) return RealOf<T>(0);
  return (x - x.adjoint()).cwiseAbs().maxCoeff();
}

template <typename T>
Mat<T> hermitian_part(const Mat<T>& x) {
  if (x.rows() != x.cols()) throw DimensionError("matrix is not square");
  return (x + x.adjoint()) / RealOf<T>(2);
}

template <typename T>
RealOf<T> inner(const Mat<T>& x, const Mat<T>& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || x.rows() != x.cols())
    throw DimensionError("inner: dimension mismatch");
  // tr(XY) = sum_ij X_ij Y_ji = sum_ij X_ij conj(Y_ij) for Hermitian Y.
  if constexpr (is_complex_v<T>) {
    return (x.array() * y.conjugate().array()).sum().real();
  } else {
    return (x.array() * y.array()).sum();
  }
}

template <typename T>
LinearMapMatrix<RealOf<T>> skron(const Mat<T>& k) {
  using Real = RealOf<T>;
  constexpr FieldMode mode = field_mode_of<T>();
  const Index d_out = k.rows();
  const Index d_in = k.cols();
  const Real inv_rt2 = Real(1) / sqrt(Real(2));
  LinearMapMatrix<Real> out;
  out.in_side_dim = d_in;
  out.out_side_dim = d_out;
  out.matrix.resize(svec_length(d_out, mode), svec_length(d_in, mode));
  Mat<T> img(d_out, d_out);
  Index col = 0;
  for (Index j = 0; j < d_in; ++j) {
    for (Index i = 0; i < j; ++i) {
      // Basis element (E_ij + E_ji)/sqrt(2): image (k_i k_j^H + k_j k_i^H)/sqrt(2).
      const auto ki = k.col(i);
      const auto kj = k.col(j);
      img.noalias() = ki * kj.adjoint();
      img += img.adjoint().eval();
      img *= inv_rt2;
      out.matrix.col(col++) = svec<T>(img);
      if constexpr (is_complex_v<T>) {
        // The slot stores -Im, so its basis element is -i E_ij + i E_ji, over sqrt(2).
        const T im(0, 1);
        img.noalias() = ki * kj.adjoint();
        img *= -im;
        img += img.adjoint().eval();
        img *= inv_rt2;
        out.matrix.col(col++) = svec<T>(img);
      }
    }
    img.noalias() = k.col(j) * k.col(j).adjoint();
    out.matrix.col(col++) = svec<T>(img);
  }
  return out;
}

template <typename T>
KrausMap<T>::KrausMap(std::vector<Mat<T>> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw DimensionError("KrausMap needs at least one operator");
  out_dim_ = ops_.front().rows();
  in_dim_ = ops_.front().cols();
  for (const auto& k : ops_) {
    if (k.rows() != out_dim_ || k.cols() != in_dim_)
      throw DimensionError("KrausMap: operators have inconsistent shapes");
  }
}

template <typename T>
KrausMap<T> KrausMap<T>::identity(Index dim) {
  return KrausMap<T>({Mat<T>::Identity(dim, dim)});
}

template <typename T>
Mat<T> KrausMap<T>::apply(const Mat<T>& x) const {
  if (x.rows() != in_dim_ || x.cols() != in_dim_) throw DimensionError("KrausMap::apply: shape mismatch");
  Mat<T> out = Mat<T>::Zero(out_dim_, out_dim_);
  for (const auto& k : ops_) out.noalias() += k * x * k.adjoint();
  return out;
}

template <typename T>
Mat<T> KrausMap<T>::adjoint_apply(const Mat<T>& y) const {
  if (y.rows() != out_dim_ || y.cols() != out_dim_)
    throw DimensionError("KrausMap::adjoint_apply: shape mismatch");
  Mat<T> out = Mat<T>::Zero(in_dim_, in_dim_);
  for (const auto& k : ops_) out.noalias() += k.adjoint() * y * k;
  return out;
}

template <typename T>
KrausMap<T> KrausMap<T>::then(const KrausMap& after) const {
  if (after.in_dim() != out_dim_) throw DimensionError("KrausMap::then: shape mismatch");
  std::vector<Mat<T>> ops;
  ops.reserve(ops_.size() * after.ops_.size());
  for (const auto& a : after.ops_)
    for (const auto& k : ops_) ops.push_back(a * k);
  return KrausMap<T>(std::move(ops));
}

template <typename T>
LinearMapMatrix<RealOf<T>> KrausMap<T>::matrix() const {
  LinearMapMatrix<RealOf<T>> total = skron<T>(ops_.front());
  for (std::size_t i = 1; i < ops_.size(); ++i) total.matrix += skron<T>(ops_[i]).matrix;
  return total;
}

template <typename T>
Mat<T> kraus_apply(const KrausMap<T>& map, const Mat<T>& x, bool adjoint) {
  return adjoint ? map.adjoint_apply(x) : map.apply(x);
}

template <typename T>
std::vector<KrausMap<T>> split_output_blocks(const KrausMap<T>& map) {
  const Index d = map.out_dim();
  std::vector<Index> parent(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  std::vector<char> used(static_cast<std::size_t>(d), 0);
  for (const auto& k : map.operators()) {
    Index first = -1;
    for (Index r = 0; r < d; ++r) {
      if (k.row(r).cwiseAbs().maxCoeff() == RealOf<T>(0)) continue;
      used[static_cast<std::size_t>(r)] = 1;
      if (first < 0) {
        first = r;
      } else {
        parent[static_cast<std::size_t>(find(r))] = find(first);
      }
    }
  }
  // Blocks ordered by their smallest row.
  std::vector<std::vector<Index>> groups;
  std::vector<Index> group_of(static_cast<std::size_t>(d), -1);
  for (Index r = 0; r < d; ++r) {
    if (!used[static_cast<std::size_t>(r)]) continue;
    const Index root = find(r);
    if (group_of[static_cast<std::size_t>(root)] < 0) {
      group_of[static_cast<std::size_t>(root)] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(root)])].push_back(r);
  }
  std::vector<KrausMap<T>> blocks;
  for (const auto& rows : groups) {
    std::vector<Mat<T>> ops;
    for (const auto& k : map.operators()) {
      Mat<T> sub(static_cast<Index>(rows.size()), k.cols());
      for (std::size_t a = 0; a < rows.size(); ++a) sub.row(static_cast<Index>(a)) = k.row(rows[a]);
      if (sub.cwiseAbs().maxCoeff() > RealOf<T>(0)) ops.push_back(std::move(sub));
    }
    blocks.emplace_back(std::move(ops));
  }
  return blocks;
}

template <typename T>
bool is_identity_map(const KrausMap<T>& map, RealOf<T> tol) {
  if (map.empty() || map.operators().size() != 1 || map.in_dim() != map.out_dim()) return false;
  const Mat<T>& k = map.operators().front();
  return (k - Mat<T>::Identity(k.rows(), k.cols())).cwiseAbs().maxCoeff() <= tol;
}

template <typename Real>
Vec<Real> svec_weights(const Mat<Real>& w, FieldMode mode) {
  const Index n = w.rows();
  Vec<Real> out(svec_length(n, mode));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      out(k++) = w(i, j);
      if (mode == FieldMode::complex) out(k++) = w(i, j);
    }
    out(k++) = w(j, j);
  }
  return out;
}

template Vec<double> svec_weights<double>(const Mat<double>&, FieldMode);
template Vec<Extended> svec_weights<Extended>(const Mat<Extended>&, FieldMode);

#define QKDRATE_INSTANTIATE(T)                                                  \
  template Vec<RealOf<T>> svec<T>(const Mat<T>&);                              \
  template Mat<T> smat<T>(const Eigen::Ref<const Vec<RealOf<T>>>&);            \
  template SVec<RealOf<T>> to_svec<T>(const Mat<T>&);                          \
  template Mat<T> from_svec<T>(const SVec<RealOf<T>>&);                        \
  template RealOf<T> hermiticity_defect<T>(const Mat<T>&);                     \
  template Mat<T> hermitian_part<T>(const Mat<T>&);                            \
  template RealOf<T> inner<T>(const Mat<T>&, const Mat<T>&);                   \
  template LinearMapMatrix<RealOf<T>> skron<T>(const Mat<T>&);                 \
  template class KrausMap<T>;                                                  \
  template Mat<T> kraus_apply<T>(const KrausMap<T>&, const Mat<T>&, bool);      \
  template std::vector<KrausMap<T>> split_output_blocks<T>(const KrausMap<T>&); \
  template bool is_identity_map<T>(const KrausMap<T>&, RealOf<T>);
QKDRATE_FOR_EACH_ENTRY(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

}  // namespace qkdrate
