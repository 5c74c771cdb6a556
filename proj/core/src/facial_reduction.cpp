#include "qkdrate/facial_reduction.hpp"

#include <cmath>

#include "instantiate.hpp"
#include "qkdrate/entropy_kernel.hpp"

namespace qkdrate {

template <typename Real>
Real default_rank_tol(Index n) {
  using std::pow;
  return Real(std::max<Index>(n, 1)) * pow(machine_epsilon<Real>(), Real(0.75));
}

template <typename T>
bool is_isometry(const Mat<T>& v, RealOf<T> tol) {
  if (v.rows() < v.cols()) return false;
  const Mat<T> g = v.adjoint() * v;
  return (g - Mat<T>::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff() <= tol;
}

namespace {

template <typename T>
RealOf<T> real_part(const T& x) {
  if constexpr (is_complex_v<T>) return x.real();
  else return x;
}

template <typename T>
Mat<T> project_support(const EigDecomposition<T>& e, const RealOf<T>& threshold, Index& rank) {
  rank = 0;
  for (Index i = 0; i < e.lambda.size(); ++i)
    if (e.lambda(i) > threshold) ++rank;
  // Eigenvalues ascend; keep the top `rank`, largest first.
  Mat<T> v(e.U.rows(), rank);
  for (Index k = 0; k < rank; ++k) v.col(k) = e.U.col(e.U.cols() - 1 - k);
  return v;
}

template <typename T>
Mat<T> matrix_sqrt_psd(const Mat<T>& x, RealOf<T> tol) {
  using std::sqrt;
  const auto e = eig_hermitian<T>(x);
  if (e.lambda.size() && e.lambda(0) < -tol) throw DomainError("POVM element is not positive semidefinite");
  Vec<RealOf<T>> s = e.lambda.cwiseMax(RealOf<T>(0)).cwiseSqrt();
  return e.U * s.template cast<T>().asDiagonal() * e.U.adjoint();
}

template <typename T>
void check_povm(const std::vector<Mat<T>>& E, RealOf<T> tol) {
  if (E.empty()) throw DomainError("POVM: no elements");
  const Index n = E.front().rows();
  Mat<T> sum = Mat<T>::Zero(n, n);
  for (const auto& e : E) {
    if (e.rows() != n || e.cols() != n) throw DimensionError("POVM: elements differ in shape");
    if (hermiticity_defect<T>(e) > tol) throw DomainError("POVM: element is not Hermitian");
    sum += e;
  }
  if ((sum - Mat<T>::Identity(n, n)).cwiseAbs().maxCoeff() > tol)
    throw DomainError("POVM: elements do not sum to the identity");
}

}  // namespace

template <typename T>
SupportResult<T> find_state_support(const std::vector<Mat<T>>& E, const Vec<RealOf<T>>& p, Index dim,
                                    const SolverOptions<RealOf<T>>& opts, RealOf<T> rank_tol) {
  using Real = RealOf<T>;
  using std::max;
  using std::sqrt;
  if (Index(E.size()) != p.size()) throw DimensionError("find_state_support: constraint count mismatch");
  for (const auto& e : E)
    if (e.rows() != dim || e.cols() != dim) throw DimensionError("find_state_support: constraint has wrong shape");
  if (rank_tol < Real(0)) rank_tol = default_rank_tol<Real>(dim);

  // Variables (h, svec S) in the pure logdet cone with h = 1, then t' = t + 1 >= 0;
  // rho = S + t I.
  const Index nsv = svec_length(dim, field_mode_of<T>());
  const Index nvar = 1 + nsv + 1;
  ConicProblem<T> prob;
  prob.cones = {ConeDescriptor<T>::pure_logdet(dim), ConeDescriptor<T>::nonneg(1)};
  prob.c = Vec<Real>::Zero(nvar);
  prob.c(nvar - 1) = Real(-1);
  prob.A = Mat<Real>::Zero(Index(E.size()) + 1, nvar);
  prob.b = Vec<Real>::Zero(Index(E.size()) + 1);
  prob.A(0, 0) = Real(1);
  prob.b(0) = Real(1);
  for (std::size_t k = 0; k < E.size(); ++k) {
    const Real tr = real_part(E[k].trace());
    prob.A.row(Index(k) + 1).segment(1, nsv) = svec<T>(E[k]).transpose();
    prob.A(Index(k) + 1, nvar - 1) = tr;
    prob.b(Index(k) + 1) = p(Index(k)) + tr;
  }

  const auto rep = solve(prob, opts);
  if (rep.status == SolveStatus::infeasible_detected) {
    if (rep.dual_infeasible) throw DomainError("find_state_support: constraints do not bound the trace");
    throw InfeasibleError("find_state_support: no state satisfies the constraints");
  }
  if (rep.status != SolveStatus::optimal && rep.status != SolveStatus::near_optimal)
    throw NumericalError("find_state_support: auxiliary problem failed (" + to_string(rep.status) + ")");

  const Real t = rep.x_opt(nvar - 1) - Real(1);
  Mat<T> rho = smat<T>(rep.x_opt.segment(1, nsv)) + T(t) * Mat<T>::Identity(dim, dim);
  rho = hermitian_part<T>(rho);
  const auto e = eig_hermitian<T>(rho);
  const Real lmax = e.lambda(dim - 1);
  if (!(lmax > Real(0))) throw InfeasibleError("find_state_support: no nonzero feasible state");
  if (t < -Real(1000) * max(opts.tol_feas, opts.tol_gap) * max(Real(1), lmax))
    throw InfeasibleError("find_state_support: no positive semidefinite state satisfies the constraints");

  SupportResult<T> out;
  out.method = "numeric";
  out.margin = max(t, Real(0));
  out.threshold = lmax * max(rank_tol, sqrt(opts.tol_gap));
  out.V = project_support(e, out.threshold, out.rank);
  if (out.rank == dim) out.V = Mat<T>::Identity(dim, dim);
  Vec<Real> lam = e.lambda.cwiseMax(Real(0));
  for (Index i = 0; i < dim; ++i)
    if (lam(i) <= out.threshold) lam(i) = Real(0);
  out.max_rank_state = e.U * lam.template cast<T>().asDiagonal() * e.U.adjoint();
  return out;
}

template <typename T>
ReducedConstraints<T> reduce_constraints(const Mat<T>& V, const std::vector<Mat<T>>& E, const Vec<RealOf<T>>& p,
                                         RealOf<T> tol) {
  using Real = RealOf<T>;
  using std::abs;
  if (Index(E.size()) != p.size()) throw DimensionError("reduce_constraints: constraint count mismatch");
  ReducedConstraints<T> out;
  std::vector<Vec<Real>> basis;  // orthonormal basis of the kept rows
  std::vector<Vec<Real>> kept_rows;
  std::vector<Real> kept_p;
  for (std::size_t k = 0; k < E.size(); ++k) {
    if (E[k].rows() != V.rows() || E[k].cols() != V.rows())
      throw DimensionError("reduce_constraints: constraint has wrong shape");
    Mat<T> f = V.adjoint() * E[k] * V;
    f = hermitian_part<T>(f);
    const Vec<Real> row = svec<T>(f);
    const Real scale = std::max(Real(1), svec<T>(E[k]).norm());
    Vec<Real> r = row;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) r -= q.dot(r) * q;
    if (r.norm() > tol * scale) {
      basis.push_back(r / r.norm());
      kept_rows.push_back(row);
      kept_p.push_back(p(Index(k)));
      out.F.push_back(std::move(f));
      out.kept.push_back(Index(k));
      continue;
    }
    // Dependent: p_k must be the same combination of the kept right-hand sides.
    Real predicted(0);
    if (!kept_rows.empty()) {
      Mat<Real> a(Index(kept_rows.size()), row.size());
      for (std::size_t j = 0; j < kept_rows.size(); ++j) a.row(Index(j)) = kept_rows[j].transpose();
      const Vec<Real> coef = (a * a.transpose()).ldlt().solve(a * row);
      for (std::size_t j = 0; j < kept_p.size(); ++j) predicted += coef(Index(j)) * kept_p[j];
    }
    if (abs(predicted - p(Index(k))) > tol * std::max(Real(1), abs(p(Index(k)))))
      throw InfeasibleError("reduce_constraints: constraint " + std::to_string(k) +
                            " is inconsistent on the support (expected " + to_string(to_double(predicted)) +
                            ", got " + to_string(to_double(p(Index(k)))) + ")");
    out.dropped.push_back(Index(k));
  }
  out.p = Vec<Real>(Index(kept_p.size()));
  for (std::size_t j = 0; j < kept_p.size(); ++j) out.p(Index(j)) = kept_p[j];
  return out;
}

template <typename T>
KrausMap<T> reduce_map(const KrausMap<T>& map, const Mat<T>& V, RealOf<T> rank_tol) {
  using Real = RealOf<T>;
  if (map.empty()) throw DomainError("reduce_map: empty map");
  if (V.rows() != map.in_dim()) throw DimensionError("reduce_map: isometry does not match the map input");
  if (rank_tol < Real(0)) rank_tol = default_rank_tol<Real>(map.out_dim());

  std::vector<Mat<T>> composed;
  for (const auto& k : map.operators()) composed.push_back(k * V);
  const auto blocks = split_output_blocks(KrausMap<T>(composed));
  if (blocks.empty()) throw DomainError("reduce_map: the map has zero range");

  // Reduced Kraus operators per block, then stacked block diagonally.
  std::vector<std::vector<Mat<T>>> reduced;
  Index out_dim = 0;
  for (const auto& blk : blocks) {
    Mat<T> m = Mat<T>::Zero(blk.out_dim(), blk.out_dim());
    for (const auto& k : blk.operators()) m += k * k.adjoint();
    const auto e = eig_hermitian<T>(hermitian_part<T>(m));
    const Real lmax = e.lambda(e.lambda.size() - 1);
    Index rank = 0;
    Mat<T> w = project_support(e, lmax * rank_tol, rank);
    if (rank == 0) continue;
    std::vector<Mat<T>> ops;
    for (const auto& k : blk.operators()) ops.push_back(rank == blk.out_dim() ? k : Mat<T>(w.adjoint() * k));
    out_dim += rank;
    reduced.push_back(std::move(ops));
  }
  if (out_dim == 0) throw DomainError("reduce_map: the map has zero range");

  std::vector<Mat<T>> ops;
  Index row = 0;
  for (const auto& group : reduced) {
    const Index rows = group.front().rows();
    for (const auto& k : group) {
      Mat<T> full = Mat<T>::Zero(out_dim, V.cols());
      full.middleRows(row, rows) = k;
      ops.push_back(std::move(full));
    }
    row += rows;
  }
  return KrausMap<T>(std::move(ops));
}

template <typename T>
KrausMap<T> canonical_ghat(const KrausMap<T>& ghat, RealOf<T> tol) {
  if (ghat.operators().size() != 1) return ghat;
  const Mat<T>& u = ghat.operators().front();
  if (u.rows() != u.cols() || !is_isometry<T>(u, tol)) return ghat;
  return KrausMap<T>::identity(u.rows());
}

template <typename T>
std::pair<KrausMap<T>, KrausMap<T>> naimark_full_maps(const std::vector<Mat<T>>& E, Index dim_a, RealOf<T> tol) {
  check_povm(E, tol);
  const Index db = E.front().rows();
  const Index n = dim_a * db;
  const Index k = Index(E.size());
  const Mat<T> ia = Mat<T>::Identity(dim_a, dim_a);
  Mat<T> v = Mat<T>::Zero(n * k, n);
  std::vector<Mat<T>> zops;
  for (Index i = 0; i < k; ++i) {
    Mat<T> ei = Mat<T>::Zero(k, 1);
    ei(i, 0) = T(1);
    v += kron<T>(kron<T>(ia, matrix_sqrt_psd<T>(E[std::size_t(i)], tol)), ei);
    Mat<T> pi = Mat<T>::Zero(k, k);
    pi(i, i) = T(1);
    zops.push_back(kron<T>(Mat<T>(Mat<T>::Identity(n, n)), pi));
  }
  return {KrausMap<T>({v}), KrausMap<T>(std::move(zops))};
}

template <typename T>
std::pair<KrausMap<T>, KrausMap<T>> naimark_key_maps(const std::vector<Mat<T>>& E, Index dim_a, RealOf<T> tol) {
  check_povm(E, tol);
  const Index db = E.front().rows();
  const Index n = dim_a * db;
  const Index k = Index(E.size());
  const Mat<T> ia = Mat<T>::Identity(dim_a, dim_a);
  std::vector<Mat<T>> ops;
  for (Index i = 0; i < k; ++i) {
    Mat<T> ei = Mat<T>::Zero(k, 1);
    ei(i, 0) = T(1);
    ops.push_back(kron<T>(kron<T>(ia, matrix_sqrt_psd<T>(E[std::size_t(i)], tol)), ei));
  }
  KrausMap<T> zraw(std::move(ops));
  return {KrausMap<T>::identity(n), reduce_map<T>(zraw, Mat<T>::Identity(n, n))};
}

template <typename T>
ReductionCertificate<T> reduce_problem(const ReductionInputs<T>& in, const SolverOptions<RealOf<T>>& opts,
                                       RealOf<T> rank_tol) {
  using Real = RealOf<T>;
  using std::max;
  using std::sqrt;
  if (in.E.empty()) throw DimensionError("reduce_problem: no constraints");
  const Index n = in.E.front().rows();
  if (rank_tol < Real(0)) rank_tol = default_rank_tol<Real>(n);

  ReductionCertificate<T> cert;
  cert.full_dim = n;
  Mat<T> rho_w;
  if (in.support) {
    if (!in.support_witness) throw ContractViolation("reduce_problem: analytic support needs a witness state");
    cert.V = *in.support;
    rho_w = *in.support_witness;
    cert.method = "analytic";
    cert.threshold = Real(0);
  } else {
    auto sup = find_state_support<T>(in.E, in.p, n, opts, rank_tol);
    cert.V = std::move(sup.V);
    rho_w = std::move(sup.max_rank_state);
    cert.method = "numeric";
    cert.threshold = sup.threshold;
  }
  if (!is_isometry<T>(cert.V, Real(1e3) * machine_epsilon<Real>() * Real(n)))
    throw NumericalError("reduce_problem: support basis is not an isometry");
  cert.reduced_dim = cert.V.cols();

  const Real ctol = max(Real(1e3) * opts.tol_feas, cert.method == "numeric" ? sqrt(opts.tol_gap) : Real(0));
  auto rc = reduce_constraints<T>(cert.V, in.E, in.p, ctol);
  cert.F = std::move(rc.F);
  cert.p = std::move(rc.p);
  cert.kept_rows = std::move(rc.kept);
  cert.dropped_rows = std::move(rc.dropped);

  const bool full = cert.reduced_dim == n && (cert.V - Mat<T>::Identity(n, n)).cwiseAbs().maxCoeff() == Real(0);
  if (full && in.reduced_maps) {
    cert.ghat = in.reduced_maps->first;
    cert.zhat = in.reduced_maps->second;
  } else {
    const Real mtol = Real(1e3) * machine_epsilon<Real>() * Real(n);
    cert.ghat = canonical_ghat<T>(reduce_map<T>(in.G, cert.V, rank_tol), max(mtol, Real(1e-12)));
    cert.zhat = reduce_map<T>(in.G.then(in.Z), cert.V, rank_tol);
  }

  cert.witness = hermitian_part<T>(Mat<T>(cert.V.adjoint() * rho_w * cert.V));
  cert.unique_state = Index(cert.F.size()) == svec_length(cert.reduced_dim, field_mode_of<T>());
  if (cert.unique_state) {
    // The kept rows are independent and as many as the unknowns.
    const Index nsv = svec_length(cert.reduced_dim, field_mode_of<T>());
    Mat<Real> a(nsv, nsv);
    for (Index k = 0; k < nsv; ++k) a.row(k) = svec<T>(cert.F[std::size_t(k)]).transpose();
    const Vec<Real> s = a.partialPivLu().solve(cert.p);
    cert.witness = smat<T>(s);
  }
  return cert;
}

template <typename T>
Mat<T> bb84_support(RealOf<T> qx, RealOf<T> qz) {
  using Real = RealOf<T>;
  using std::sqrt;
  if (qx < Real(0) || qx >= Real(1) || qz < Real(0) || qz >= Real(1))
    throw DomainError("bb84_support: QBER outside [0, 1)");
  const Real r = Real(1) / sqrt(Real(2));
  Vec<T> phip = Vec<T>::Zero(4), phim = Vec<T>::Zero(4), psip = Vec<T>::Zero(4);
  phip(0) = phip(3) = T(r);
  phim(0) = T(r);
  phim(3) = T(-r);
  psip(1) = psip(2) = T(r);
  if (qx > Real(0) && qz > Real(0)) return Mat<T>::Identity(4, 4);
  if (qz == Real(0) && qx > Real(0)) {
    Mat<T> v(4, 2);
    v << phip, phim;
    return v;
  }
  if (qx == Real(0) && qz > Real(0)) {
    Mat<T> v(4, 2);
    v << phip, psip;
    return v;
  }
  return phip;
}

#define QKDRATE_INSTANTIATE(R) template R default_rank_tol<R>(Index);
QKDRATE_FOR_EACH_REAL(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

#define QKDRATE_INSTANTIATE(T)                                                                                      \
  template bool is_isometry<T>(const Mat<T>&, RealOf<T>);                                                           \
  template SupportResult<T> find_state_support<T>(const std::vector<Mat<T>>&, const Vec<RealOf<T>>&, Index,         \
                                                  const SolverOptions<RealOf<T>>&, RealOf<T>);                      \
  template ReducedConstraints<T> reduce_constraints<T>(const Mat<T>&, const std::vector<Mat<T>>&,                   \
                                                       const Vec<RealOf<T>>&, RealOf<T>);                           \
  template KrausMap<T> reduce_map<T>(const KrausMap<T>&, const Mat<T>&, RealOf<T>);                                 \
  template KrausMap<T> canonical_ghat<T>(const KrausMap<T>&, RealOf<T>);                                            \
  template std::pair<KrausMap<T>, KrausMap<T>> naimark_key_maps<T>(const std::vector<Mat<T>>&, Index, RealOf<T>);   \
  template std::pair<KrausMap<T>, KrausMap<T>> naimark_full_maps<T>(const std::vector<Mat<T>>&, Index, RealOf<T>);  \
  template ReductionCertificate<T> reduce_problem<T>(const ReductionInputs<T>&, const SolverOptions<RealOf<T>>&,    \
                                                     RealOf<T>);                                                    \
  template Mat<T> bb84_support<T>(RealOf<T>, RealOf<T>);
QKDRATE_FOR_EACH_ENTRY(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

}  // namespace qkdrate
