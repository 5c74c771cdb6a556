#include "qkdrate/protocols.hpp"

#include <chrono>
#include <cmath>
#include <complex>

#include <boost/math/constants/constants.hpp>

#include "instantiate.hpp"
#include "qkdrate/entropy_kernel.hpp"
#include "qkdrate/qkd_cone.hpp"

namespace qkdrate {

namespace {

template <typename T>
RealOf<T> real_part(const T& x) {
  if constexpr (is_complex_v<T>) return x.real();
  else return x;
}

template <typename T>
T from_complex(const std::complex<RealOf<T>>& z, bool& lossy) {
  if constexpr (is_complex_v<T>) {
    return z;
  } else {
    if (z.imag() != RealOf<T>(0)) lossy = true;
    return z.real();
  }
}

template <typename T>
RealOf<T> expect(const Mat<T>& e, const Mat<T>& rho) {
  return real_part<T>(Mat<T>(e * rho).trace());
}

template <typename T>
Mat<T> proj(const Vec<T>& v) {
  return v * v.adjoint();
}

template <typename T>
Vec<T> ket(Index dim, Index i) {
  Vec<T> v = Vec<T>::Zero(dim);
  v(i) = T(1);
  return v;
}

/// Kraus operators |i><i| (x) 1_d, reading the key from the first factor.
template <typename T>
KrausMap<T> key_pinching(Index da, Index db) {
  std::vector<Mat<T>> ops;
  for (Index i = 0; i < da; ++i) ops.push_back(kron<T>(Mat<T>(proj<T>(ket<T>(da, i))), Mat<T>(Mat<T>::Identity(db, db))));
  return KrausMap<T>(std::move(ops));
}

/// Joint outcome table of Alice's basis {a_i} and Bob's basis {b_j} on rho.
template <typename T>
Mat<RealOf<T>> joint_table(const std::vector<Vec<T>>& a, const std::vector<Vec<T>>& b, const Mat<T>& rho) {
  Mat<RealOf<T>> t(Index(a.size()), Index(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      t(Index(i), Index(j)) = expect<T>(kron<T>(proj<T>(a[i]), proj<T>(b[j])), rho);
  return t;
}

bool is_prime(int d) {
  if (d < 2) return false;
  for (int k = 2; k * k <= d; ++k)
    if (d % k == 0) return false;
  return true;
}

template <typename Real>
Real entropy_bits_of(const Vec<Real>& probs) {
  using std::log;
  Real h(0);
  for (Index i = 0; i < probs.size(); ++i)
    if (probs(i) > Real(0)) h -= probs(i) * log(probs(i));
  return h / ln2<Real>();
}

template <typename Real>
Mat<Real> inverse_sqrt_spd(const Mat<Real>& s) {
  Eigen::SelfAdjointEigenSolver<Mat<Real>> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const Vec<Real>& lam = es.eigenvalues();
  if (!(lam.minCoeff() > machine_epsilon<Real>() * Real(s.rows()) * lam.cwiseAbs().maxCoeff()))
    throw DomainError("covariance matrix is singular or not positive definite");
  return es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

template <typename T>
void ProtocolInstance<T>::validate() const {
  using std::abs;
  using std::sqrt;
  const Real tol = Real(1e3) * sqrt(machine_epsilon<Real>());
  const Index n = dim();
  if (n <= 0) throw DimensionError(name + ": empty dimensions");
  if (observables.empty()) throw DimensionError(name + ": no constraints");
  if (Index(observables.size()) != probabilities.size())
    throw DimensionError(name + ": observables and probabilities differ in number");
  if (!observed.empty() && observed.size() != observables.size())
    throw DimensionError(name + ": observed flags differ in number");
  for (const auto& e : observables) {
    if (e.rows() != n || e.cols() != n) throw DimensionError(name + ": constraint has the wrong shape");
    if (hermiticity_defect<T>(e) > tol) throw DomainError(name + ": constraint is not Hermitian");
  }
  if (key_map.empty() || pinching.empty()) throw DomainError(name + ": missing key maps");
  if (key_map.in_dim() != n) throw DimensionError(name + ": key map input does not match the state");
  if (pinching.in_dim() != key_map.out_dim()) throw DimensionError(name + ": pinching does not follow the key map");
  if (key_table.size()) {
    if ((key_table.array() < -tol).any()) throw DomainError(name + ": negative key table entry");
    if (abs(key_table.sum() - Real(1)) > tol) throw DomainError(name + ": key table does not sum to 1");
  }
  if (experimental) {
    Index k = 0;
    for (std::size_t i = 0; i < observables.size(); ++i)
      if (observed.empty() || observed[i]) ++k;
    if (experimental->frequencies.size() != k) throw DimensionError(name + ": one frequency per observed constraint");
    if (experimental->sigma.rows() != k || experimental->sigma.cols() != k)
      throw DimensionError(name + ": covariance has the wrong shape");
    if (!(experimental->chi > Real(0))) throw DomainError(name + ": chi must be positive");
  }
}

template <typename T>
Mat<T> isotropic_state(Index d, RealOf<T> v) {
  using Real = RealOf<T>;
  using std::sqrt;
  if (d < 2) throw DomainError("isotropic state: d must be at least 2");
  if (!(v >= Real(0) && v <= Real(1))) throw DomainError("isotropic state: visibility outside [0, 1]");
  Vec<T> phi = Vec<T>::Zero(d * d);
  for (Index i = 0; i < d; ++i) phi(i * d + i) = T(Real(1) / sqrt(Real(d)));
  return T(v) * proj<T>(phi) + T((Real(1) - v) / Real(d * d)) * Mat<T>::Identity(d * d, d * d);
}

template <typename Real>
Real binary_entropy(Real p) {
  using std::log;
  if (p < Real(0) || p > Real(1)) throw DomainError("binary entropy: probability outside [0, 1]");
  if (p == Real(0) || p == Real(1)) return Real(0);
  return -(p * log(p) + (Real(1) - p) * log(Real(1) - p)) / ln2<Real>();
}

template <typename Real>
Real conditional_entropy_AB(const Mat<Real>& joint) {
  using std::abs;
  if (joint.size() == 0) throw DimensionError("conditional entropy: empty table");
  if ((joint.array() < Real(0)).any()) throw DomainError("conditional entropy: negative probability");
  if (abs(joint.sum() - Real(1)) > Real(1e-12)) throw DomainError("conditional entropy: table does not sum to 1");
  const Vec<Real> flat = Eigen::Map<const Vec<Real>>(joint.data(), joint.size());
  const Vec<Real> pb = joint.colwise().sum().transpose();
  return entropy_bits_of<Real>(flat) - entropy_bits_of<Real>(pb);
}

template <typename T>
ProtocolInstance<T> bb84(RealOf<T> qx, RealOf<T> qz) {
  using Real = RealOf<T>;
  using std::sqrt;
  if (!(qx >= Real(0) && qx < Real(1)) || !(qz >= Real(0) && qz < Real(1)))
    throw DomainError("bb84: QBER outside [0, 1)");
  const Real r = Real(1) / sqrt(Real(2));
  const Vec<T> k0 = ket<T>(2, 0), k1 = ket<T>(2, 1);
  const Vec<T> plus = T(r) * (k0 + k1), minus = T(r) * (k0 - k1);
  auto kk = [](const Vec<T>& a, const Vec<T>& b) { return Vec<T>(kron<T>(a, b)); };

  ProtocolInstance<T> in;
  in.name = "bb84";
  in.dim_a = in.dim_b = 2;
  const Mat<T> qz_op = proj<T>(kk(k0, k1)) + proj<T>(kk(k1, k0));
  const Mat<T> qx_op = proj<T>(kk(plus, minus)) + proj<T>(kk(minus, plus));
  in.observables = {Mat<T>::Identity(4, 4), qx_op, qz_op};
  in.labels = {"trace", "qx", "qz"};
  in.observed = {false, true, true};
  in.probabilities = Vec<Real>(3);
  in.probabilities << Real(1), qx, qz;
  in.key_map = KrausMap<T>::identity(4);
  in.pinching = key_pinching<T>(2, 2);

  // Bell-diagonal state with independent bit and phase errors.
  const Vec<T> phip = T(r) * (kk(k0, k0) + kk(k1, k1)), phim = T(r) * (kk(k0, k0) - kk(k1, k1));
  const Vec<T> psip = T(r) * (kk(k0, k1) + kk(k1, k0)), psim = T(r) * (kk(k0, k1) - kk(k1, k0));
  const Real one(1);
  in.generating_state = T((one - qx) * (one - qz)) * proj<T>(phip) + T(qx * (one - qz)) * proj<T>(phim) +
                        T(qz * (one - qx)) * proj<T>(psip) + T(qx * qz) * proj<T>(psim);
  in.support = bb84_support<T>(qx, qz);

  in.key_table = Mat<Real>(2, 2);
  in.key_table << (one - qz) / Real(2), qz / Real(2), qz / Real(2), (one - qz) / Real(2);
  in.parameters = {{"qx", to_string(qx)}, {"qz", to_string(qz)}};
  return in;
}

template <typename T>
ProtocolInstance<T> mub(int d, RealOf<T> v, int num_bases) {
  using Real = RealOf<T>;
  using C = std::complex<Real>;
  using std::cos;
  using std::sin;
  using std::sqrt;
  if (!is_prime(d)) throw DomainError("mub: d = " + std::to_string(d) + " is not prime (unsupported)");
  if (!(v > Real(0) && v <= Real(1))) throw DomainError("mub: visibility outside (0, 1]");
  if (num_bases < 0) num_bases = d + 1;
  if (num_bases < 1 || num_bases > d + 1) throw DomainError("mub: num_bases must be in [1, d + 1]");

  // Bases as complex vectors: computational, then the quadratic-phase family
  // (X and Y for d = 2).
  std::vector<std::vector<std::vector<C>>> bases;
  const Real inv = Real(1) / sqrt(Real(d));
  {
    std::vector<std::vector<C>> comp(std::size_t(d), std::vector<C>(std::size_t(d), C(0)));
    for (int j = 0; j < d; ++j) comp[std::size_t(j)][std::size_t(j)] = C(1);
    bases.push_back(comp);
  }
  if (d == 2) {
    bases.push_back({{C(inv), C(inv)}, {C(inv), C(-inv)}});
    bases.push_back({{C(inv), C(0, inv)}, {C(inv), C(0, -inv)}});
  } else {
    const Real two_pi = boost::math::constants::two_pi<Real>();
    for (int k = 0; k < d; ++k) {
      std::vector<std::vector<C>> b;
      for (int j = 0; j < d; ++j) {
        std::vector<C> vec;
        for (int x = 0; x < d; ++x) {
          const int phase = (k * x * x + j * x) % d;
          const Real ang = two_pi * Real(phase) / Real(d);
          vec.emplace_back(inv * cos(ang), inv * sin(ang));
        }
        b.push_back(vec);
      }
      bases.push_back(b);
    }
  }

  const Index D = Index(d);
  bool lossy = false;
  std::vector<std::vector<Vec<T>>> alice, bob;
  for (int b = 0; b < num_bases; ++b) {
    std::vector<Vec<T>> av, bv;
    for (const auto& vec : bases[std::size_t(b)]) {
      Vec<T> a(D), c(D);
      for (Index x = 0; x < D; ++x) {
        a(x) = from_complex<T>(vec[std::size_t(x)], lossy);
        c(x) = from_complex<T>(std::conj(vec[std::size_t(x)]), lossy);
      }
      av.push_back(a);
      bv.push_back(c);
    }
    alice.push_back(av);
    bob.push_back(bv);
  }
  if (lossy) throw DomainError("mub: the requested bases are complex; use a complex field");

  ProtocolInstance<T> in;
  in.name = "mub";
  in.dim_a = in.dim_b = D;
  const Mat<T> rho = isotropic_state<T>(D, v);
  in.generating_state = rho;
  in.observables.push_back(Mat<T>::Identity(D * D, D * D));
  in.labels.push_back("trace");
  in.observed.push_back(false);
  for (int b = 0; b < num_bases; ++b) {
    Mat<T> agree = Mat<T>::Zero(D * D, D * D);
    for (Index j = 0; j < D; ++j)
      agree += kron<T>(proj<T>(alice[std::size_t(b)][std::size_t(j)]), proj<T>(bob[std::size_t(b)][std::size_t(j)]));
    in.observables.push_back(agree);
    in.labels.push_back("agree" + std::to_string(b));
    in.observed.push_back(true);
    in.basis_tables.push_back(joint_table<T>(alice[std::size_t(b)], bob[std::size_t(b)], rho));
  }
  in.probabilities = Vec<Real>(Index(in.observables.size()));
  for (std::size_t k = 0; k < in.observables.size(); ++k) in.probabilities(Index(k)) = expect<T>(in.observables[k], rho);
  in.key_map = KrausMap<T>::identity(D * D);
  in.pinching = key_pinching<T>(D, D);
  in.key_table = in.basis_tables.front();
  in.parameters = {{"d", std::to_string(d)}, {"v", to_string(v)}, {"num_bases", std::to_string(num_bases)}};
  return in;
}

template <typename T>
ProtocolInstance<T> overlap(int d, RealOf<T> v) {
  using Real = RealOf<T>;
  using std::sqrt;
  if (d < 2) throw DomainError("overlap: d must be at least 2");
  if (!(v > Real(0) && v <= Real(1))) throw DomainError("overlap: visibility outside (0, 1]");
  const Index D = Index(d);
  const Real r = Real(1) / sqrt(Real(2));

  ProtocolInstance<T> in;
  in.name = "overlap";
  in.dim_a = in.dim_b = D;
  const Mat<T> rho = isotropic_state<T>(D, v);
  in.generating_state = rho;
  std::vector<Vec<T>> comp;
  for (Index i = 0; i < D; ++i) comp.push_back(ket<T>(D, i));
  Mat<T> agree = Mat<T>::Zero(D * D, D * D);
  for (Index i = 0; i < D; ++i) agree += kron<T>(proj<T>(comp[std::size_t(i)]), proj<T>(comp[std::size_t(i)]));
  in.observables = {Mat<T>::Identity(D * D, D * D), agree};
  in.labels = {"trace", "agree_z"};
  in.observed = {false, true};
  for (Index i = 0; i + 1 < D; ++i)
    for (int s : {1, -1}) {
      // Real vectors: Bob's conjugate projector equals Alice's.
      const Vec<T> sup = T(r) * (ket<T>(D, i) + T(Real(s)) * ket<T>(D, i + 1));
      in.observables.push_back(kron<T>(proj<T>(sup), proj<T>(sup)));
      in.labels.push_back(std::string(s > 0 ? "plus" : "minus") + std::to_string(i));
      in.observed.push_back(true);
    }
  in.probabilities = Vec<Real>(Index(in.observables.size()));
  for (std::size_t k = 0; k < in.observables.size(); ++k) in.probabilities(Index(k)) = expect<T>(in.observables[k], rho);
  in.key_map = KrausMap<T>::identity(D * D);
  in.pinching = key_pinching<T>(D, D);
  in.key_table = joint_table<T>(comp, comp, rho);
  in.basis_tables = {in.key_table};
  in.parameters = {{"d", std::to_string(d)}, {"v", to_string(v)}};
  return in;
}

template <typename T>
ProtocolInstance<T> povm_keyed(const std::vector<Mat<T>>& povm, Index dim_a, std::vector<Mat<T>> observables,
                               Vec<RealOf<T>> probabilities, Mat<RealOf<T>> key_table) {
  if (povm.empty()) throw DomainError("povm_keyed: empty POVM");
  ProtocolInstance<T> in;
  in.name = "povm_keyed";
  in.dim_a = dim_a;
  in.dim_b = povm.front().rows();
  auto full = naimark_full_maps<T>(povm, dim_a);
  in.key_map = std::move(full.first);
  in.pinching = std::move(full.second);
  in.reduced_maps = naimark_key_maps<T>(povm, dim_a);
  in.observables = std::move(observables);
  in.probabilities = std::move(probabilities);
  for (std::size_t k = 0; k < in.observables.size(); ++k) {
    in.labels.push_back("e" + std::to_string(k));
    in.observed.push_back(true);
  }
  in.key_table = std::move(key_table);
  in.parameters = {{"outcomes", std::to_string(povm.size())}, {"dim_a", std::to_string(dim_a)}};
  in.validate();
  return in;
}

template <typename T>
ProtocolInstance<T> with_experimental_data(ProtocolInstance<T> instance, Vec<RealOf<T>> f, Mat<RealOf<T>> sigma,
                                           RealOf<T> chi) {
  instance.experimental = ExperimentalData<RealOf<T>>{std::move(f), std::move(sigma), chi};
  inverse_sqrt_spd<RealOf<T>>(instance.experimental->sigma);  // rejects singular covariances early
  instance.name += "+experimental";
  instance.validate();
  return instance;
}

template <typename T>
ReductionCertificate<T> reduce_instance(const ProtocolInstance<T>& in, const KeyRateOptions<RealOf<T>>& opts) {
  using Real = RealOf<T>;
  using std::sqrt;
  in.validate();
  const Index n = in.dim();
  const Mat<T> eye = Mat<T>::Identity(n, n);

  if (in.experimental || !opts.facial_reduction) {
    if (!in.experimental && !strictly_feasible(in, opts))
      throw DomainError(in.name + ": feasible states are rank deficient; the unreduced problem is not strictly feasible");
    ReductionCertificate<T> cert;
    cert.V = eye;
    cert.F = in.observables;
    cert.p = in.probabilities;
    for (std::size_t k = 0; k < in.observables.size(); ++k) cert.kept_rows.push_back(Index(k));
    if (in.reduced_maps) {
      cert.ghat = in.reduced_maps->first;
      cert.zhat = in.reduced_maps->second;
    } else {
      cert.ghat = canonical_ghat<T>(reduce_map<T>(in.key_map, eye, opts.rank_tol), Real(1e-12));
      cert.zhat = reduce_map<T>(in.key_map.then(in.pinching), eye, opts.rank_tol);
    }
    cert.witness = in.generating_state ? *in.generating_state : Mat<T>(eye / T(Real(n)));
    cert.full_dim = cert.reduced_dim = n;
    cert.method = "none";
    return cert;
  }

  ReductionInputs<T> ri;
  ri.E = in.observables;
  ri.p = in.probabilities;
  ri.G = in.key_map;
  ri.Z = in.pinching;
  ri.reduced_maps = in.reduced_maps;
  if (in.support && in.generating_state) {
    ri.support = in.support;
    ri.support_witness = in.generating_state;
  } else if (in.generating_state) {
    // A positive definite feasible state certifies full support.
    const auto e = eig_hermitian<T>(*in.generating_state);
    if (e.lambda(0) > sqrt(machine_epsilon<Real>()) * e.lambda(n - 1)) {
      ri.support = eye;
      ri.support_witness = in.generating_state;
    }
  }
  return reduce_problem<T>(ri, opts.solver, opts.rank_tol);
}

template <typename T>
ConicProblem<T> build_qkd_problem(const ReductionCertificate<T>& cert,
                                  const std::optional<ExperimentalData<RealOf<T>>>& experimental,
                                  const std::vector<bool>& observed) {
  using Real = RealOf<T>;
  const Index r = cert.reduced_dim;
  const Index nsv = svec_length(r, field_mode_of<T>());
  ConicProblem<T> p;
  p.cones = {ConeDescriptor<T>::qkd(cert.ghat, cert.zhat)};
  const Index nrows = Index(cert.F.size());

  if (!experimental) {
    p.c = Vec<Real>::Zero(1 + nsv);
    p.c(0) = Real(1);
    p.A = Mat<Real>::Zero(nrows, 1 + nsv);
    for (Index k = 0; k < nrows; ++k) p.A.row(k).tail(nsv) = svec<T>(cert.F[std::size_t(k)]).transpose();
    p.b = cert.p;
    return p;
  }

  // Observed rows (by original index) move into w = Sigma^(-1/2) (F(sigma) - f), |w| <= t = chi.
  std::vector<Index> exact, obs;
  for (std::size_t j = 0; j < cert.F.size(); ++j) {
    const Index orig = cert.kept_rows.empty() ? Index(j) : cert.kept_rows[j];
    const bool is_obs = observed.empty() || observed[std::size_t(orig)];
    (is_obs ? obs : exact).push_back(Index(j));
  }
  const Index K = Index(obs.size());
  if (experimental->frequencies.size() != K) throw DimensionError("experimental data: one frequency per observed row");
  const Mat<Real> s = inverse_sqrt_spd<Real>(experimental->sigma);
  p.cones.push_back(ConeDescriptor<T>::second_order(1 + K));
  const Index nvar = 1 + nsv + 1 + K;
  p.c = Vec<Real>::Zero(nvar);
  p.c(0) = Real(1);
  p.A = Mat<Real>::Zero(Index(exact.size()) + 1 + K, nvar);
  p.b = Vec<Real>::Zero(p.A.rows());
  Index row = 0;
  for (Index j : exact) {
    p.A.row(row).segment(1, nsv) = svec<T>(cert.F[std::size_t(j)]).transpose();
    p.b(row) = cert.p(j);
    ++row;
  }
  p.A(row, 1 + nsv) = Real(1);
  p.b(row) = experimental->chi;
  ++row;
  Mat<Real> fobs(K, nsv);
  for (Index i = 0; i < K; ++i) fobs.row(i) = svec<T>(cert.F[std::size_t(obs[std::size_t(i)])]).transpose();
  const Vec<Real> sf = s * experimental->frequencies;
  for (Index i = 0; i < K; ++i) {
    p.A(row, 1 + nsv + 1 + i) = Real(1);
    p.A.row(row).segment(1, nsv) = -(s.row(i) * fobs);
    p.b(row) = -sf(i);
    ++row;
  }
  return p;
}

template <typename T>
ConicProblem<T> build_re_problem(const std::vector<Mat<T>>& E, const Vec<RealOf<T>>& p, const KrausMap<T>& pinching) {
  using Real = RealOf<T>;
  if (E.empty()) throw DimensionError("build_re_problem: no constraints");
  const Index n = E.front().rows();
  if (pinching.in_dim() != n || pinching.out_dim() != n)
    throw DimensionError("build_re_problem: pinching must act on the state space");
  const Index nsv = svec_length(n, field_mode_of<T>());
  const Mat<Real> zmat = pinching.matrix().matrix;
  ConicProblem<T> prob;
  prob.cones = {ConeDescriptor<T>::rel_entropy(n)};
  prob.c = Vec<Real>::Zero(1 + 2 * nsv);
  prob.c(0) = Real(1);
  const Index m = Index(E.size());
  prob.A = Mat<Real>::Zero(m + nsv, 1 + 2 * nsv);
  prob.b = Vec<Real>::Zero(m + nsv);
  for (Index k = 0; k < m; ++k) {
    prob.A.row(k).segment(1, nsv) = svec<T>(E[std::size_t(k)]).transpose();
    prob.b(k) = p(k);
  }
  prob.A.block(m, 1, nsv, nsv) = -zmat;
  prob.A.block(m, 1 + nsv, nsv, nsv) = Mat<Real>::Identity(nsv, nsv);
  return prob;
}

template <typename T>
bool strictly_feasible(const ProtocolInstance<T>& in, const KeyRateOptions<RealOf<T>>& opts) {
  const auto sup = find_state_support<T>(in.observables, in.probabilities, in.dim(), opts.solver, opts.rank_tol);
  return sup.rank == in.dim();
}

template <typename T>
KeyRateResult<RealOf<T>> key_rate(const ProtocolInstance<T>& in, const KeyRateOptions<RealOf<T>>& opts) {
  using Real = RealOf<T>;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cert = reduce_instance(in, opts);
  KeyRateResult<Real> res;
  res.full_dim = cert.full_dim;
  res.reduced_dim = cert.reduced_dim;
  res.unique_state = cert.unique_state && !in.experimental;
  res.reduction_method = cert.method;

  const Real nats_per_bit = ln2<Real>();
  if (res.unique_state) {
    const QkdCone<T> cone(cert.ghat, cert.zhat);
    const Real h = cone.entropy_gap(cert.witness);
    res.h_ae = res.h_ae_dual = h / nats_per_bit;
    res.report.status = SolveStatus::optimal;
    res.report.primal_obj = res.report.dual_obj = h;
    res.report.message = "feasible state is unique";
    res.converged = true;
    res.setup_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } else {
    const auto prob = build_qkd_problem<T>(cert, in.experimental, in.observed);
    res.setup_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.report = solve(prob, opts.solver);
    res.solved = true;
    res.converged = res.report.status == SolveStatus::optimal || res.report.status == SolveStatus::near_optimal;
    res.h_ae = res.report.primal_obj / nats_per_bit;
    res.h_ae_dual = res.report.dual_obj / nats_per_bit;
  }
  res.h_ab = in.key_table.size() ? conditional_entropy_AB<Real>(in.key_table) : Real(0);
  res.devetak_winter = res.h_ae - res.h_ab;
  return res;
}

#define QKDRATE_INSTANTIATE(R)                   \
  template R binary_entropy<R>(R);               \
  template R conditional_entropy_AB<R>(const Mat<R>&);
QKDRATE_FOR_EACH_REAL(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

#define QKDRATE_INSTANTIATE(T)                                                                                       \
  template struct ProtocolInstance<T>;                                                                               \
  template Mat<T> isotropic_state<T>(Index, RealOf<T>);                                                              \
  template ProtocolInstance<T> bb84<T>(RealOf<T>, RealOf<T>);                                                        \
  template ProtocolInstance<T> mub<T>(int, RealOf<T>, int);                                                          \
  template ProtocolInstance<T> overlap<T>(int, RealOf<T>);                                                           \
  template ProtocolInstance<T> povm_keyed<T>(const std::vector<Mat<T>>&, Index, std::vector<Mat<T>>,                 \
                                             Vec<RealOf<T>>, Mat<RealOf<T>>);                                        \
  template ProtocolInstance<T> with_experimental_data<T>(ProtocolInstance<T>, Vec<RealOf<T>>, Mat<RealOf<T>>,        \
                                                         RealOf<T>);                                                 \
  template ReductionCertificate<T> reduce_instance<T>(const ProtocolInstance<T>&, const KeyRateOptions<RealOf<T>>&); \
  template ConicProblem<T> build_qkd_problem<T>(const ReductionCertificate<T>&,                                      \
                                                const std::optional<ExperimentalData<RealOf<T>>>&,                   \
                                                const std::vector<bool>&);                                           \
  template ConicProblem<T> build_re_problem<T>(const std::vector<Mat<T>>&, const Vec<RealOf<T>>&,                   \
                                               const KrausMap<T>&);                                                  \
  template bool strictly_feasible<T>(const ProtocolInstance<T>&, const KeyRateOptions<RealOf<T>>&);                  \
  template KeyRateResult<RealOf<T>> key_rate<T>(const ProtocolInstance<T>&, const KeyRateOptions<RealOf<T>>&);
QKDRATE_FOR_EACH_ENTRY(QKDRATE_INSTANTIATE)
#undef QKDRATE_INSTANTIATE

}  // namespace qkdrate
