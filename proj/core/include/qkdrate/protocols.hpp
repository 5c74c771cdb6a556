#pragma once

// Protocol builders and the key-rate pipeline.
//
// An instance lists expectation constraints tr(E_k rho) = p_k on the joint
// state of A and B, the key map G and the pinching Z that reads the key out.
// key_rate reduces the instance to a strictly feasible problem over the QKD
// cone, solves it and returns H(A|E) - H(A|B) in bits.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkdrate/facial_reduction.hpp"
#include "qkdrate/ipm_solver.hpp"

namespace qkdrate {

template <typename Real>
struct ExperimentalData {
  Vec<Real> frequencies;  // one per observed constraint, in order
  Mat<Real> sigma;        // covariance, symmetric positive definite
  Real chi{0};
};

template <typename T>
struct ProtocolInstance {
  using Real = RealOf<T>;

  std::string name;
  Index dim_a = 0;
  Index dim_b = 0;
  std::vector<Mat<T>> observables;
  Vec<Real> probabilities;
  std::vector<std::string> labels;
  std::vector<bool> observed;  // false for rows kept exact under experimental data (normalization)
  KrausMap<T> key_map;
  KrausMap<T> pinching;
  std::optional<Mat<T>> generating_state;
  std::optional<Mat<T>> support;  // analytic isometry; generating_state must lie on it
  std::optional<std::pair<KrausMap<T>, KrausMap<T>>> reduced_maps;  // (G^, Z^) valid without state reduction
  Mat<Real> key_table;  // joint distribution of the raw key, rows A, columns B; empty if unknown
  std::vector<Mat<Real>> basis_tables;
  std::optional<ExperimentalData<Real>> experimental;
  std::map<std::string, std::string> parameters;

  Index dim() const { return dim_a * dim_b; }
  /// Throws DimensionError / DomainError on malformed data.
  void validate() const;
};

/// Isotropic two-qudit state v |phi+><phi+| + (1 - v) I / d^2.
template <typename T>
Mat<T> isotropic_state(Index d, RealOf<T> v);

/// Binary entropy in bits.
template <typename Real>
Real binary_entropy(Real p);

/// H(A|B) = H(AB) - H(B) in bits for a joint table with rows indexed by A.
template <typename Real>
Real conditional_entropy_AB(const Mat<Real>& joint);

/// Two-qubit BB84 with phase and bit error rates q_x, q_z; key from Alice's
/// Z measurement. The support of the feasible states is supplied analytically.
template <typename T>
ProtocolInstance<T> bb84(RealOf<T> qx, RealOf<T> qz);

/// Agreement statistics of num_bases mutually unbiased bases (computational
/// first) for prime d, Bob measuring the conjugate bases, from an isotropic
/// state. num_bases < 0 means all d + 1.
template <typename T>
ProtocolInstance<T> mub(int d, RealOf<T> v, int num_bases = -1);

/// Computational-basis agreement plus joint "both project onto
/// (|i> +- |i+1>)/sqrt 2" probabilities for i = 0..d-2, from an isotropic state.
template <typename T>
ProtocolInstance<T> overlap(int d, RealOf<T> v);

/// Key read from a POVM on B through its Naimark dilation; constraints are
/// supplied by the caller. The key table, if given, feeds H(A|B).
template <typename T>
ProtocolInstance<T> povm_keyed(const std::vector<Mat<T>>& povm, Index dim_a, std::vector<Mat<T>> observables,
                               Vec<RealOf<T>> probabilities, Mat<RealOf<T>> key_table = {});

/// Replaces the observed probabilities by variables constrained to the
/// ellipsoid |Sigma^(-1/2) (p - f)| <= chi.
template <typename T>
ProtocolInstance<T> with_experimental_data(ProtocolInstance<T> instance, Vec<RealOf<T>> f, Mat<RealOf<T>> sigma,
                                           RealOf<T> chi);

template <typename Real>
struct KeyRateOptions {
  SolverOptions<Real> solver = SolverOptions<Real>::defaults();
  Real rank_tol{-1};
  /// Off: the instance is solved as given, which is refused unless its
  /// feasible set already contains a full-rank state.
  bool facial_reduction = true;
};

template <typename Real>
struct KeyRateResult {
  Real h_ae{0};       // primal objective, bits
  Real h_ae_dual{0};  // dual objective, bits; the certified lower bound
  Real h_ab{0};
  Real devetak_winter{0};
  SolveReport<Real> report;
  bool solved = false;        // a conic solve ran (false for unique-state evaluations)
  bool converged = false;
  Index full_dim = 0;
  Index reduced_dim = 0;
  bool unique_state = false;
  std::string reduction_method;
  double setup_seconds = 0;
};

template <typename T>
ReductionCertificate<T> reduce_instance(const ProtocolInstance<T>& instance, const KeyRateOptions<RealOf<T>>& opts);

/// min h s.t. tr(F_k sigma) = p_k, (h, sigma) in the QKD cone of (G^, Z^); with
/// experimental data the observed rows become the second-order-cone block.
template <typename T>
ConicProblem<T> build_qkd_problem(const ReductionCertificate<T>& cert,
                                  const std::optional<ExperimentalData<RealOf<T>>>& experimental = std::nullopt,
                                  const std::vector<bool>& observed = {});

/// The same minimum through the relative entropy cone for G = id:
/// min h s.t. (h, X, Y) in K_RE, Y = Z(X), tr(E_k X) = p_k.
template <typename T>
ConicProblem<T> build_re_problem(const std::vector<Mat<T>>& E, const Vec<RealOf<T>>& p, const KrausMap<T>& pinching);

/// Whether the feasible states include a full-rank one (numeric support test).
template <typename T>
bool strictly_feasible(const ProtocolInstance<T>& instance, const KeyRateOptions<RealOf<T>>& opts);

template <typename T>
KeyRateResult<RealOf<T>> key_rate(const ProtocolInstance<T>& instance,
                                  const KeyRateOptions<RealOf<T>>& opts = KeyRateOptions<RealOf<T>>{});

}  // namespace qkdrate
