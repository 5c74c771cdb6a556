#pragma once

// Restriction of a key-rate problem to the support of its feasible states and
// of the key maps' ranges, so the conic problem handed to the solver is
// strictly feasible.
//
// Pipeline: find_state_support gives an isometry V with every feasible rho of
// the form V sigma V^dag; reduce_constraints rewrites tr(E_k rho) = p_k as
// tr(F_k sigma) = p_k and drops what became redundant; reduce_map restricts
// sigma -> G(V sigma V^dag) and sigma -> Z(G(V sigma V^dag)) to the support of
// their ranges. Entropies are unchanged by the last step.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkdrate/herm_vec.hpp"
#include "qkdrate/ipm_solver.hpp"

namespace qkdrate {

/// Default relative eigenvalue threshold n * eps^(3/4).
template <typename Real>
Real default_rank_tol(Index n);

template <typename T>
bool is_isometry(const Mat<T>& v, RealOf<T> tol);

template <typename T>
struct SupportResult {
  Mat<T> V;                  // n x r isometry spanning the support
  Mat<T> max_rank_state;     // a feasible state of maximal rank, n x n
  Index rank = 0;
  RealOf<T> threshold{0};    // absolute eigenvalue cut used
  RealOf<T> margin{0};       // optimal t of the auxiliary problem (0 when rank deficient)
  std::string method;        // "numeric" or "analytic"
};

/// Maximal-rank feasible state of {rho >= 0 : tr(E_k rho) = p_k} through the
/// auxiliary problem  max t  s.t.  rho - t I >= 0,  tr(E_k rho) = p_k,  whose
/// central path ends in the relative interior of the optimal face. Requires
/// the constraints to fix the trace. Throws InfeasibleError when no state
/// satisfies the constraints.
template <typename T>
SupportResult<T> find_state_support(const std::vector<Mat<T>>& E, const Vec<RealOf<T>>& p, Index dim,
                                    const SolverOptions<RealOf<T>>& opts, RealOf<T> rank_tol = RealOf<T>(-1));

template <typename T>
struct ReducedConstraints {
  std::vector<Mat<T>> F;
  Vec<RealOf<T>> p;
  std::vector<Index> kept;     // indices into the input list
  std::vector<Index> dropped;
};

/// F_k = V^dag E_k V; rows that are zero or linear combinations of earlier
/// kept rows are dropped after checking they are consistent. Throws
/// InfeasibleError on an inconsistent dropped row.
template <typename T>
ReducedConstraints<T> reduce_constraints(const Mat<T>& V, const std::vector<Mat<T>>& E, const Vec<RealOf<T>>& p,
                                         RealOf<T> tol);

/// Kraus operators W^dag K_i V where, per output block, W spans the range of
/// the block applied to the identity (coordinate selection when that range is
/// already full). Throws DomainError when the whole range is zero.
template <typename T>
KrausMap<T> reduce_map(const KrausMap<T>& map, const Mat<T>& V, RealOf<T> rank_tol = RealOf<T>(-1));

/// A single unitary Kraus operator leaves every entropy unchanged; such a G
/// is replaced by the identity.
template <typename T>
KrausMap<T> canonical_ghat(const KrausMap<T>& ghat, RealOf<T> tol);

/// Naimark dilation V = sum_i 1_A (x) sqrt(E_i) (x) |i> of a POVM on B. Returns
/// (G^, Z^) with G^ the identity on A(x)B and Z^ with Kraus operators
/// 1_A (x) sqrt(E_i) (x) |i>, reduced when some E_i is rank deficient.
template <typename T>
std::pair<KrausMap<T>, KrausMap<T>> naimark_key_maps(const std::vector<Mat<T>>& E, Index dim_a,
                                                     RealOf<T> tol = RealOf<T>(1e-10));

/// The dilation itself, G(rho) = V rho V^dag and Z with Kraus 1 (x) 1 (x) |i><i|.
template <typename T>
std::pair<KrausMap<T>, KrausMap<T>> naimark_full_maps(const std::vector<Mat<T>>& E, Index dim_a,
                                                      RealOf<T> tol = RealOf<T>(1e-10));

template <typename T>
struct ReductionCertificate {
  Mat<T> V;
  std::vector<Mat<T>> F;
  Vec<RealOf<T>> p;
  std::vector<Index> kept_rows;
  std::vector<Index> dropped_rows;
  KrausMap<T> ghat;
  KrausMap<T> zhat;
  Mat<T> witness;            // positive definite, on the reduced space, satisfies the reduced constraints
  Index full_dim = 0;
  Index reduced_dim = 0;
  bool unique_state = false; // the reduced constraints determine sigma
  std::string method;
  RealOf<T> threshold{0};

  /// The unreduced problem was already strictly feasible.
  bool full_support() const { return reduced_dim == full_dim; }
};

template <typename T>
struct ReductionInputs {
  std::vector<Mat<T>> E;
  Vec<RealOf<T>> p;
  KrausMap<T> G;                         // key map
  KrausMap<T> Z;                         // pinching applied after G
  std::optional<Mat<T>> support;         // analytic V, skips the auxiliary solve
  std::optional<Mat<T>> support_witness; // a feasible state on that support (full space)
  std::optional<std::pair<KrausMap<T>, KrausMap<T>>> reduced_maps;  // valid when V = I
};

template <typename T>
ReductionCertificate<T> reduce_problem(const ReductionInputs<T>& in, const SolverOptions<RealOf<T>>& opts,
                                       RealOf<T> rank_tol = RealOf<T>(-1));

/// Analytic supports of the two-qubit BB84 problem with QBERs q_x, q_z:
/// I_4 when both are positive, span{phi+, phi-} when q_z = 0, span{phi+, psi+}
/// when q_x = 0 and phi+ alone when both vanish.
template <typename T>
Mat<T> bb84_support(RealOf<T> qx, RealOf<T> qz);

}  // namespace qkdrate
