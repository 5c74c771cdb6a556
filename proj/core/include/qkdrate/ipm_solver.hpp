#pragma once

// Primal-dual path following on the homogeneous self-dual embedding of
//
//   minimize c'x  subject to  A x = b,  x in K_1 x ... x K_m
//
// using only primal barrier oracles (value, gradient, Hessian products,
// optionally third directional derivatives). Steps alternate between a
// predictor that follows the central path towards mu = 0 and centering steps;
// both are corrected along the second-order path curvature when every cone
// has a third-order oracle.

#include <string>
#include <vector>

#include "qkdrate/std_cones.hpp"

namespace qkdrate {

template <typename T>
struct ConicProblem {
  using Real = RealOf<T>;

  Vec<Real> c;
  Mat<Real> A;
  Vec<Real> b;
  std::vector<ConeDescriptor<T>> cones;

  Index num_vars() const;
  /// Throws DimensionError when shapes are inconsistent.
  void validate() const;
  /// Offset of each cone block inside x.
  std::vector<Index> offsets() const;
};

enum class SolveStatus { optimal, near_optimal, infeasible_detected, iteration_limit, numerical_failure };

std::string to_string(SolveStatus status);

template <typename Real>
struct SolverOptions {
  Real tol_gap;
  Real tol_feas;
  /// Relative pivot threshold for dropping dependent equality rows.
  Real rank_tol;
  int max_iter = 200;
  bool third_order = true;
  /// Neighbourhood radius for accepting iterates, and the radius below which
  /// a predictor step is attempted.
  Real eta{0.7};
  Real predict_radius{0.4};
  int refinement_steps = 2;
  InverseHessianMode hessian_mode = InverseHessianMode::automatic;

  /// Defaults: 1e-8 at double precision; sqrt(eps) otherwise.
  static SolverOptions defaults();
};

struct IterationRecord {
  int iteration = 0;
  char step = 'c';  // 'p' predictor, 'c' centering
  double alpha = 0;
  double mu = 0;
  double prox = 0;
  double primal_obj = 0;
  double dual_obj = 0;
  double primal_res = 0;
  double dual_res = 0;
};

template <typename Real>
struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  Real primal_obj{0};
  Real dual_obj{0};
  Real gap{0};
  Real primal_res{0};
  Real dual_res{0};
  int iterations = 0;
  Vec<Real> x_opt;
  Vec<Real> y_opt;  // multipliers of the original equality rows
  Vec<Real> s_opt;
  std::vector<IterationRecord> log;
  std::string message;
  double solve_seconds = 0;
  Index rows_dropped = 0;
  /// With infeasible_detected: the certificate shows the dual, not the primal,
  /// is infeasible (the primal is unbounded or infeasible).
  bool dual_infeasible = false;
};

/// Dual objective of a converged solve; a certified lower bound on the minimum
/// up to the gap tolerance.
template <typename Real>
Real dual_lower_bound(const SolveReport<Real>& report);

template <typename T>
struct PreprocessResult {
  ConicProblem<T> problem;       // independent, unit-norm rows
  std::vector<Index> kept_rows;  // indices into the original rows, ascending
  Vec<RealOf<T>> row_norms;      // norms of the kept original rows
  Index original_rows = 0;
  bool consistent = true;
  RealOf<T> inconsistency{0};    // largest relative residual of a dropped row

  /// Multipliers of the original rows from those of the processed rows.
  Vec<RealOf<T>> recover_dual(const Vec<RealOf<T>>& y) const;
};

template <typename T>
PreprocessResult<T> preprocess(const ConicProblem<T>& p, const SolverOptions<RealOf<T>>& opts);

template <typename T>
SolveReport<RealOf<T>> solve(const ConicProblem<T>& p, const SolverOptions<RealOf<T>>& opts);

}  // namespace qkdrate
