#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "qkdrate/ipm_solver.hpp"

using namespace qkdrate;
using cd = std::complex<double>;

namespace {

template <typename T>
SolverOptions<RealOf<T>> opts() {
  return SolverOptions<RealOf<T>>::defaults();
}

ConicProblem<double> small_lp() {
  ConicProblem<double> p;
  p.c = Vec<double>(3);
  p.c << 1, 2, 3;
  p.A = Mat<double>(2, 3);
  p.A << 1, 1, 1,  //
      1, -1, 0;
  p.b = Vec<double>(2);
  p.b << 1, 0.2;
  p.cones = {ConeDescriptor<double>::nonneg(3)};
  return p;
}

// Binary entropy in nats.
template <typename Real>
Real hnat(const Real& p) {
  using std::log;
  if (p <= Real(0) || p >= Real(1)) return Real(0);
  return -p * log(p) - (Real(1) - p) * log(Real(1) - p);
}

// min over qubit states with tr = 1 and <X> = x of H(diag sigma) - H(sigma).
template <typename T>
ConicProblem<T> qubit_problem(const RealOf<T>& x) {
  using Real = RealOf<T>;
  Mat<T> pinch0 = Mat<T>::Zero(2, 2), pinch1 = Mat<T>::Zero(2, 2);
  pinch0(0, 0) = T(1);
  pinch1(1, 1) = T(1);
  ConicProblem<T> p;
  const auto cone = ConeDescriptor<T>::qkd(KrausMap<T>::identity(2), KrausMap<T>({pinch0, pinch1}));
  const Index nsv = svec_length(2, field_mode_of<T>());
  p.cones = {cone};
  p.c = Vec<Real>::Zero(1 + nsv);
  p.c(0) = Real(1);
  Mat<T> xop = Mat<T>::Zero(2, 2);
  xop(0, 1) = xop(1, 0) = T(1);
  p.A = Mat<Real>::Zero(2, 1 + nsv);
  p.A.row(0).tail(nsv) = svec<T>(Mat<T>(Mat<T>::Identity(2, 2))).transpose();
  p.A.row(1).tail(nsv) = svec<T>(xop).transpose();
  p.b = Vec<Real>(2);
  p.b << Real(1), x;
  return p;
}

}  // namespace

TEST(IpmSolver, SmallLinearProgram) {
  // x1 - x2 = 0.2 with x on the simplex: cheapest is x = (0.6, 0.4, 0), value 1.4.
  const auto rep = solve(small_lp(), opts<double>());
  ASSERT_EQ(rep.status, SolveStatus::optimal) << rep.message;
  EXPECT_NEAR(rep.primal_obj, 1.4, 1e-7);
  EXPECT_NEAR(rep.dual_obj, 1.4, 1e-7);
  EXPECT_NEAR(rep.x_opt(0), 0.6, 1e-6);
  EXPECT_NEAR(rep.x_opt(2), 0.0, 1e-6);
  // Dual feasibility in the original rows: c - A'y is nonnegative.
  const Vec<double> s = small_lp().c - small_lp().A.transpose() * rep.y_opt;
  EXPECT_GT(s.minCoeff(), -1e-7);
  EXPECT_LE(dual_lower_bound(rep), rep.primal_obj + 1e-8);
}

TEST(IpmSolver, DuplicateRowsAreDroppedAndMultipliersRecovered) {
  auto p = small_lp();
  p.A.conservativeResize(3, 3);
  p.b.conservativeResize(3);
  p.A.row(2) = 3.0 * p.A.row(0);
  p.b(2) = 3.0;
  const auto pre = preprocess(p, opts<double>());
  EXPECT_TRUE(pre.consistent);
  EXPECT_EQ(pre.kept_rows.size(), 2u);
  const auto rep = solve(p, opts<double>());
  ASSERT_EQ(rep.status, SolveStatus::optimal);
  EXPECT_EQ(rep.rows_dropped, 1);
  EXPECT_NEAR(rep.primal_obj, 1.4, 1e-7);
  ASSERT_EQ(rep.y_opt.size(), 3);
  const Vec<double> s = p.c - p.A.transpose() * rep.y_opt;
  EXPECT_NEAR(s.dot(rep.x_opt), 0.0, 1e-6);
}

TEST(IpmSolver, InconsistentRowsAreInfeasible) {
  auto p = small_lp();
  p.A.conservativeResize(3, 3);
  p.b.conservativeResize(3);
  p.A.row(2) = p.A.row(0);
  p.b(2) = 0.9;
  const auto rep = solve(p, opts<double>());
  EXPECT_EQ(rep.status, SolveStatus::infeasible_detected);
  EXPECT_THROW(dual_lower_bound(rep), ContractViolation);
}

TEST(IpmSolver, ConicInfeasibilityCertificate) {
  // Linearly consistent but no nonnegative solution.
  auto p = small_lp();
  p.b(0) = -1;
  const auto rep = solve(p, opts<double>());
  EXPECT_EQ(rep.status, SolveStatus::infeasible_detected) << rep.message;
}

TEST(IpmSolver, SecondOrderCone) {
  ConicProblem<double> p;
  p.cones = {ConeDescriptor<double>::second_order(3)};
  p.c = Vec<double>::Unit(3, 0);
  p.A = Mat<double>::Zero(2, 3);
  p.A(0, 1) = 1;
  p.A(1, 2) = 1;
  p.b = Vec<double>(2);
  p.b << 1, 1;
  const auto rep = solve(p, opts<double>());
  ASSERT_EQ(rep.status, SolveStatus::optimal);
  EXPECT_NEAR(rep.primal_obj, std::sqrt(2.0), 1e-7);
}

TEST(IpmSolver, QubitEntropyProblemMatchesClosedForm) {
  for (double e : {0.01, 0.05, 0.11}) {
    const double x = 1 - 2 * e;
    const auto rep = solve(qubit_problem<double>(x), opts<double>());
    ASSERT_EQ(rep.status, SolveStatus::optimal) << rep.message;
    const double expect = std::log(2.0) - hnat(e);
    EXPECT_NEAR(rep.primal_obj, expect, 1e-7);
    EXPECT_NEAR(rep.dual_obj, expect, 1e-7);
    EXPECT_LE(rep.dual_obj, expect + 1e-8);
  }
}

TEST(IpmSolver, QubitClosedFormAgreesWithBruteForceScan) {
  // Independent check that the closed form really is the minimum: scan the
  // remaining Bloch coordinates.
  const double x = 0.8;
  double best = 1e9;
  for (int i = -200; i <= 200; ++i)
    for (int j = -50; j <= 50; ++j) {
      const double z = 0.6 * i / 200.0, y = 0.6 * j / 50.0;
      const double r = std::sqrt(x * x + y * y + z * z);
      if (r >= 1) continue;
      best = std::min(best, hnat((1 + z) / 2) - hnat((1 + r) / 2));
    }
  EXPECT_NEAR(best, std::log(2.0) - hnat(0.1), 1e-12);
}

TEST(IpmSolver, ComplexModeAgrees) {
  const auto re = solve(qubit_problem<double>(0.9), opts<double>());
  const auto cx = solve(qubit_problem<cd>(0.9), opts<cd>());
  ASSERT_EQ(cx.status, SolveStatus::optimal);
  EXPECT_NEAR(re.primal_obj, cx.primal_obj, 1e-8);
}

TEST(IpmSolver, ThirdOrderCorrectionDoesNotChangeTheAnswer) {
  auto o = opts<double>();
  const auto with = solve(qubit_problem<double>(0.7), o);
  o.third_order = false;
  const auto without = solve(qubit_problem<double>(0.7), o);
  ASSERT_EQ(with.status, SolveStatus::optimal);
  ASSERT_EQ(without.status, SolveStatus::optimal);
  EXPECT_NEAR(with.primal_obj, without.primal_obj, 1e-8);
}

TEST(IpmSolver, DenseInverseHessianModeAgrees) {
  auto o = opts<double>();
  o.hessian_mode = InverseHessianMode::dense;
  const auto dense = solve(qubit_problem<double>(0.7), o);
  const auto fast = solve(qubit_problem<double>(0.7), opts<double>());
  ASSERT_EQ(dense.status, SolveStatus::optimal);
  EXPECT_NEAR(dense.primal_obj, fast.primal_obj, 1e-8);
}

TEST(IpmSolver, Deterministic) {
  const auto a = solve(qubit_problem<double>(0.75), opts<double>());
  const auto b = solve(qubit_problem<double>(0.75), opts<double>());
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.primal_obj, b.primal_obj);
  EXPECT_EQ(a.dual_obj, b.dual_obj);
  EXPECT_EQ(a.x_opt, b.x_opt);
}

TEST(IpmSolver, IterationLogIsRecorded) {
  const auto rep = solve(qubit_problem<double>(0.75), opts<double>());
  ASSERT_EQ(rep.status, SolveStatus::optimal);
  EXPECT_EQ(int(rep.log.size()), rep.iterations);
  EXPECT_LT(rep.iterations, 60);
  EXPECT_LT(rep.log.back().mu, rep.log.front().mu);
}

TEST(IpmSolver, IterationLimitIsReported) {
  auto o = opts<double>();
  o.max_iter = 2;
  const auto rep = solve(qubit_problem<double>(0.75), o);
  EXPECT_EQ(rep.status, SolveStatus::iteration_limit);
}

TEST(IpmSolver, ExtendedPrecisionReachesTighterTolerance) {
  const Extended e("0.05");
  const Extended x = Extended(1) - 2 * e;
  auto o = opts<Extended>();
  o.tol_gap = Extended("1e-20");
  o.tol_feas = Extended("1e-20");
  const auto rep = solve(qubit_problem<Extended>(x), o);
  ASSERT_EQ(rep.status, SolveStatus::optimal) << rep.message;
  const Extended expect = log(Extended(2)) - hnat(e);
  EXPECT_LT(to_double(abs(rep.primal_obj - expect)), 1e-18);
  EXPECT_LT(to_double(abs(rep.dual_obj - expect)), 1e-18);
}

TEST(IpmSolver, MalformedProblemsThrow) {
  auto p = small_lp();
  p.c.resize(2);
  EXPECT_THROW(solve(p, opts<double>()), DimensionError);
}
