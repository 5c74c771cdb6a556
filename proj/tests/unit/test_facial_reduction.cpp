#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "qkdrate/errors.hpp"
#include "qkdrate/facial_reduction.hpp"
#include "qkdrate/protocols.hpp"
#include "oracles.hpp"
#include "random_matrices.hpp"

using namespace qkdrate;
using qkdrate::testing::apply_kraus;
using qkdrate::testing::random_density;
using qkdrate::testing::random_isometry;
using qkdrate::testing::random_pinching;
using qkdrate::testing::random_reduced_instance;
using qkdrate::testing::relative_entropy_oracle;
using C = std::complex<double>;

namespace {

Vec<C> bell(int which) {
  const double r = 1.0 / std::sqrt(2.0);
  Vec<C> v = Vec<C>::Zero(4);
  switch (which) {
    case 0: v(0) = r; v(3) = r; break;   // phi+
    case 1: v(0) = r; v(3) = -r; break;  // phi-
    case 2: v(1) = r; v(2) = r; break;   // psi+
    default: v(1) = r; v(2) = -r; break;
  }
  return v;
}

// Projector onto the column span of v.
Mat<C> span_projector(const Mat<C>& v) { return v * (v.adjoint() * v).inverse() * v.adjoint(); }

SolverOptions<double> opts() { return SolverOptions<double>::defaults(); }

}  // namespace

TEST(FacialReduction, Bb84AnalyticSupports) {
  EXPECT_TRUE(bb84_support<C>(0.02, 0.03).isApprox(Mat<C>::Identity(4, 4)));

  const Mat<C> vz = bb84_support<C>(0.05, 0.0);
  ASSERT_EQ(vz.cols(), 2);
  EXPECT_NEAR((vz.col(0) - bell(0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((vz.col(1) - bell(1)).norm(), 0.0, 1e-15);

  const Mat<C> vx = bb84_support<C>(0.0, 0.05);
  ASSERT_EQ(vx.cols(), 2);
  Mat<C> phi_psi(4, 2);
  phi_psi << bell(0), bell(2);
  EXPECT_NEAR((span_projector(vx) - span_projector(phi_psi)).norm(), 0.0, 1e-14);

  EXPECT_EQ(bb84_support<C>(0.0, 0.0).cols(), 1);
  EXPECT_THROW(bb84_support<C>(1.0, 0.0), DomainError);
}

TEST(FacialReduction, NumericSupportOfDegenerateBb84) {
  const auto in = bb84<C>(0.05, 0.0);
  const auto sup = find_state_support<C>(in.observables, in.probabilities, 4, opts());
  ASSERT_EQ(sup.rank, 2);
  EXPECT_TRUE(is_isometry<C>(sup.V, 1e-12));
  Mat<C> analytic(4, 2);
  analytic << bell(0), bell(1);
  EXPECT_LT((span_projector(sup.V) - span_projector(analytic)).norm(), 1e-6);

  const auto one = bb84<C>(0.0, 0.0);
  const auto s1 = find_state_support<C>(one.observables, one.probabilities, 4, opts());
  ASSERT_EQ(s1.rank, 1);
  EXPECT_NEAR(std::abs(s1.V.col(0).dot(bell(0))), 1.0, 1e-6);

  const auto full = bb84<C>(0.03, 0.04);
  EXPECT_EQ(find_state_support<C>(full.observables, full.probabilities, 4, opts()).rank, 4);
}

TEST(FacialReduction, SupportErrors) {
  Mat<C> p0 = Mat<C>::Zero(2, 2);
  p0(0, 0) = 1;
  Vec<double> p(2);
  p << 1.0, 1.5;
  EXPECT_THROW(find_state_support<C>({Mat<C>::Identity(2, 2), p0}, p, 2, opts()), InfeasibleError);

  Mat<C> z = Mat<C>::Zero(2, 2);
  z(0, 0) = 1;
  z(1, 1) = -1;
  EXPECT_THROW(find_state_support<C>({z}, Vec<double>::Zero(1), 2, opts()), DomainError);
}

TEST(FacialReduction, ConstraintsOnDegenerateBb84) {
  const auto in = bb84<C>(0.05, 0.0);
  const auto rc = reduce_constraints<C>(bb84_support<C>(0.05, 0.0), in.observables, in.probabilities, 1e-10);
  ASSERT_EQ(rc.F.size(), 2u);
  ASSERT_EQ(rc.dropped.size(), 1u);
  EXPECT_EQ(rc.dropped[0], 2);  // the Z error rate row became 0 = 0
  Mat<C> e11 = Mat<C>::Zero(2, 2);
  e11(1, 1) = 1;
  EXPECT_LT((rc.F[1] - e11).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(rc.p(1), 0.05);
}

TEST(FacialReduction, FullSupportLeavesConstraintsAlone) {
  const auto in = bb84<C>(0.02, 0.04);
  const auto rc = reduce_constraints<C>(Mat<C>::Identity(4, 4), in.observables, in.probabilities, 1e-10);
  ASSERT_EQ(rc.F.size(), in.observables.size());
  for (std::size_t k = 0; k < rc.F.size(); ++k) EXPECT_EQ(rc.F[k], in.observables[k]);
  EXPECT_TRUE(rc.dropped.empty());
}

TEST(FacialReduction, InconsistentDroppedRowIsInfeasible) {
  const auto in = bb84<C>(0.05, 0.0);
  Vec<double> p = in.probabilities;
  p(2) = 0.1;  // Z errors are impossible on span{phi+, phi-}
  EXPECT_THROW(reduce_constraints<C>(bb84_support<C>(0.05, 0.0), in.observables, p, 1e-10), InfeasibleError);

  std::vector<Mat<C>> e = in.observables;
  e.push_back(2.0 * in.observables[1]);
  Vec<double> q(4);
  q << 1.0, 0.05, 0.0, 0.2;
  EXPECT_THROW(reduce_constraints<C>(Mat<C>::Identity(4, 4), e, q, 1e-10), InfeasibleError);
}

TEST(FacialReduction, DuplicateRowIsDroppedAndSolutionUnchanged) {
  auto base = bb84<C>(0.03, 0.03);
  auto dup = base;
  dup.observables.push_back(base.observables[1]);
  dup.probabilities.conservativeResize(4);
  dup.probabilities(3) = base.probabilities(1);
  dup.labels.push_back("qx again");
  dup.observed.push_back(true);
  const auto rc = reduce_constraints<C>(Mat<C>::Identity(4, 4), dup.observables, dup.probabilities, 1e-10);
  ASSERT_EQ(rc.dropped.size(), 1u);
  EXPECT_EQ(rc.dropped[0], 3);

  const auto a = key_rate(base), b = key_rate(dup);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_NEAR(a.h_ae, b.h_ae, 1e-8);
}

TEST(FacialReduction, ReducedPinchingOfDegenerateBb84) {
  const auto in = bb84<C>(0.05, 0.0);
  const auto zhat = reduce_map<C>(in.key_map.then(in.pinching), bb84_support<C>(0.05, 0.0));
  ASSERT_EQ(zhat.out_dim(), 2);
  ASSERT_EQ(zhat.in_dim(), 2);
  // Kraus {|0><+|, |1><-|}, compared through the action, which is phase blind.
  const double r = 1.0 / std::sqrt(2.0);
  Mat<C> k0 = Mat<C>::Zero(2, 2), k1 = Mat<C>::Zero(2, 2);
  k0(0, 0) = r; k0(0, 1) = r;
  k1(1, 0) = r; k1(1, 1) = -r;
  std::mt19937_64 rng(11);
  for (int t = 0; t < 5; ++t) {
    const Mat<C> s = random_density<C>(2, rng, 0.1);
    EXPECT_LT((zhat.apply(s) - apply_kraus({k0, k1}, s)).norm(), 1e-14);
  }
}

TEST(FacialReduction, FullRangePinchingIsItsOwnReduction) {
  const auto in = bb84<C>(0.0, 0.05);
  const Mat<C> v = bb84_support<C>(0.0, 0.05);
  const auto zhat = reduce_map<C>(in.pinching, v);
  ASSERT_EQ(zhat.out_dim(), 4);
  std::mt19937_64 rng(5);
  const Mat<C> s = random_density<C>(2, rng, 0.2);
  EXPECT_LT((zhat.apply(s) - in.pinching.apply(Mat<C>(v * s * v.adjoint()))).norm(), 1e-14);
}

TEST(FacialReduction, IsometricKeyMapReducesToIdentity) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const Index n = 2 + t % 3;
    const Mat<C> w = random_isometry<C>(n + 3, n, rng);
    const Mat<C> v = random_isometry<C>(n, n - 1, rng);
    const auto ghat = canonical_ghat<C>(reduce_map<C>(KrausMap<C>({w}), v), 1e-12);
    EXPECT_TRUE(is_identity_map<C>(ghat, 1e-12));
    EXPECT_EQ(ghat.in_dim(), n - 1);
  }
  EXPECT_THROW(reduce_map<C>(KrausMap<C>({Mat<C>::Zero(2, 2)}), Mat<C>::Identity(2, 2)), DomainError);
}

TEST(FacialReduction, NaimarkProjectivePovm) {
  Mat<C> p0 = Mat<C>::Zero(2, 2), p1 = Mat<C>::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  const auto [g, z] = naimark_key_maps<C>({p0, p1}, 1);
  EXPECT_TRUE(is_identity_map<C>(g, 0.0));
  ASSERT_EQ(z.out_dim(), 2);
  std::mt19937_64 rng(8);
  const Mat<C> s = random_density<C>(2, rng, 0.2);
  const Mat<C> out = z.apply(s);
  EXPECT_NEAR(out.diagonal().real().sum(), 1.0, 1e-14);
  Vec<double> expect(2);
  expect << s(0, 0).real(), s(1, 1).real();
  Vec<double> got = out.diagonal().real();
  std::sort(got.data(), got.data() + 2);
  std::sort(expect.data(), expect.data() + 2);
  EXPECT_LT((got - expect).norm(), 1e-14);
  EXPECT_LT(std::abs(out(0, 1)), 1e-15);
}

TEST(FacialReduction, NaimarkTrivialAndFullRankPovms) {
  const auto [g1, z1] = naimark_key_maps<C>({Mat<C>::Identity(2, 2)}, 2);
  ASSERT_EQ(z1.out_dim(), 4);
  std::mt19937_64 rng(9);
  const Mat<C> s = random_density<C>(4, rng, 0.2);
  EXPECT_LT((z1.apply(s) - s).norm(), 1e-14);

  // Trine-like 4-outcome qubit POVM with full-rank elements.
  std::vector<Mat<C>> povm;
  Mat<C> sum = Mat<C>::Zero(2, 2);
  for (int i = 0; i < 4; ++i) {
    povm.push_back(random_density<C>(2, rng, 0.3));
    sum += povm.back();
  }
  Eigen::SelfAdjointEigenSolver<Mat<C>> es(sum);
  const Mat<C> isq = es.operatorInverseSqrt();
  for (auto& e : povm) e = isq * e * isq;
  const auto [g4, z4] = naimark_key_maps<C>(povm, 1);
  EXPECT_EQ(z4.out_dim(), 8);  // no reduction

  const auto [gf, zf] = naimark_full_maps<C>(povm, 1);
  ASSERT_EQ(gf.operators().size(), 1u);
  EXPECT_TRUE(is_isometry<C>(gf.operators().front(), 1e-12));

  std::vector<Mat<C>> bad = povm;
  bad[0] *= 1.1;
  EXPECT_THROW(naimark_key_maps<C>(bad, 1), DomainError);
}

TEST(FacialReduction, CertificateOfDegenerateBb84) {
  const auto in = bb84<C>(0.05, 0.0);
  ReductionInputs<C> ri{in.observables, in.probabilities, in.key_map, in.pinching, std::nullopt, std::nullopt,
                        std::nullopt};
  const auto cert = reduce_problem<C>(ri, opts());
  EXPECT_EQ(cert.method, "numeric");
  EXPECT_EQ(cert.reduced_dim, 2);
  EXPECT_FALSE(cert.full_support());
  EXPECT_TRUE(is_isometry<C>(cert.V, 1e-12));
  EXPECT_TRUE(is_identity_map<C>(cert.ghat, 1e-12));
  EXPECT_EQ(cert.zhat.out_dim(), 2);
  Eigen::SelfAdjointEigenSolver<Mat<C>> es(cert.witness);
  EXPECT_GT(es.eigenvalues()(0), 0.0);
  for (std::size_t k = 0; k < cert.F.size(); ++k)
    EXPECT_NEAR((cert.F[k] * cert.witness).trace().real(), cert.p(Index(k)), 1e-7);
}

// Random instances whose feasible states are forced onto a proper subspace
// by a zero-probability projector, with assorted key maps.
TEST(FacialReduction, EntropyIdentityOnRandomReducedInstances) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int inst = 0; inst < 24; ++inst) {
    const auto ri = random_reduced_instance(inst, rng);
    ReductionInputs<C> in{ri.E, ri.p, ri.G, ri.Z, std::nullopt, std::nullopt, std::nullopt};
    const auto cert = reduce_problem<C>(in, opts());
    ASSERT_EQ(cert.reduced_dim, ri.support_dim) << "instance " << inst;
    EXPECT_LT((cert.V.adjoint() * cert.V - Mat<C>::Identity(cert.reduced_dim, cert.reduced_dim)).norm(), 1e-12);

    for (int s = 0; s < 3; ++s) {
      const Mat<C> sigma = random_density<C>(cert.reduced_dim, rng, 0.05);
      const double lhs = -entropy<C>(cert.ghat.apply(sigma)) + entropy<C>(cert.zhat.apply(sigma));
      const Mat<C> g = apply_kraus(ri.G.operators(), Mat<C>(cert.V * sigma * cert.V.adjoint()));
      const double rhs = relative_entropy_oracle(g, apply_kraus(ri.Z.operators(), g));
      ASSERT_TRUE(std::isfinite(rhs));
      EXPECT_NEAR(lhs, rhs, 1e-9) << "instance " << inst << " sample " << s;
      ++checked;
    }
  }
  EXPECT_GE(checked, 60);
}
