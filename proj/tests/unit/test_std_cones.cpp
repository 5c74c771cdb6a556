#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qkdrate/std_cones.hpp"
#include "random_matrices.hpp"

using namespace qkdrate;
using namespace qkdrate::testing;
using cd = std::complex<double>;

namespace {

double barrier_at(Cone<double>& c, const Vec<double>& x) {
  EXPECT_TRUE(c.set_point(x));
  return c.barrier();
}

Vec<double> gradient_at(Cone<double>& c, const Vec<double>& x) {
  EXPECT_TRUE(c.set_point(x));
  return c.gradient();
}

Vec<double> hessian_at(Cone<double>& c, const Vec<double>& x, const Vec<double>& d) {
  EXPECT_TRUE(c.set_point(x));
  return c.hess_prod(d);
}

// Generic LHSCB checks shared by every cone: homogeneity, dual pairing,
// derivative finite differences, inverse Hessian.
void check_barrier_calculus(Cone<double>& c, const Vec<double>& x, const Vec<double>& d, bool third) {
  const double f = barrier_at(c, x);
  for (double tau : {0.5, 2.0, 10.0})
    EXPECT_NEAR(barrier_at(c, Vec<double>(tau * x)), f - c.nu() * std::log(tau), 1e-10 * (1 + std::abs(f)));
  const Vec<double> g = gradient_at(c, x);
  EXPECT_NEAR(-g.dot(x), c.nu(), 1e-10 * c.nu());
  const double t = 1e-6;
  for (Index k = 0; k < x.size(); ++k) {
    Vec<double> e = Vec<double>::Zero(x.size());
    e(k) = t;
    EXPECT_NEAR((barrier_at(c, Vec<double>(x + e)) - barrier_at(c, Vec<double>(x - e))) / (2 * t), g(k), 1e-6);
  }
  EXPECT_LT((hessian_at(c, x, x) + g).norm(), 1e-9 * (1 + g.norm()));
  const double th = 1e-5;
  const Vec<double> fdh = (gradient_at(c, Vec<double>(x + th * d)) - gradient_at(c, Vec<double>(x - th * d))) / (2 * th);
  const Vec<double> hd = hessian_at(c, x, d);
  EXPECT_LT((fdh - hd).cwiseAbs().maxCoeff(), 1e-5);
  ASSERT_TRUE(c.set_point(x));
  EXPECT_LT((c.hess_prod(c.inv_hess_prod(d)) - d).norm(), 1e-9 * (1 + d.norm()));
  if (third) {
    ASSERT_TRUE(c.set_point(x));
    EXPECT_LT((c.third_order(x) - 2 * g).norm(), 1e-8 * (1 + g.norm()));
    const Vec<double> t3 = c.third_order(d);
    const Vec<double> fd3 = (hessian_at(c, Vec<double>(x + th * d), d) - hessian_at(c, Vec<double>(x - th * d), d)) / (2 * th);
    EXPECT_LT((fd3 - t3).cwiseAbs().maxCoeff(), 1e-4);
  }
}

}  // namespace

TEST(SecondOrderCone, InteriorExamples) {
  EXPECT_TRUE(soc_is_interior<double>((Vec<double>(3) << 1, 0.5, 0.5).finished()));
  EXPECT_FALSE(soc_is_interior<double>((Vec<double>(3) << 1, 1, 0).finished()));
  // (chi, p - f) with chi = 0.1 and |p - f| = 0.05.
  EXPECT_TRUE(soc_is_interior<double>((Vec<double>(3) << 0.1, 0.03, 0.04).finished()));
  EXPECT_THROW(soc_is_interior<double>(Vec<double>::Ones(1)), DimensionError);
}

TEST(SecondOrderCone, CentralPointAndCalculus) {
  SecondOrderCone<double> c(4);
  const Vec<double> x0 = c.initial_point();
  EXPECT_LT((gradient_at(c, x0) + x0).norm(), 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    Vec<double> x(4), d(4);
    for (Index i = 0; i < 4; ++i) {
      x(i) = nd(rng);
      d(i) = 0.1 * nd(rng);
    }
    x(0) = x.tail(3).norm() + 0.5 + std::abs(nd(rng));
    check_barrier_calculus(c, x, d, true);
  }
}

TEST(SecondOrderCone, MaxStepHitsBoundary) {
  SecondOrderCone<double> c(3);
  const Vec<double> x = (Vec<double>(3) << 2, 0.5, -0.3).finished();
  const Vec<double> d = (Vec<double>(3) << -1, 0.4, 0.2).finished();
  const double a = c.max_step(x, d);
  ASSERT_TRUE(std::isfinite(a));
  const Vec<double> b = x + a * d;
  EXPECT_NEAR(b(0), b.tail(2).norm(), 1e-12);
  EXPECT_TRUE(soc_is_interior<double>(Vec<double>(x + 0.999 * a * d)));
}

TEST(NonnegCone, Examples) {
  NonnegCone<double> c(2);
  EXPECT_EQ(barrier_at(c, Vec<double>::Ones(2)), 0.0);
  NonnegCone<double> c1(1);
  EXPECT_DOUBLE_EQ(barrier_at(c1, Vec<double>::Constant(1, std::exp(1.0))), -1.0);
  EXPECT_FALSE(c.set_point((Vec<double>(2) << 1, 0).finished()));
  EXPECT_THROW(c.barrier(), ContractViolation);
  NonnegCone<double> c3(3);
  check_barrier_calculus(c3, (Vec<double>(3) << 0.5, 2, 1.3).finished(), (Vec<double>(3) << 0.1, -0.2, 0.05).finished(), true);
  EXPECT_DOUBLE_EQ(c3.max_step((Vec<double>(3) << 1, 2, 3).finished(), (Vec<double>(3) << -1, 1, -6).finished()), 0.5);
}

TEST(RelEntropyCone, Examples) {
  const RelEntropyCone<double> c(2);
  const Mat<double> half = Mat<double>::Identity(2, 2) / 2;
  const auto s = c.is_interior({1.0, half, half});
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(c.barrier(*s), 4 * std::log(2.0), 1e-14);
  EXPECT_DOUBLE_EQ(c.nu(), 5.0);
}

TEST(RelEntropyCone, KleinInequality) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const Mat<cd> x = random_density<cd>(3, rng), y = random_density<cd>(3, rng);
    EXPECT_GE(RelEntropyCone<cd>::relative_entropy(x, y), 0.0);
    EXPECT_NEAR(RelEntropyCone<cd>::relative_entropy(x, x), 0.0, 1e-13);
  }
}

TEST(RelEntropyCone, BarrierCalculus) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 8; ++rep) {
    const Index n = 2 + rep % 2;
    RelEntropyConeOracle<cd> o(n);
    RelEntropyPoint<cd> p;
    p.X = random_density<cd>(n, rng);
    p.Y = random_density<cd>(n, rng);
    p.h = RelEntropyCone<cd>::relative_entropy(p.X, p.Y) + 0.5;
    RelEntropyPoint<cd> d;
    d.h = 0.1;
    d.X = 0.05 * random_hermitian<cd>(n, rng);
    d.Y = 0.05 * random_hermitian<cd>(n, rng);
    check_barrier_calculus(o, o.cone().to_vector(p), o.cone().to_vector(d), false);
  }
}

TEST(RelEntropyCone, InitialPointIsCentral) {
  for (Index n : {1, 2, 4}) {
    RelEntropyConeOracle<cd> o(n);
    const Vec<double> x = o.initial_point();
    ASSERT_TRUE(o.set_point(x));
    EXPECT_LT((o.gradient() + x).norm(), 1e-10);
  }
}

TEST(ConeDescriptor, DimensionsAndFactory) {
  EXPECT_EQ(ConeDescriptor<cd>::nonneg(3).dim(), 3);
  EXPECT_EQ(ConeDescriptor<cd>::second_order(4).nu(), 2.0);
  EXPECT_EQ(ConeDescriptor<cd>::rel_entropy(2).dim(), 9);
  EXPECT_EQ(ConeDescriptor<double>::rel_entropy(2).dim(), 7);
  EXPECT_EQ(ConeDescriptor<cd>::rel_entropy(3).nu(), 7.0);
  const auto q = ConeDescriptor<cd>::qkd(KrausMap<cd>::identity(3), KrausMap<cd>::identity(3));
  EXPECT_EQ(q.dim(), 10);
  EXPECT_EQ(q.nu(), 4.0);
  for (const auto& d : {ConeDescriptor<cd>::nonneg(2), ConeDescriptor<cd>::second_order(3), ConeDescriptor<cd>::rel_entropy(2), q,
                        ConeDescriptor<cd>::pure_logdet(2)}) {
    auto c = make_cone(d);
    EXPECT_EQ(c->dim(), d.dim());
    EXPECT_EQ(c->nu(), d.nu());
    EXPECT_EQ(c->kind(), d.kind);
    EXPECT_TRUE(c->set_point(c->initial_point()));
  }
  EXPECT_EQ(cone_kind_from_string("second_order"), ConeKind::second_order);
  EXPECT_THROW(cone_kind_from_string("psd"), std::invalid_argument);
}
