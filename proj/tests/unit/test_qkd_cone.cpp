#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cone_fixtures.hpp"
#include "qkdrate/qkd_cone.hpp"

using namespace qkdrate;
using namespace qkdrate::testing;
using cd = std::complex<double>;

namespace {

KrausMap<double> qubit_pinching() {
  Mat<double> p0 = Mat<double>::Zero(2, 2), p1 = Mat<double>::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  return KrausMap<double>({p0, p1});
}

template <typename T>
Vec<double> vec_of(const QkdCone<T>& c, const QkdPoint<T>& p) { return c.to_vector(p); }

template <typename T>
double barrier_at(const QkdCone<T>& c, const Vec<double>& x) {
  const auto p = c.from_vector(x);
  const auto s = c.is_interior(p);
  EXPECT_TRUE(s.has_value());
  return c.barrier(*s, p);
}

template <typename T>
Vec<double> gradient_at(const QkdCone<T>& c, const Vec<double>& x) {
  const auto p = c.from_vector(x);
  return c.to_vector(c.gradient(*c.is_interior(p), p));
}

template <typename T>
Vec<double> hessian_at(const QkdCone<T>& c, const Vec<double>& x, const Vec<double>& d) {
  const auto p = c.from_vector(x);
  return c.to_vector(c.hessian_apply(*c.is_interior(p), p, c.from_vector(d)));
}

}  // namespace

TEST(QkdCone, InteriorExamples) {
  const QkdCone<double> c(KrausMap<double>::identity(2), qubit_pinching());
  EXPECT_TRUE(c.is_interior({1.0, Mat<double>::Identity(2, 2) / 2}).has_value());
  Mat<double> pure = Mat<double>::Zero(2, 2);
  pure(0, 0) = 1;
  EXPECT_FALSE(c.is_interior({100.0, pure}).has_value());
  Mat<double> s(2, 2);
  s << 0.5, 0.4, 0.4, 0.5;
  // u = 0.01 + H(s) - H(diag(.5,.5)) with H(s) from eigenvalues (0.9, 0.1).
  const double hs = -0.9 * std::log(0.9) - 0.1 * std::log(0.1);
  EXPECT_NEAR(hs, 0.3251, 1e-4);
  EXPECT_LT(0.01 + hs - std::log(2.0), 0);
  EXPECT_FALSE(c.is_interior({0.01, s}).has_value());
  EXPECT_TRUE(c.is_interior({0.4, s}).has_value());
}

TEST(QkdCone, BarrierExamples) {
  const QkdCone<double> c(KrausMap<double>::identity(2), qubit_pinching());
  const QkdPoint<double> p{1.0, Mat<double>::Identity(2, 2)};
  EXPECT_NEAR(c.barrier(*c.is_interior(p), p), 0.0, 1e-15);
  // Blow-up approaching a singular sigma.
  double prev = -1e300;
  for (double e : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    Mat<double> s = Mat<double>::Zero(2, 2);
    s(0, 0) = 1;
    s(1, 1) = e;
    const QkdPoint<double> q{1.0, s};
    const double f = c.barrier(*c.is_interior(q), q);
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(QkdCone, GradientAtIdentity) {
  const QkdCone<double> c(KrausMap<double>::identity(2), qubit_pinching());
  const QkdPoint<double> p{1.0, Mat<double>::Identity(2, 2)};
  const auto s = c.is_interior(p);
  EXPECT_LT(s->grad_u.norm(), 1e-15);
  const auto g = c.gradient(*s, p);
  EXPECT_NEAR(g.h, -1.0, 1e-15);
  EXPECT_LT((g.sigma + Mat<double>::Identity(2, 2)).norm(), 1e-15);
}

TEST(QkdCone, InitialPointIsCentralForPinching) {
  const QkdCone<double> c(KrausMap<double>::identity(2), qubit_pinching());
  const auto p = c.initial_point();
  EXPECT_DOUBLE_EQ(p.h, 1.0);
  EXPECT_EQ(p.sigma, Mat<double>::Identity(2, 2));
  const auto g = c.gradient(*c.is_interior(p), p);
  EXPECT_LT((c.to_vector(g) + c.to_vector(p)).norm(), 1e-14);
}

TEST(QkdCone, InitialPointAlwaysInterior) {
  std::mt19937_64 rng(2);
  for (int v = 0; v < 12; ++v) {
    const auto c = random_qkd_cone<cd>(2 + v % 4, v, rng);
    EXPECT_TRUE(c.is_interior(c.initial_point()).has_value());
  }
}

TEST(QkdCone, RejectsRankDeficientRange) {
  std::mt19937_64 rng(3);
  const KrausMap<cd> iso({random_isometry<cd>(3, 2, rng)});
  EXPECT_THROW(QkdCone<cd>(iso, KrausMap<cd>::identity(2)), DomainError);
}

TEST(QkdCone, HomogeneityAndDualPairing) {
  std::mt19937_64 rng(4);
  for (int v = 0; v < 20; ++v) {
    const auto c = random_qkd_cone<cd>(2 + v % 4, v, rng);
    for (int k = 0; k < 5; ++k) {
      const auto p = random_interior_point(c, rng);
      const Vec<double> x = c.to_vector(p);
      const double f = barrier_at(c, x);
      for (double tau : {0.5, 2.0, 10.0}) {
        const double ft = barrier_at(c, Vec<double>(tau * x));
        EXPECT_NEAR(ft, f - c.nu() * std::log(tau), 1e-10 * (1 + std::abs(f)));
      }
      EXPECT_NEAR(-gradient_at(c, x).dot(x), c.nu(), 1e-10 * c.nu());
    }
  }
}

TEST(QkdCone, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const double t = 1e-5;
  for (int v = 0; v < 20; ++v) {
    const auto c = random_qkd_cone<cd>(2 + v % 3, v, rng);
    const Vec<double> x = c.to_vector(random_interior_point(c, rng));
    const Vec<double> g = gradient_at(c, x);
    for (Index k = 0; k < x.size(); ++k) {
      Vec<double> e = Vec<double>::Zero(x.size());
      e(k) = t;
      const double fd = (barrier_at(c, Vec<double>(x + e)) - barrier_at(c, Vec<double>(x - e))) / (2 * t);
      EXPECT_NEAR(fd, g(k), 1e-6) << "cone " << v << " coordinate " << k;
    }
  }
}

TEST(QkdCone, HessianIdentitiesAndFiniteDifferences) {
  std::mt19937_64 rng(6);
  const double t = 1e-4;
  for (int v = 0; v < 20; ++v) {
    const auto c = random_qkd_cone<cd>(2 + v % 4, v, rng);
    const auto p = random_interior_point(c, rng);
    const Vec<double> x = c.to_vector(p);
    const Vec<double> g = gradient_at(c, x);
    EXPECT_LT((hessian_at(c, x, x) + g).norm(), 1e-9 * (1 + g.norm()));
    const Vec<double> d = c.to_vector(random_direction(c, rng));
    const Vec<double> e = c.to_vector(random_direction(c, rng));
    const Vec<double> hd = hessian_at(c, x, d);
    EXPECT_NEAR(hd.dot(e), hessian_at(c, x, e).dot(d), 1e-10 * (1 + std::abs(hd.dot(e))));
    EXPECT_GT(hd.dot(d), 0.0);
    // Keep the probe inside the cone.
    const double scale = 0.01;
    const Vec<double> fd = (gradient_at(c, Vec<double>(x + t * scale * d)) - gradient_at(c, Vec<double>(x - t * scale * d))) / (2 * t);
    EXPECT_LT((fd - scale * hd).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(QkdCone, ThirdOrderIdentitiesAndFiniteDifferences) {
  std::mt19937_64 rng(7);
  const double t = 1e-4;
  for (int v = 0; v < 20; ++v) {
    const auto c = random_qkd_cone<cd>(2 + v % 4, v, rng);
    const auto p = random_interior_point(c, rng);
    const auto s = c.is_interior(p);
    const Vec<double> x = c.to_vector(p);
    const Vec<double> g = gradient_at(c, x);
    const Vec<double> t3x = c.to_vector(c.third_order_dir(*s, p, p));
    EXPECT_LT((t3x - 2 * g).norm(), 1e-8 * (1 + g.norm()));
    const Vec<double> d = 0.01 * c.to_vector(random_direction(c, rng));
    const Vec<double> t3 = c.to_vector(c.third_order_dir(*s, p, c.from_vector(d)));
    const Vec<double> fd = (hessian_at(c, Vec<double>(x + t * d), d) - hessian_at(c, Vec<double>(x - t * d), d)) / (2 * t);
    EXPECT_LT((fd - t3).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(QkdCone, PureLogdetThirdOrder) {
  const auto c = QkdCone<double>::pure_logdet(2);
  const QkdPoint<double> p{1.0, Mat<double>::Identity(2, 2)};
  Mat<double> xi = Mat<double>::Zero(2, 2);
  xi(0, 0) = 1;
  xi(1, 1) = -1;
  const auto t3 = c.third_order_dir(*c.is_interior(p), p, {0.0, xi});
  EXPECT_LT((t3.sigma + 2 * Mat<double>::Identity(2, 2)).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(c.nu(), 3.0);
}

TEST(QkdCone, SampledSelfConcordance) {
  std::mt19937_64 rng(8);
  int samples = 0;
  for (int v = 0; v < 10; ++v) {
    const auto c = random_qkd_cone<cd>(2 + v % 3, v, rng);
    for (int k = 0; k < 10; ++k) {
      const auto p = random_interior_point(c, rng);
      const auto s = c.is_interior(p);
      for (int j = 0; j < 10; ++j) {
        const auto d = random_direction(c, rng);
        const double h2 = c.to_vector(c.hessian_apply(*s, p, d)).dot(c.to_vector(d));
        const double h3 = c.to_vector(c.third_order_dir(*s, p, d)).dot(c.to_vector(d));
        EXPECT_LE(std::abs(h3), 2 * std::pow(h2, 1.5) + 1e-8);
        ++samples;
      }
    }
  }
  EXPECT_GE(samples, 1000);
}

TEST(QkdConeOracle, StructuredInverseMatchesDense) {
  std::mt19937_64 rng(9);
  for (int v = 0; v < 9; v += 3) {
    const auto c = random_qkd_cone<cd>(3 + v / 3, v, rng);
    QkdConeOracle<cd> fast(c), dense(c, InverseHessianMode::dense);
    ASSERT_TRUE(fast.structured_inverse());
    ASSERT_FALSE(dense.structured_inverse());
    const Vec<double> x = c.to_vector(random_interior_point(c, rng));
    ASSERT_TRUE(fast.set_point(x));
    ASSERT_TRUE(dense.set_point(x));
    const Mat<double> r = Mat<double>::Random(c.dim(), 3);
    const Mat<double> a = fast.inv_hess_prod(r);
    const Mat<double> b = dense.inv_hess_prod(r);
    EXPECT_LT((a - b).norm(), 1e-8 * b.norm());
    EXPECT_LT((fast.hess_prod(a) - r).norm(), 1e-9 * r.norm());
  }
}

TEST(QkdConeOracle, PureLogdetInverse) {
  QkdConeOracle<double> o(QkdCone<double>::pure_logdet(3));
  std::mt19937_64 rng(10);
  Vec<double> x(7);
  x(0) = 0.7;
  x.tail(6) = svec<double>(random_density<double>(3, rng));
  ASSERT_TRUE(o.set_point(x));
  const Mat<double> r = Mat<double>::Random(7, 2);
  EXPECT_LT((o.hess_prod(o.inv_hess_prod(r)) - r).norm(), 1e-10 * r.norm());
  EXPECT_NEAR(-o.gradient().dot(x), 4.0, 1e-12);
}

TEST(QkdConeOracle, DerivativesRequirePoint) {
  QkdConeOracle<double> o(QkdCone<double>(KrausMap<double>::identity(2), qubit_pinching()));
  EXPECT_THROW(o.gradient(), ContractViolation);
  Vec<double> bad = Vec<double>::Zero(4);
  EXPECT_FALSE(o.set_point(bad));
  EXPECT_THROW(o.barrier(), ContractViolation);
}

TEST(QkdCone, RealModeMatchesComplexMode) {
  const QkdCone<double> cr(KrausMap<double>::identity(2), qubit_pinching());
  std::vector<Mat<cd>> ops;
  const KrausMap<double> pinch = qubit_pinching();
  for (const auto& k : pinch.operators()) ops.push_back(k.cast<cd>());
  const QkdCone<cd> cc(KrausMap<cd>::identity(2), KrausMap<cd>(ops));
  Mat<double> s(2, 2);
  s << 0.6, 0.2, 0.2, 0.4;
  const QkdPoint<double> pr{0.5, s};
  const QkdPoint<cd> pc{0.5, s.cast<cd>()};
  EXPECT_NEAR(cr.barrier(*cr.is_interior(pr), pr), cc.barrier(*cc.is_interior(pc), pc), 1e-14);
}
