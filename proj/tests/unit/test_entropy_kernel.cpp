#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qkdrate/entropy_kernel.hpp"
#include "qkdrate/herm_vec.hpp"
#include "random_matrices.hpp"

using namespace qkdrate;
using qkdrate::testing::random_density;
using qkdrate::testing::random_hermitian;
using cd = std::complex<double>;

namespace {

Mat<cd> log_of(const Mat<cd>& x) { return log_hermitian<cd>(eig_hermitian<cd>(x)); }

double binary_entropy_bits(double q) { return -q * std::log2(q) - (1 - q) * std::log2(1 - q); }

}  // namespace

TEST(EigHermitian, SortedAndReconstructs) {
  Mat<double> d = Mat<double>::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  const auto e = eig_hermitian<double>(d);
  EXPECT_DOUBLE_EQ(e.lambda(0), 1.0);
  EXPECT_DOUBLE_EQ(e.lambda(1), 3.0);
  const auto ei = eig_hermitian<double>(Mat<double>::Identity(2, 2));
  EXPECT_EQ(ei.lambda, Vec<double>::Ones(2));
  EXPECT_LT((ei.reconstruct() - Mat<double>::Identity(2, 2)).norm(), 1e-15);

  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const Mat<cd> x = random_hermitian<cd>(2 + rep % 7, rng);
    const auto ex = eig_hermitian<cd>(x);
    EXPECT_LT((ex.reconstruct() - x).norm(), 1e-12 * x.norm());
    EXPECT_LT((ex.U.adjoint() * ex.U - Mat<cd>::Identity(x.rows(), x.rows())).norm(), 1e-12);
    for (Index i = 1; i < ex.dim(); ++i) EXPECT_LE(ex.lambda(i - 1), ex.lambda(i));
  }
}

TEST(EigHermitian, RejectsNonFinite) {
  Mat<double> x = Mat<double>::Identity(2, 2);
  x(0, 0) = std::nan("");
  EXPECT_THROW(eig_hermitian<double>(x), NumericalError);
}

TEST(Entropy, Examples) {
  for (int d = 1; d <= 5; ++d)
    EXPECT_NEAR(entropy<double>(Mat<double>::Identity(d, d) / d), std::log(d), 1e-14);
  Mat<double> pure = Mat<double>::Zero(3, 3);
  pure(1, 1) = 1;
  EXPECT_EQ(entropy<double>(pure), 0.0);
  Mat<double> q = Mat<double>::Zero(2, 2);
  q(0, 0) = 0.975;
  q(1, 1) = 0.025;
  EXPECT_NEAR(entropy<double>(q), 0.11690, 1e-5);
  EXPECT_NEAR(entropy<double>(q) / std::log(2.0), binary_entropy_bits(0.025), 1e-14);
  EXPECT_NEAR(binary_entropy_bits(0.025), 0.16866, 1e-5);
}

TEST(Entropy, NegativeEigenvalueIsDomainError) {
  Mat<double> x = Mat<double>::Identity(2, 2);
  x(1, 1) = -0.1;
  EXPECT_THROW(entropy<double>(x), DomainError);
}

TEST(Gamma1, Examples) {
  const Mat<double> g = gamma1<double>(Vec<double>::Ones(2));
  EXPECT_LT((g - Mat<double>::Ones(2, 2)).norm(), 1e-15);
  const Mat<double> ge = gamma1<double>((Vec<double>(2) << 1.0, std::exp(1.0)).finished());
  EXPECT_NEAR(ge(0, 1), 1.0 / (std::exp(1.0) - 1.0), 1e-15);
  EXPECT_NEAR(ge(0, 1), 0.58198, 1e-5);
  EXPECT_NEAR(ge(1, 1), std::exp(-1.0), 1e-15);
  const Mat<double> g2 = gamma1<double>(Vec<double>::Constant(2, 2.0));
  EXPECT_LT((g2 - Mat<double>::Constant(2, 2, 0.5)).norm(), 1e-15);
  EXPECT_THROW(gamma1<double>((Vec<double>(2) << 1.0, 0.0).finished()), DomainError);
}

TEST(Gamma1, ContinuousAcrossThreshold) {
  const double tol = gamma_reltol<double>();
  for (double l : {0.01, 1.0, 50.0}) {
    const double below = gamma1<double>((Vec<double>(2) << l, l * (1 + 0.5 * tol)).finished())(0, 1);
    const double above = gamma1<double>((Vec<double>(2) << l, l * (1 + 2 * tol)).finished())(0, 1);
    EXPECT_LE(std::abs(below - above), 10 * tol * std::abs(above));
    EXPECT_GT(above, 0);
  }
}

TEST(Gamma2, Examples) {
  const auto g = gamma2<double>(Vec<double>::Ones(3));
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(g(i, j, k), -0.5);
  const auto g2 = gamma2<double>(Vec<double>::Constant(2, 2.0));
  EXPECT_DOUBLE_EQ(g2(0, 1, 1), -0.125);
  const Vec<double> l = (Vec<double>(3) << 1, 2, 4).finished();
  const auto g3 = gamma2<double>(l);
  const Mat<double> g1 = gamma1<double>(l);
  EXPECT_NEAR(g3(0, 1, 2), (g1(0, 1) - g1(0, 2)) / (l(1) - l(2)), 1e-15);
  // f[1,2,4] for log, by hand: (log2 - 0)/1 = 0.6931, (log4 - log2)/2 = 0.3466, diff/3.
  EXPECT_NEAR(g3(0, 1, 2), (std::log(2.0) - std::log(2.0) / 2) / (1.0 - 4.0), 1e-14);
}

TEST(Gamma2, SymmetricUnderPermutation) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(0.1, 3.0);
  Vec<double> l(6);
  for (Index i = 0; i < 6; ++i) l(i) = ud(rng);
  l(3) = l(1);
  const auto g = gamma2<double>(l);
  EXPECT_TRUE(g.stored());
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j)
      for (Index k = 0; k < 6; ++k) {
        const double v = g(i, j, k);
        EXPECT_LT(v, 0.0);
        for (double w : {g(i, k, j), g(j, i, k), g(j, k, i), g(k, i, j), g(k, j, i)})
          EXPECT_LE(std::abs(v - w), 1e-12 * std::abs(v));
      }
}

TEST(Gamma2, OnDemandMatchesStored) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ud(0.1, 3.0);
  Vec<double> l(70);
  for (Index i = 0; i < 70; ++i) l(i) = ud(rng);
  const auto big = gamma2<double>(l);
  EXPECT_FALSE(big.stored());
  const auto small = gamma2<double>(l.head(10));
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 10; ++j)
      for (Index k = 0; k < 10; ++k) EXPECT_EQ(big(i, j, k), small(i, j, k));
}

TEST(Dlog, Examples) {
  std::mt19937_64 rng(9);
  const Mat<cd> xi = random_hermitian<cd>(3, rng);
  EXPECT_LT((dlog<cd>(eig_hermitian<cd>(Mat<cd>::Identity(3, 3)), xi) - xi).norm(), 1e-14);
  Mat<double> x = Mat<double>::Zero(2, 2);
  x(0, 0) = 1;
  x(1, 1) = std::exp(1.0);
  Mat<double> sx(2, 2);
  sx << 0, 1, 1, 0;
  const Mat<double> d = dlog<double>(eig_hermitian<double>(x), sx);
  EXPECT_NEAR(d(0, 1), 1.0 / (std::exp(1.0) - 1.0), 1e-15);
  EXPECT_NEAR(d(0, 0), 0.0, 1e-15);
}

TEST(Dlog, FiniteDifferenceOracle) {
  std::mt19937_64 rng(10);
  const double t = 1e-5;
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + rep % 5;
    const Mat<cd> x = random_density<cd>(n, rng) * double(n);
    const Mat<cd> xi = random_hermitian<cd>(n, rng);
    const Mat<cd> fd = (log_of(x + t * xi) - log_of(x - t * xi)) / (2 * t);
    EXPECT_LT((dlog<cd>(eig_hermitian<cd>(x), xi) - fd).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Dlog, SelfAdjoint) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + rep % 5;
    const auto e = eig_hermitian<cd>(random_density<cd>(n, rng));
    const Mat<cd> xi = random_hermitian<cd>(n, rng), zeta = random_hermitian<cd>(n, rng);
    const double a = inner<cd>(dlog<cd>(e, xi), zeta), b = inner<cd>(xi, dlog<cd>(e, zeta));
    EXPECT_LE(std::abs(a - b), 1e-11 * (1 + std::abs(a)));
  }
}

TEST(Dlog, EntropyGradient) {
  std::mt19937_64 rng(13);
  const double t = 1e-6;
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 2 + rep % 4;
    const Mat<cd> x = random_density<cd>(n, rng);
    const Mat<cd> xi = random_hermitian<cd>(n, rng);
    const double fd = (entropy<cd>(x + t * xi) - entropy<cd>(x - t * xi)) / (2 * t);
    const double an = -inner<cd>(xi, Mat<cd>::Identity(n, n) + log_of(x));
    EXPECT_NEAR(fd, an, 1e-7);
  }
}

TEST(D2log, Examples) {
  Mat<double> xi = Mat<double>::Zero(2, 2);
  xi(0, 0) = 1;
  xi(1, 1) = -1;
  const Mat<double> m = d2log<double>(eig_hermitian<double>(Mat<double>::Identity(2, 2)), xi);
  EXPECT_LT((m + Mat<double>::Identity(2, 2)).norm(), 1e-15);
  const Mat<double> m2 = d2log<double>(eig_hermitian<double>(2 * Mat<double>::Identity(2, 2)), Mat<double>::Identity(2, 2));
  EXPECT_LT((m2 + Mat<double>::Identity(2, 2) / 4).norm(), 1e-15);
}

TEST(D2log, FiniteDifferenceOracle) {
  std::mt19937_64 rng(14);
  const double t = 1e-4;
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + rep % 5;
    const Mat<cd> x = random_density<cd>(n, rng) * double(n);
    Mat<cd> xi = random_hermitian<cd>(n, rng);
    xi /= xi.norm();
    const Mat<cd> fd = (log_of(x + t * xi) - 2.0 * log_of(x) + log_of(x - t * xi)) / (t * t);
    EXPECT_LT((d2log<cd>(eig_hermitian<cd>(x), xi) - fd).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(ExtendedPrecision, EntropyAndGamma) {
  const Vec<Extended> l = (Vec<Extended>(2) << Extended(1), Extended(2)).finished();
  const Mat<Extended> g = gamma1<Extended>(l);
  const Extended expect = log(Extended(2));
  EXPECT_LT(static_cast<double>(abs(g(0, 1) - expect)), 1e-32);
  Mat<std::complex<Extended>> x = Mat<std::complex<Extended>>::Identity(4, 4) / Extended(4);
  EXPECT_LT(static_cast<double>(abs(entropy<std::complex<Extended>>(x) - log(Extended(4)))), 1e-32);
}
