#pragma once

#include <random>
#include <vector>

#include "qkdrate/qkd_cone.hpp"
#include "random_matrices.hpp"

namespace qkdrate::testing {

/// Random cones over side dimension n: G either the identity (structured
/// inverse path) or a random unitary conjugation / two-operator channel, and Z
/// a random pinching composed with G.
template <typename T>
QkdCone<T> random_qkd_cone(Index n, int variant, std::mt19937_64& rng) {
  const Index parts = 2 + variant % std::max<Index>(1, n - 1);
  const KrausMap<T> pinch = random_pinching<T>(n, std::min(parts, n), rng, variant % 3 == 2);
  switch (variant % 3) {
    case 0:
      return QkdCone<T>(KrausMap<T>::identity(n), pinch);
    case 1: {
      const KrausMap<T> g({random_unitary<T>(n, rng)});
      return QkdCone<T>(g, g.then(pinch));
    }
    default: {
      // G(X) = (1-p) W X W^dag + p D X D^dag with random unitaries; full range.
      const RealOf<T> p(0.3);
      using std::sqrt;
      const KrausMap<T> g({Mat<T>(sqrt(RealOf<T>(1) - p) * random_unitary<T>(n, rng)),
                           Mat<T>(sqrt(p) * random_unitary<T>(n, rng))});
      return QkdCone<T>(g, g.then(pinch));
    }
  }
}

/// Interior point with sigma a scaled random density and h above the entropy gap.
template <typename T>
QkdPoint<T> random_interior_point(const QkdCone<T>& cone, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(0.2, 2.0);
  QkdPoint<T> p;
  p.sigma = random_density<T>(cone.side_dim(), rng) * RealOf<T>(ud(rng) * cone.side_dim());
  p.h = cone.entropy_gap(p.sigma) + RealOf<T>(ud(rng));
  return p;
}

template <typename T>
QkdPoint<T> random_direction(const QkdCone<T>& cone, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  QkdPoint<T> d;
  d.h = RealOf<T>(nd(rng));
  d.sigma = random_hermitian<T>(cone.side_dim(), rng);
  return d;
}

}  // namespace qkdrate::testing
