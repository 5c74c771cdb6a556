#pragma once

// Scalar types used across the library. Every numeric component is templated
// on the matrix entry type `T`, which is one of
//   double, std::complex<double>, Extended, std::complex<Extended>
// where `Extended` is IEEE quadruple precision (113-bit significand).

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>

#include <boost/multiprecision/float128.hpp>

namespace qkdrate {

using Extended = boost::multiprecision::float128;

}  // namespace qkdrate

#include <Eigen/Core>

namespace Eigen {

// Boost ships an Eigen adaptor, but the 1.74 version lacks infinity() and
// quiet_NaN(), which the eigensolvers in this Eigen release require.
template <>
struct NumTraits<qkdrate::Extended> : GenericNumTraits<qkdrate::Extended> {
  using Real = qkdrate::Extended;
  using NonInteger = qkdrate::Extended;
  using Literal = qkdrate::Extended;
  using Nested = qkdrate::Extended;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 4,
    AddCost = 16,
    MulCost = 32
  };
  static inline Real epsilon() { return std::numeric_limits<Real>::epsilon(); }
  static inline Real dummy_precision() { return 1000 * epsilon(); }
  static inline Real highest() { return (std::numeric_limits<Real>::max)(); }
  static inline Real lowest() { return (std::numeric_limits<Real>::lowest)(); }
  static inline int digits10() { return std::numeric_limits<Real>::digits10; }
  static inline Real infinity() { return std::numeric_limits<Real>::infinity(); }
  static inline Real quiet_NaN() { return std::numeric_limits<Real>::quiet_NaN(); }
};

}  // namespace Eigen

#include <Eigen/Dense>

namespace qkdrate {

template <typename T>
struct is_complex : std::false_type {};
template <typename R>
struct is_complex<std::complex<R>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename T>
struct real_of {
  using type = T;
};
template <typename R>
struct real_of<std::complex<R>> {
  using type = R;
};
template <typename T>
using RealOf = typename real_of<T>::type;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

template <typename Real>
inline Real machine_epsilon() {
  return std::numeric_limits<Real>::epsilon();
}

template <typename Real>
inline Real ln2() {
  using std::log;
  return log(Real(2));
}

/// Exact-as-possible conversion of a decimal string to `Real`. Extended values
/// are parsed digit-wise so "0.95" does not pass through binary64 first.
template <typename Real>
Real parse_real(const std::string& text) {
  if constexpr (std::is_same_v<Real, double>) {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("not a number: " + text);
    return v;
  } else {
    // float128's string constructor rounds correctly from decimal text.
    Real v(text);
    return v;
  }
}

template <typename Real>
std::string to_string(const Real& value, int digits = std::numeric_limits<Real>::max_digits10) {
  std::ostringstream os;
  os.precision(digits);
  os << value;
  return os.str();
}

template <typename Real>
double to_double(const Real& value) {
  return static_cast<double>(value);
}

}  // namespace qkdrate
