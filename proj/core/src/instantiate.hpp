#pragma once

// Explicit-instantiation helpers; templates are defined in the .cpp files and
// instantiated here for every supported scalar.

#include <complex>

#include "qkdrate/scalar.hpp"

#define QKDRATE_FOR_EACH_ENTRY(X) \
  X(double)                       \
  X(std::complex<double>)         \
  X(::qkdrate::Extended)          \
  X(std::complex<::qkdrate::Extended>)

#define QKDRATE_FOR_EACH_REAL(X) \
  X(double)                      \
  X(::qkdrate::Extended)
