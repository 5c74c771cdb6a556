#pragma once

// Barrier oracle interface consumed by the interior-point solver. A cone block
// owns a slice of the primal vector; set_point() performs the interior test and
// caches whatever the derivative calls need.

#include <limits>
#include <string>

#include "qkdrate/scalar.hpp"

namespace qkdrate {

enum class ConeKind { nonneg, second_order, rel_entropy, qkd };

std::string to_string(ConeKind kind);
ConeKind cone_kind_from_string(const std::string& name);

template <typename Real>
class Cone {
 public:
  virtual ~Cone() = default;

  virtual ConeKind kind() const = 0;
  virtual Index dim() const = 0;
  /// Barrier parameter.
  virtual Real nu() const = 0;
  virtual Vec<Real> initial_point() const = 0;

  /// Interior test at x; on success the point becomes current for the
  /// derivative calls below.
  virtual bool set_point(const Vec<Real>& x) = 0;
  virtual bool has_point() const = 0;

  virtual Real barrier() const = 0;
  virtual Vec<Real> gradient() const = 0;
  /// Columns of `d` are directions.
  virtual Mat<Real> hess_prod(const Mat<Real>& d) const = 0;
  virtual Mat<Real> inv_hess_prod(const Mat<Real>& d) const = 0;

  virtual bool has_third_order() const { return false; }
  /// Third directional derivative of the barrier, contracted twice with d.
  virtual Vec<Real> third_order(const Vec<Real>& d) const;

  /// Largest step a with x + a d interior, when cheaply known; infinity otherwise.
  virtual Real max_step(const Vec<Real>& /*x*/, const Vec<Real>& /*d*/) const {
    return std::numeric_limits<Real>::infinity();
  }

  /// Dense Hessian assembled from hess_prod.
  Mat<Real> hessian() const { return hess_prod(Mat<Real>::Identity(dim(), dim())); }
};

}  // namespace qkdrate
