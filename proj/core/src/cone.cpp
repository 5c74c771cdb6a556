#include "qkdrate/cone.hpp"

#include <stdexcept>

#include "instantiate.hpp"
#include "qkdrate/errors.hpp"

namespace qkdrate {

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::second_order: return "second_order";
    case ConeKind::rel_entropy: return "rel_entropy";
    case ConeKind::qkd: return "qkd";
  }
  return "unknown";
}

ConeKind cone_kind_from_string(const std::string& name) {
  if (name == "nonneg") return ConeKind::nonneg;
  if (name == "second_order") return ConeKind::second_order;
  if (name == "rel_entropy") return ConeKind::rel_entropy;
  if (name == "qkd") return ConeKind::qkd;
  throw std::invalid_argument("unknown cone kind '" + name + "'");
}

template <typename Real>
Vec<Real> Cone<Real>::third_order(const Vec<Real>&) const {
  throw ContractViolation(to_string(kind()) + " cone has no third-order oracle");
}

template class Cone<double>;
template class Cone<Extended>;

}  // namespace qkdrate
