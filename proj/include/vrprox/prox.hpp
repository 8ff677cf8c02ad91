#ifndef VRPROX_PROX_HPP
#define VRPROX_PROX_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vrprox {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

enum class RegularizerKind { none, l1, box_indicator };

/// Composite term psi. The l1 weight is only read for kind == l1, the
/// bounds only for kind == box_indicator.
template <typename Scalar>
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::none;
  Scalar weight = Scalar(0);
  Vector<Scalar> lower;
  Vector<Scalar> upper;

  static RegularizerSpec none() { return {}; }

  static RegularizerSpec l1(Scalar omega) {
    if (!std::isfinite(omega) || omega < Scalar(0))
      throw std::invalid_argument("l1 weight must be finite and nonnegative");
    RegularizerSpec r;
    r.kind = RegularizerKind::l1;
    r.weight = omega;
    return r;
  }

  static RegularizerSpec box(Vector<Scalar> lo, Vector<Scalar> hi) {
    if (lo.size() != hi.size())
      throw std::invalid_argument("box bounds differ in dimension");
    if ((lo.array() > hi.array()).any())
      throw std::invalid_argument("box lower bound exceeds upper bound");
    RegularizerSpec r;
    r.kind = RegularizerKind::box_indicator;
    r.lower = std::move(lo);
    r.upper = std::move(hi);
    return r;
  }
};

/// argmin_x { eta * psi(x) + 0.5 * ||x - u||^2 }.
template <typename Scalar, typename Derived>
Vector<Scalar> prox(const RegularizerSpec<Scalar>& reg, Scalar eta,
                    const Eigen::MatrixBase<Derived>& u) {
  if (!(eta > Scalar(0)))
    throw std::invalid_argument("prox step eta must be positive");
  switch (reg.kind) {
    case RegularizerKind::none:
      return u;
    case RegularizerKind::l1: {
      const Scalar t = eta * reg.weight;
      // |u_j| == t maps to exactly 0.
      return u.unaryExpr([t](Scalar v) {
        const Scalar m = std::abs(v) - t;
        return m > Scalar(0) ? std::copysign(m, v) : Scalar(0);
      });
    }
    case RegularizerKind::box_indicator:
      if (reg.lower.size() != u.size())
        throw std::invalid_argument("box bounds do not match dimension");
      return u.cwiseMax(reg.lower).cwiseMin(reg.upper);
  }
  return u;
}

template <typename Scalar, typename Derived>
bool is_feasible(const RegularizerSpec<Scalar>& reg,
                 const Eigen::MatrixBase<Derived>& x) {
  if (reg.kind != RegularizerKind::box_indicator) return true;
  if (reg.lower.size() != x.size())
    throw std::invalid_argument("box bounds do not match dimension");
  return (x.array() >= reg.lower.array()).all() &&
         (x.array() <= reg.upper.array()).all();
}

/// psi(x). A violated box indicator returns +infinity.
template <typename Scalar, typename Derived>
Scalar regularizer_value(const RegularizerSpec<Scalar>& reg,
                         const Eigen::MatrixBase<Derived>& x) {
  switch (reg.kind) {
    case RegularizerKind::none:
      return Scalar(0);
    case RegularizerKind::l1:
      return reg.weight * x.template lpNorm<1>();
    case RegularizerKind::box_indicator:
      return is_feasible(reg, x) ? Scalar(0)
                                 : std::numeric_limits<Scalar>::infinity();
  }
  return Scalar(0);
}

inline std::string to_string(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::none: return "none";
    case RegularizerKind::l1: return "l1";
    case RegularizerKind::box_indicator: return "box";
  }
  return "?";
}

}  // namespace vrprox

#endif  // VRPROX_PROX_HPP
