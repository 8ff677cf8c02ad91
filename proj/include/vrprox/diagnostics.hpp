#ifndef VRPROX_DIAGNOSTICS_HPP
#define VRPROX_DIAGNOSTICS_HPP

#include "vrprox/problem.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrprox {

/// One recorded point of a run. Optional columns are absent when they were
/// not measured (gap under perturbation, variance when not probed, ...).
template <typename Scalar>
struct TraceRow {
  std::int64_t k = 0;
  double effective_passes = 0.0;
  Scalar objective{};
  std::optional<Scalar> objective_avg;
  std::optional<Scalar> gap;
  std::optional<Scalar> variance;
  std::optional<double> seconds;
  bool restart = false;
  /// false when the iterate violates a box indicator; `objective` is then
  /// the smooth part only.
  bool feasible = true;
};

/// Rows are ordered by k; effective passes = gradient evaluations / n and
/// never decrease.
template <typename Scalar>
struct SolverTrace {
  std::string algorithm;
  std::vector<TraceRow<Scalar>> rows;
  std::optional<std::int64_t> restart_index;
  /// empty on success, otherwise a diagnostic (divergence, non-finite, ...)
  std::string failure;

  bool ok() const { return failure.empty(); }
};

// ---------------------------------------------------------------------------
// Fenchel duality gap

template <typename Scalar>
bool duality_gap_supported(const Problem<Scalar>& prob) {
  return prob.l2_strength() > Scalar(0) &&
         (prob.regularizer().kind == RegularizerKind::none ||
          prob.regularizer().kind == RegularizerKind::l1);
}

namespace detail {

// s log s with 0 log 0 = 0
template <typename Scalar>
Scalar xlogx(Scalar s) {
  return s > Scalar(0) ? s * std::log(s) : Scalar(0);
}

}  // namespace detail

/// F(x) - D(u(x)) for the perturbation-free problem.
///
/// Writing F(x) = (1/n) sum_i phi_i(a_i^T x) + g(x) with
/// g(x) = (lambda/2)||x||^2 + omega ||x||_1, the dual candidate is
/// u_i = phi_i'(a_i^T x) and
///   D(u) = -(1/n) sum_i phi_i^*(u_i) - g^*(-(1/n) sum_i u_i a_i),
///   g^*(w) = (1/(2 lambda)) sum_j max(|w_j| - omega, 0)^2.
/// For the logistic loss phi_i^*(u) = s log s + (1-s) log(1-s) with
/// s = -u b_i in [0,1]; for the squared loss phi_i^*(u) = u^2/2 + u b_i.
template <typename Scalar, typename Derived>
Scalar duality_gap(const Problem<Scalar>& prob,
                   const Eigen::MatrixBase<Derived>& x) {
  if (!duality_gap_supported(prob))
    throw std::invalid_argument(
        "duality gap needs lambda > 0 and psi in {none, l1}");
  detail::check_dim(prob, x.size());
  const auto& A = prob.data().features;
  const auto& b = prob.data().labels;
  const Index n = prob.n();
  const Vector<Scalar> margins = A * x;

  Vector<Scalar> u(n);
  Scalar conj_sum(0);
  for (Index i = 0; i < n; ++i) {
    const Scalar z = margins[i];
    if (prob.loss() == LossKind::logistic) {
      // s = sigma(-b z), 1 - s = sigma(b z), each evaluated directly
      const Scalar m = b[i] * z;
      const Scalar s = Scalar(1) / (Scalar(1) + std::exp(m));
      const Scalar t = Scalar(1) / (Scalar(1) + std::exp(-m));
      u[i] = -b[i] * s;
      conj_sum += detail::xlogx(s) + detail::xlogx(t);
    } else {
      u[i] = z - b[i];
      conj_sum += Scalar(0.5) * u[i] * u[i] + u[i] * b[i];
    }
  }
  const Vector<Scalar> w = -(A.transpose() * u) / Scalar(n);
  const Scalar omega = prob.regularizer().kind == RegularizerKind::l1
                           ? prob.regularizer().weight
                           : Scalar(0);
  const Scalar g_conj =
      (w.array().abs() - omega).max(Scalar(0)).square().sum() /
      (Scalar(2) * prob.l2_strength());
  const Scalar dual = -conj_sum / Scalar(n) - g_conj;
  return evaluate_objective(prob, x) - dual;
}

// ---------------------------------------------------------------------------
// Rate fitting

/// exp of the least-squares slope of log(objective - fstar) against k over
/// rows [first, last). The result is the per-iteration contraction factor.
template <typename Scalar>
Scalar fit_linear_rate(const SolverTrace<Scalar>& trace, Scalar fstar,
                       std::size_t first, std::size_t last) {
  if (last > trace.rows.size()) last = trace.rows.size();
  if (last < first + 2)
    throw std::invalid_argument("rate fit needs at least two rows");
  const double m = double(last - first);
  double sk = 0, sy = 0;
  std::vector<double> ks, ys;
  for (std::size_t r = first; r < last; ++r) {
    const double gap = double(trace.rows[r].objective - fstar);
    if (!(gap > 0.0))
      throw std::domain_error("non-positive suboptimality at row " +
                              std::to_string(r));
    ks.push_back(double(trace.rows[r].k));
    ys.push_back(std::log(gap));
    sk += ks.back();
    sy += ys.back();
  }
  const double kbar = sk / m, ybar = sy / m;
  double num = 0, den = 0;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    num += (ks[j] - kbar) * (ys[j] - ybar);
    den += (ks[j] - kbar) * (ks[j] - kbar);
  }
  if (!(den > 0.0)) throw std::domain_error("rate fit needs distinct k");
  return Scalar(std::exp(num / den));
}

template <typename Scalar>
Scalar fit_linear_rate(const SolverTrace<Scalar>& trace, Scalar fstar) {
  return fit_linear_rate(trace, fstar, 0, trace.rows.size());
}

}  // namespace vrprox

#endif  // VRPROX_DIAGNOSTICS_HPP
