#ifndef VRPROX_PROBLEM_HPP
#define VRPROX_PROBLEM_HPP

#include "vrprox/prox.hpp"
#include "vrprox/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace vrprox {

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n examples in rows, p features in columns.
template <typename Scalar>
struct Dataset {
  RowMatrix<Scalar> features;
  Vector<Scalar> labels;
  bool normalized = false;

  Index n() const { return features.rows(); }
  Index p() const { return features.cols(); }

  void validate() const {
    if (labels.size() != features.rows())
      throw std::invalid_argument("label count does not match feature rows");
    for (Index i = 0; i < n(); ++i) {
      if (!features.row(i).allFinite())
        throw std::invalid_argument("non-finite feature in row " +
                                    std::to_string(i));
      if (!std::isfinite(labels[i]))
        throw std::invalid_argument("non-finite label in row " +
                                    std::to_string(i));
      if (normalized && std::abs(features.row(i).norm() - Scalar(1)) > 1e-12)
        throw std::invalid_argument("row " + std::to_string(i) +
                                    " is flagged normalized but has norm " +
                                    std::to_string(features.row(i).norm()));
    }
  }
};

/// Rescales every nonzero row to unit Euclidean norm. Zero rows are left
/// as is and the flag stays false in that case.
template <typename Scalar>
Dataset<Scalar> normalize_rows(Dataset<Scalar> data) {
  bool all_unit = true;
  for (Index i = 0; i < data.n(); ++i) {
    const Scalar nrm = data.features.row(i).norm();
    if (nrm > Scalar(0))
      data.features.row(i) /= nrm;
    else
      all_unit = false;
  }
  data.normalized = all_unit;
  return data;
}

enum class LossKind { logistic, squared };

inline std::string to_string(LossKind k) {
  return k == LossKind::logistic ? "logistic" : "squared";
}

/// Per-example loss phi(z; b) at margin z = a^T x.
template <typename Scalar>
Scalar loss_value(LossKind kind, Scalar z, Scalar b) {
  if (kind == LossKind::squared) {
    const Scalar r = z - b;
    return Scalar(0.5) * r * r;
  }
  const Scalar m = -b * z;
  // log(1 + e^m) without overflow
  return m > Scalar(0) ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

/// d phi / dz at margin z.
template <typename Scalar>
Scalar loss_derivative(LossKind kind, Scalar z, Scalar b) {
  if (kind == LossKind::squared) return z - b;
  const Scalar m = b * z;
  if (m > Scalar(0)) {
    const Scalar e = std::exp(-m);
    return -b * e / (Scalar(1) + e);
  }
  return -b / (Scalar(1) + std::exp(m));
}

/// Curvature bound of phi: sup phi''.
inline double loss_curvature_bound(LossKind kind) {
  return kind == LossKind::logistic ? 0.25 : 1.0;
}

enum class PerturbationKind { none, dropout, gaussian };

/// Random corruption of each observed component gradient.
///
/// dropout zeroes each feature of a_i independently with probability `rate`
/// and evaluates the loss on the masked row without rescaling. gaussian adds
/// N(0, stddev^2) noise to every gradient coordinate.
template <typename Scalar>
struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::none;
  Scalar rate = Scalar(0);
  Scalar stddev = Scalar(0);

  static PerturbationSpec none() { return {}; }

  static PerturbationSpec dropout(Scalar rate) {
    if (!(rate >= Scalar(0) && rate < Scalar(1)))
      throw std::invalid_argument("dropout rate must lie in [0, 1)");
    return {PerturbationKind::dropout, rate, Scalar(0)};
  }

  static PerturbationSpec gaussian(Scalar stddev) {
    if (!(stddev >= Scalar(0)) || !std::isfinite(stddev))
      throw std::invalid_argument("gaussian stddev must be finite and >= 0");
    return {PerturbationKind::gaussian, Scalar(0), stddev};
  }

  bool active() const {
    return (kind == PerturbationKind::dropout && rate > Scalar(0)) ||
           (kind == PerturbationKind::gaussian && stddev > Scalar(0));
  }
};

/// Composite objective
///   F(x) = (1/n) sum_i [phi(a_i^T x; b_i) + (lambda/2)||x||^2] + psi(x).
///
/// The l2 term is part of every component, so L_i = c ||a_i||^2 + lambda
/// where c bounds phi'' and mu defaults to lambda. Immutable once built.
template <typename Scalar>
class Problem {
 public:
  Problem(Dataset<Scalar> data, LossKind loss, Scalar l2_strength,
          RegularizerSpec<Scalar> reg = RegularizerSpec<Scalar>::none(),
          std::optional<Scalar> mu = std::nullopt)
      : data_(std::move(data)),
        loss_(loss),
        lambda_(l2_strength),
        reg_(std::move(reg)) {
    data_.validate();
    if (data_.n() == 0 || data_.p() == 0)
      throw std::invalid_argument("dataset is empty");
    if (!(lambda_ >= Scalar(0)) || !std::isfinite(lambda_))
      throw std::invalid_argument("l2 strength must be finite and >= 0");
    if (loss_ == LossKind::logistic) {
      for (Index i = 0; i < data_.n(); ++i)
        if (data_.labels[i] != Scalar(1) && data_.labels[i] != Scalar(-1))
          throw std::invalid_argument("logistic loss needs labels in {-1,+1}; "
                                      "row " + std::to_string(i));
    }
    if (reg_.kind == RegularizerKind::box_indicator &&
        reg_.lower.size() != data_.p())
      throw std::invalid_argument("box bounds do not match feature dimension");

    const Scalar c = Scalar(loss_curvature_bound(loss_));
    smoothness_ = c * data_.features.rowwise().squaredNorm().array() + lambda_;
    mu_ = mu.value_or(lambda_);
    if (!(mu_ >= lambda_))
      throw std::invalid_argument("mu must be at least the l2 strength");
    if (mu_ > smoothness_.minCoeff())
      throw std::invalid_argument("mu exceeds min_i L_i");
  }

  const Dataset<Scalar>& data() const { return data_; }
  Index n() const { return data_.n(); }
  Index p() const { return data_.p(); }
  LossKind loss() const { return loss_; }
  Scalar l2_strength() const { return lambda_; }
  const RegularizerSpec<Scalar>& regularizer() const { return reg_; }
  const Vector<Scalar>& smoothness() const { return smoothness_; }
  Scalar max_smoothness() const { return smoothness_.maxCoeff(); }
  Scalar mu() const { return mu_; }

 private:
  Dataset<Scalar> data_;
  LossKind loss_;
  Scalar lambda_;
  RegularizerSpec<Scalar> reg_;
  Vector<Scalar> smoothness_;
  Scalar mu_;
};

namespace detail {

template <typename Scalar>
void check_dim(const Problem<Scalar>& prob, Index size) {
  if (size != prob.p())
    throw std::invalid_argument("dimension mismatch: expected " +
                                std::to_string(prob.p()) + ", got " +
                                std::to_string(size));
}

/// Row a_i after applying a dropout mask drawn from `seed`.
template <typename Scalar>
Vector<Scalar> dropout_row(const Problem<Scalar>& prob, Index i, Scalar rate,
                           std::uint64_t seed) {
  Vector<Scalar> a = prob.data().features.row(i).transpose();
  Rng eng(mix_seed(seed));
  for (Index j = 0; j < a.size(); ++j)
    if (uniform01(eng) < double(rate)) a[j] = Scalar(0);
  return a;
}

}  // namespace detail

/// Smooth part f(x). With mc_samples > 0 and dropout active the loss of each
/// example is averaged over mc_samples masks.
template <typename Scalar, typename Derived>
Scalar smooth_objective(const Problem<Scalar>& prob,
                          const Eigen::MatrixBase<Derived>& x,
                          const PerturbationSpec<Scalar>& pert,
                          int mc_samples, std::uint64_t rng_seed) {
  detail::check_dim(prob, x.size());
  if (mc_samples < 0) throw std::invalid_argument("mc_samples must be >= 0");
  const auto& A = prob.data().features;
  const auto& b = prob.data().labels;
  const bool mc = mc_samples > 0 && pert.kind == PerturbationKind::dropout &&
                  pert.rate > Scalar(0);
  Scalar sum(0);
  for (Index i = 0; i < prob.n(); ++i) {
    Scalar li(0);
    if (mc) {
      for (int s = 0; s < mc_samples; ++s) {
        const std::uint64_t seed = rng_seed + std::uint64_t(i) * std::uint64_t(mc_samples) + std::uint64_t(s);
        const Vector<Scalar> a = detail::dropout_row(prob, i, pert.rate, seed);
        li += loss_value(prob.loss(), Scalar(a.dot(x)), b[i]);
      }
      li /= Scalar(mc_samples);
    } else {
      li = loss_value(prob.loss(), Scalar(A.row(i).dot(x)), b[i]);
    }
    if (!std::isfinite(li))
      throw std::domain_error("non-finite loss at component " +
                              std::to_string(i));
    sum += li;
  }
  const Scalar value = sum / Scalar(prob.n()) +
                       Scalar(0.5) * prob.l2_strength() * x.squaredNorm();
  if (!std::isfinite(value))
    throw std::domain_error("non-finite objective");
  return value;
}

/// F(x) = f(x) + psi(x); +inf outside a box constraint.
template <typename Scalar, typename Derived>
Scalar evaluate_objective(const Problem<Scalar>& prob,
                          const Eigen::MatrixBase<Derived>& x,
                          const PerturbationSpec<Scalar>& pert,
                          int mc_samples, std::uint64_t rng_seed) {
  return smooth_objective(prob, x, pert, mc_samples, rng_seed) +
         regularizer_value(prob.regularizer(), x);
}

/// Exact, unperturbed objective.
template <typename Scalar, typename Derived>
Scalar evaluate_objective(const Problem<Scalar>& prob,
                          const Eigen::MatrixBase<Derived>& x) {
  return evaluate_objective(prob, x, PerturbationSpec<Scalar>::none(), 0, 0);
}

/// Observed gradient of f_i at x. A pure function of (i, x, pert, seed).
template <typename Scalar, typename Derived>
Vector<Scalar> component_gradient(const Problem<Scalar>& prob, Index i,
                                  const Eigen::MatrixBase<Derived>& x,
                                  const PerturbationSpec<Scalar>& pert,
                                  std::uint64_t seed) {
  if (i < 0 || i >= prob.n())
    throw std::out_of_range("component index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(prob.n()) +
                            ")");
  detail::check_dim(prob, x.size());
  const Scalar b = prob.data().labels[i];
  if (pert.kind == PerturbationKind::dropout && pert.rate > Scalar(0)) {
    const Vector<Scalar> a = detail::dropout_row(prob, i, pert.rate, seed);
    const Scalar d = loss_derivative(prob.loss(), Scalar(a.dot(x)), b);
    return d * a + prob.l2_strength() * x;
  }
  const auto a = prob.data().features.row(i).transpose();
  const Scalar d = loss_derivative(prob.loss(), Scalar(a.dot(x)), b);
  Vector<Scalar> g = d * a + prob.l2_strength() * x;
  if (pert.kind == PerturbationKind::gaussian && pert.stddev > Scalar(0)) {
    Rng eng(mix_seed(seed));
    std::normal_distribution<Scalar> noise(Scalar(0), pert.stddev);
    for (Index j = 0; j < g.size(); ++j) g[j] += noise(eng);
  }
  return g;
}

/// (1/n) sum_i component_gradient(i, x, seeds[i]). Shared by every full
/// gradient in the library so that replayed sums are bit-identical.
template <typename Scalar, typename Derived>
Vector<Scalar> mean_component_gradient(const Problem<Scalar>& prob,
                                       const Eigen::MatrixBase<Derived>& x,
                                       const PerturbationSpec<Scalar>& pert,
                                       std::span<const std::uint64_t> seeds) {
  if (static_cast<Index>(seeds.size()) != prob.n())
    throw std::invalid_argument("seed table size does not match n");
  Vector<Scalar> g = Vector<Scalar>::Zero(prob.p());
  for (Index i = 0; i < prob.n(); ++i)
    g += component_gradient(prob, i, x, pert, seeds[std::size_t(i)]);
  return g / Scalar(prob.n());
}

/// (1/n) sum_i component_gradient(i, x, seed_base + i). With no perturbation
/// this is the exact gradient of f.
template <typename Scalar, typename Derived>
Vector<Scalar> full_gradient(const Problem<Scalar>& prob,
                             const Eigen::MatrixBase<Derived>& x,
                             const PerturbationSpec<Scalar>& pert,
                             std::uint64_t seed_base) {
  detail::check_dim(prob, x.size());
  Vector<Scalar> g = Vector<Scalar>::Zero(prob.p());
  for (Index i = 0; i < prob.n(); ++i)
    g += component_gradient(prob, i, x, pert, seed_base + std::uint64_t(i));
  return g / Scalar(prob.n());
}

template <typename Scalar, typename Derived>
Vector<Scalar> full_gradient(const Problem<Scalar>& prob,
                             const Eigen::MatrixBase<Derived>& x) {
  return full_gradient(prob, x, PerturbationSpec<Scalar>::none(), 0);
}

}  // namespace vrprox

#endif  // VRPROX_PROBLEM_HPP
