#ifndef VRPROX_ESTIMATORS_HPP
#define VRPROX_ESTIMATORS_HPP

#include "vrprox/problem.hpp"
#include "vrprox/sampling.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace vrprox {

/// One draw of a gradient estimator. `evaluations` is the number of
/// component gradients the draw cost.
template <typename Scalar>
struct GradientSample {
  Vector<Scalar> g;
  Index index = -1;
  std::uint64_t seed = 0;
  std::uint64_t evaluations = 0;
};

// ---------------------------------------------------------------------------
// Exact gradient (proximal gradient descent)

/// g = grad f(x). Perturbations never apply here.
template <typename Scalar, typename Derived>
GradientSample<Scalar> estimate_exact(const Problem<Scalar>& prob,
                                      const Eigen::MatrixBase<Derived>& x) {
  return {full_gradient(prob, x), -1, 0, std::uint64_t(prob.n())};
}

// ---------------------------------------------------------------------------
// Stochastic gradient

/// Average of `batch` i.i.d. importance-weighted component gradients.
template <typename Scalar, typename Derived>
GradientSample<Scalar> estimate_sgd(const Problem<Scalar>& prob,
                                    const Eigen::MatrixBase<Derived>& x,
                                    const SamplingDistribution<Scalar>& dist,
                                    Index batch,
                                    const PerturbationSpec<Scalar>& pert,
                                    Rng& rng) {
  if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
  GradientSample<Scalar> out;
  out.g = Vector<Scalar>::Zero(prob.p());
  for (Index b = 0; b < batch; ++b) {
    const Index i = dist.sample(rng);
    const std::uint64_t seed = rng();
    out.g += dist.weight(i) * component_gradient(prob, i, x, pert, seed);
    out.index = i;
    out.seed = seed;
  }
  if (batch > 1) out.g /= Scalar(batch);
  out.evaluations = std::uint64_t(batch);
  return out;
}

// ---------------------------------------------------------------------------
// random-SVRG

/// How the anchor term of an SVRG draw is perturbed. `replay` reuses the
/// seed that produced the anchor's contribution to mean_grad; `fresh` draws
/// a new perturbation.
enum class AnchorPerturbation { replay, fresh };

/// Anchor point, mean gradient at the anchor and the n seeds that produced
/// it. Memory is O(n + p).
template <typename Scalar>
struct SvrgState {
  Vector<Scalar> anchor;
  Vector<Scalar> mean_grad;
  std::vector<std::uint64_t> seed_table;
  std::int64_t anchor_epoch = 0;
  AnchorPerturbation mode = AnchorPerturbation::replay;
  bool initialized = false;
};

/// Moves the anchor to x, draws n fresh seeds and recomputes mean_grad.
/// Returns the number of gradient evaluations (n).
template <typename Scalar, typename Derived>
std::uint64_t svrg_reset(SvrgState<Scalar>& st, const Problem<Scalar>& prob,
                         const Eigen::MatrixBase<Derived>& x,
                         const PerturbationSpec<Scalar>& pert, Rng& rng) {
  st.anchor = x;
  st.seed_table.resize(std::size_t(prob.n()));
  for (auto& s : st.seed_table) s = rng();
  st.mean_grad = mean_component_gradient(prob, st.anchor, pert,
                                         std::span<const std::uint64_t>(st.seed_table));
  if (st.initialized) ++st.anchor_epoch;
  st.initialized = true;
  return std::uint64_t(prob.n());
}

template <typename Scalar, typename Derived>
SvrgState<Scalar> svrg_init(const Problem<Scalar>& prob,
                            const Eigen::MatrixBase<Derived>& x0,
                            const PerturbationSpec<Scalar>& pert, Rng& rng,
                            AnchorPerturbation mode,
                            std::uint64_t* evaluations = nullptr) {
  SvrgState<Scalar> st;
  st.mode = mode;
  const auto ev = svrg_reset(st, prob, x0, pert, rng);
  if (evaluations) *evaluations += ev;
  return st;
}

/// mean_grad recomputed from (anchor, seed_table). Bit-identical to the
/// stored value whenever the state is consistent.
template <typename Scalar>
Vector<Scalar> svrg_recompute_mean(const SvrgState<Scalar>& st,
                                   const Problem<Scalar>& prob,
                                   const PerturbationSpec<Scalar>& pert) {
  return mean_component_gradient(prob, st.anchor, pert,
                                 std::span<const std::uint64_t>(st.seed_table));
}

namespace detail {

template <typename Scalar, typename Derived>
Vector<Scalar> svrg_direction(const SvrgState<Scalar>& st,
                              const Problem<Scalar>& prob,
                              const Eigen::MatrixBase<Derived>& query,
                              const SamplingDistribution<Scalar>& dist, Index i,
                              const PerturbationSpec<Scalar>& pert,
                              std::uint64_t query_seed,
                              std::uint64_t anchor_seed) {
  return dist.weight(i) * (component_gradient(prob, i, query, pert, query_seed) -
                           component_gradient(prob, i, st.anchor, pert, anchor_seed)) +
         st.mean_grad;
}

}  // namespace detail

/// g = (1/(q_i n)) (grad~ f_i(query) - grad~ f_i(anchor)) + mean_grad.
template <typename Scalar, typename Derived>
GradientSample<Scalar> estimate_svrg(const SvrgState<Scalar>& st,
                                     const Problem<Scalar>& prob,
                                     const Eigen::MatrixBase<Derived>& query,
                                     const SamplingDistribution<Scalar>& dist,
                                     const PerturbationSpec<Scalar>& pert,
                                     Rng& rng) {
  if (!st.initialized) throw std::logic_error("SVRG state is not initialized");
  GradientSample<Scalar> out;
  out.index = dist.sample(rng);
  out.seed = rng();
  const std::uint64_t anchor_seed = st.mode == AnchorPerturbation::replay
                                        ? st.seed_table[std::size_t(out.index)]
                                        : rng();
  out.g = detail::svrg_direction(st, prob, query, dist, out.index, pert,
                                 out.seed, anchor_seed);
  out.evaluations = 2;
  return out;
}

/// With probability `reset_probability` (default 1/n) moves the anchor to
/// x_k. Returns the gradient evaluations charged (0 or n).
template <typename Scalar, typename Derived>
std::uint64_t svrg_post_step(SvrgState<Scalar>& st,
                             const Eigen::MatrixBase<Derived>& x_k, Rng& rng,
                             const Problem<Scalar>& prob,
                             const PerturbationSpec<Scalar>& pert,
                             std::optional<double> reset_probability = std::nullopt) {
  const double prob_reset = reset_probability.value_or(1.0 / double(prob.n()));
  bool reset;
  if (prob_reset >= 1.0)
    reset = true;
  else if (prob_reset <= 0.0)
    reset = false;
  else
    reset = uniform01(rng) < prob_reset;
  return reset ? svrg_reset(st, prob, x_k, pert, rng) : 0;
}

// ---------------------------------------------------------------------------
// SAGA with beta-shift

/// Table z^i (column i) and its mean. Memory is O(np).
template <typename Scalar>
struct SagaState {
  Matrix<Scalar> table;
  Vector<Scalar> mean;
  Scalar beta = Scalar(0);
  bool initialized = false;
};

/// z^i_0 = grad~ f_i(x0) - beta x0 for every i.
template <typename Scalar, typename Derived>
SagaState<Scalar> saga_init(const Problem<Scalar>& prob,
                            const Eigen::MatrixBase<Derived>& x0, Scalar beta,
                            const PerturbationSpec<Scalar>& pert, Rng& rng,
                            std::uint64_t* evaluations = nullptr) {
  if (!(beta >= Scalar(0) && beta <= prob.mu()))
    throw std::invalid_argument("SAGA beta must lie in [0, mu]");
  SagaState<Scalar> st;
  st.beta = beta;
  st.table.resize(prob.p(), prob.n());
  for (Index i = 0; i < prob.n(); ++i)
    st.table.col(i) = component_gradient(prob, i, x0, pert, rng()) - beta * x0;
  st.mean = st.table.rowwise().sum() / Scalar(prob.n());
  st.initialized = true;
  if (evaluations) *evaluations += std::uint64_t(prob.n());
  return st;
}

namespace detail {

template <typename Scalar, typename Derived>
Vector<Scalar> saga_direction(const SagaState<Scalar>& st,
                              const Problem<Scalar>& prob,
                              const Eigen::MatrixBase<Derived>& x,
                              const SamplingDistribution<Scalar>& dist, Index i,
                              const PerturbationSpec<Scalar>& pert,
                              std::uint64_t seed) {
  return dist.weight(i) * (component_gradient(prob, i, x, pert, seed) -
                           st.beta * x - st.table.col(i)) +
         st.mean + st.beta * x;
}

}  // namespace detail

template <typename Scalar, typename Derived>
GradientSample<Scalar> estimate_saga(const SagaState<Scalar>& st,
                                     const Problem<Scalar>& prob,
                                     const Eigen::MatrixBase<Derived>& x,
                                     const SamplingDistribution<Scalar>& dist,
                                     const PerturbationSpec<Scalar>& pert,
                                     Rng& rng) {
  if (!st.initialized) throw std::logic_error("SAGA state is not initialized");
  GradientSample<Scalar> out;
  out.index = dist.sample(rng);
  out.seed = rng();
  out.g = detail::saga_direction(st, prob, x, dist, out.index, pert, out.seed);
  out.evaluations = 1;
  return out;
}

/// Refreshes one uniformly drawn table entry at x_k (or entry `forced_j`).
/// Returns the gradient evaluations charged (1).
template <typename Scalar, typename Derived>
std::uint64_t saga_post_step(SagaState<Scalar>& st,
                             const Eigen::MatrixBase<Derived>& x_k, Rng& rng,
                             const Problem<Scalar>& prob,
                             const PerturbationSpec<Scalar>& pert,
                             std::optional<Index> forced_j = std::nullopt) {
  const Index n = prob.n();
  Index j;
  if (forced_j) {
    j = *forced_j;
    if (j < 0 || j >= n) throw std::out_of_range("forced SAGA index");
  } else {
    j = std::min<Index>(Index(uniform01(rng) * double(n)), n - 1);
  }
  Vector<Scalar> z = component_gradient(prob, j, x_k, pert, rng()) - st.beta * x_k;
  st.mean += (z - st.table.col(j)) / Scalar(n);
  st.table.col(j) = std::move(z);
  return 1;
}

// ---------------------------------------------------------------------------
// Variance probe

template <typename Scalar>
struct ExactEstimator {};

template <typename Scalar>
struct SgdEstimator {
  const SamplingDistribution<Scalar>* dist;
  Index batch = 1;
};

template <typename Scalar>
struct SvrgEstimator {
  const SvrgState<Scalar>* state;
  const SamplingDistribution<Scalar>* dist;
};

template <typename Scalar>
struct SagaEstimator {
  const SagaState<Scalar>* state;
  const SamplingDistribution<Scalar>* dist;
};

template <typename Scalar>
using EstimatorRef = std::variant<ExactEstimator<Scalar>, SgdEstimator<Scalar>,
                                  SvrgEstimator<Scalar>, SagaEstimator<Scalar>>;

/// Second moment E||g - grad f(x)||^2 of an estimator at x.
///
/// trials == 0 computes the Q-weighted sum over every index exactly, which
/// requires an inactive perturbation. trials > 0 averages over independent
/// draws from `rng`; with an active perturbation the reference gradient is
/// the mean of the draws (unbiased sample variance) since grad f of the
/// marginalized objective is not computable.
template <typename Scalar, typename Derived>
Scalar variance_probe(const EstimatorRef<Scalar>& est,
                      const Problem<Scalar>& prob,
                      const Eigen::MatrixBase<Derived>& x,
                      const PerturbationSpec<Scalar>& pert, int trials,
                      Rng& rng) {
  if (trials < 0) throw std::invalid_argument("trials must be >= 0");
  if (std::holds_alternative<ExactEstimator<Scalar>>(est)) return Scalar(0);
  if (trials == 0 && pert.active())
    throw std::invalid_argument(
        "exhaustive variance probe requires an inactive perturbation");

  const PerturbationSpec<Scalar> none = PerturbationSpec<Scalar>::none();
  const Vector<Scalar> grad = full_gradient(prob, x);

  if (trials == 0) {
    const auto* dist = std::visit(
        [](const auto& e) -> const SamplingDistribution<Scalar>* {
          if constexpr (requires { e.dist; })
            return e.dist;
          else
            return nullptr;
        },
        est);
    Scalar acc(0);
    for (Index i = 0; i < prob.n(); ++i) {
      Vector<Scalar> g;
      if (std::holds_alternative<SgdEstimator<Scalar>>(est))
        g = dist->weight(i) * component_gradient(prob, i, x, none, 0);
      else if (const auto* v = std::get_if<SvrgEstimator<Scalar>>(&est))
        g = detail::svrg_direction(*v->state, prob, x, *dist, i, none, 0, 0);
      else if (const auto* a = std::get_if<SagaEstimator<Scalar>>(&est))
        g = detail::saga_direction(*a->state, prob, x, *dist, i, none, 0);
      acc += dist->q(i) * (g - grad).squaredNorm();
    }
    if (const auto* s = std::get_if<SgdEstimator<Scalar>>(&est))
      acc /= Scalar(s->batch);
    return acc;
  }

  std::vector<Vector<Scalar>> draws;
  draws.reserve(std::size_t(trials));
  for (int t = 0; t < trials; ++t) {
    std::visit(
        [&](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, SgdEstimator<Scalar>>)
            draws.push_back(estimate_sgd(prob, x, *e.dist, e.batch, pert, rng).g);
          else if constexpr (std::is_same_v<E, SvrgEstimator<Scalar>>)
            draws.push_back(estimate_svrg(*e.state, prob, x, *e.dist, pert, rng).g);
          else if constexpr (std::is_same_v<E, SagaEstimator<Scalar>>)
            draws.push_back(estimate_saga(*e.state, prob, x, *e.dist, pert, rng).g);
        },
        est);
  }
  Vector<Scalar> ref = grad;
  Scalar denom = Scalar(trials);
  if (pert.active()) {
    ref = Vector<Scalar>::Zero(prob.p());
    for (const auto& d : draws) ref += d;
    ref /= Scalar(trials);
    if (trials > 1) denom = Scalar(trials - 1);
  }
  Scalar acc(0);
  for (const auto& d : draws) acc += (d - ref).squaredNorm();
  return acc / denom;
}

}  // namespace vrprox

#endif  // VRPROX_ESTIMATORS_HPP
