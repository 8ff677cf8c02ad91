#ifndef VRPROX_FSTAR_HPP
#define VRPROX_FSTAR_HPP

#include "vrprox/solvers.hpp"

#include <limits>
#include <string>
#include <vector>

namespace vrprox {

template <typename Scalar>
struct FstarEstimate {
  Scalar value = std::numeric_limits<Scalar>::infinity();
  std::string algorithm;   // run that reached `value`; empty for F(x0)
  std::uint64_t seed = 0;
  Vector<Scalar> x;
  /// duality gap at x when it is defined
  std::optional<Scalar> gap;
};

/// Lowest objective reached by running each algorithm for `budget` effective
/// passes. budget == 0 returns F(x0). Failed runs are skipped.
template <typename Scalar>
FstarEstimate<Scalar> estimate_fstar(const Problem<Scalar>& prob,
                                     const std::vector<Algorithm>& algorithms,
                                     const SamplingDistribution<Scalar>& dist,
                                     RunOptions<Scalar> opts,
                                     double budget = 1000.0,
                                     double stage1_epochs = 0.0) {
  FstarEstimate<Scalar> best;
  best.x = opts.x0 ? *opts.x0 : Vector<Scalar>::Zero(prob.p());
  best.value = evaluate_objective(prob, best.x, opts.perturbation,
                                  opts.mc_samples, opts.eval_seed);
  best.seed = opts.seed;
  if (budget > 0.0) {
    opts.max_passes = budget;
    opts.record_every = budget;
    opts.record_every_iterations = 0;
    opts.variance_trials = -1;
    opts.record_gap = false;
    opts.observer = nullptr;
    for (Algorithm a : algorithms) {
      SolverResult<Scalar> res;
      try {
        res = run_algorithm(prob, a, dist, opts, stage1_epochs);
      } catch (const std::exception&) {
        continue;
      }
      if (!res.trace.ok()) continue;
      for (const Vector<Scalar>* cand : {&res.x, &res.output}) {
        const Scalar f = evaluate_objective(prob, *cand, opts.perturbation,
                                            opts.mc_samples, opts.eval_seed);
        if (f < best.value) {
          best.value = f;
          best.algorithm = to_string(a);
          best.x = *cand;
        }
      }
    }
  }
  if (!opts.perturbation.active() && duality_gap_supported(prob))
    best.gap = duality_gap(prob, best.x);
  return best;
}

}  // namespace vrprox

#endif  // VRPROX_FSTAR_HPP
