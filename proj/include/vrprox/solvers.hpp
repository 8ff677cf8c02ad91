#ifndef VRPROX_SOLVERS_HPP
#define VRPROX_SOLVERS_HPP

#include "vrprox/diagnostics.hpp"
#include "vrprox/estimators.hpp"
#include "vrprox/problem.hpp"
#include "vrprox/prox.hpp"
#include "vrprox/sampling.hpp"
#include "vrprox/schedules.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace vrprox {

enum class EstimatorKind { exact, sgd, svrg, saga };

/// Everything an observer may inspect after iteration k. Pointers are null
/// when the quantity does not exist for the running loop.
template <typename Scalar>
struct IterationInfo {
  std::int64_t k = 0;        // global iteration counter
  std::int64_t k_stage = 0;  // iterations since the last restart
  std::uint64_t evaluations = 0;
  const ScheduleState<Scalar>* schedule = nullptr;
  const Vector<Scalar>* x_prev = nullptr;
  const Vector<Scalar>* x = nullptr;
  const Vector<Scalar>* g = nullptr;
  const Vector<Scalar>* query = nullptr;  // point where g was drawn
  const Vector<Scalar>* x_hat = nullptr;
  const Vector<Scalar>* y = nullptr;
  const Vector<Scalar>* v = nullptr;
  /// Minimizer of the estimate sequence via its own quadratic recursion,
  /// independent of the closed form stored in v (accelerated SGD only).
  const Vector<Scalar>* v_recursive = nullptr;
  std::optional<Scalar> theta;
  std::optional<Scalar> beta;
  const SvrgState<Scalar>* svrg = nullptr;
  const SagaState<Scalar>* saga = nullptr;
  bool restarted = false;
};

template <typename Scalar>
struct RunOptions {
  /// Budget in effective passes (gradient evaluations / n).
  double max_passes = 100.0;
  /// Optional iteration cap; negative means none.
  std::int64_t max_iterations = -1;
  bool averaging = false;
  /// Trace cadence in effective passes. When record_every_iterations > 0 it
  /// takes precedence.
  double record_every = 5.0;
  std::int64_t record_every_iterations = 0;
  std::uint64_t seed = 1;
  PerturbationSpec<Scalar> perturbation = PerturbationSpec<Scalar>::none();
  /// Monte-Carlo objective under dropout: samples per example and a fixed
  /// seed, shared by every record point so that rows are comparable.
  int mc_samples = 5;
  std::uint64_t eval_seed = 0x5eedULL;
  bool record_gap = true;
  /// -1 disables the probe, 0 is exhaustive, > 0 is the number of draws.
  int variance_trials = -1;
  bool record_time = false;
  std::optional<Vector<Scalar>> x0;
  std::optional<Scalar> gamma0;
  Scalar saga_beta = Scalar(0);
  /// Stop at a record point once objective - *fstar <= stop_suboptimality.
  std::optional<Scalar> fstar;
  std::optional<Scalar> stop_suboptimality;
  std::function<void(const IterationInfo<Scalar>&)> observer;
};

template <typename Scalar>
struct SolverResult {
  Vector<Scalar> x;       // last iterate x_k
  Vector<Scalar> x_hat;   // averaged iterate (equals x without averaging)
  Vector<Scalar> output;  // what the algorithm returns (anchor for acc-SVRG)
  SolverTrace<Scalar> trace;
  std::uint64_t evaluations = 0;
  std::int64_t iterations = 0;
};

/// x_hat_k = (1 - tau) x_hat_{k-1} + tau x_k.
template <typename Scalar, typename D1, typename D2>
Vector<Scalar> update_averaging(const Eigen::MatrixBase<D1>& x_hat_prev,
                                const Eigen::MatrixBase<D2>& x_k, Scalar tau) {
  if (!(tau >= Scalar(0) && tau <= Scalar(1)))
    throw std::invalid_argument("averaging weight must lie in [0, 1]");
  return (Scalar(1) - tau) * x_hat_prev + tau * x_k;
}

namespace detail {

/// Cost accounting, trace recording and termination shared by the loops.
template <typename Scalar>
class RunMonitor {
 public:
  RunMonitor(const Problem<Scalar>& prob, const RunOptions<Scalar>& opts,
             std::string algorithm)
      : prob_(prob), opts_(opts), start_(std::chrono::steady_clock::now()) {
    trace_.algorithm = std::move(algorithm);
    if (opts_.record_every <= 0.0 && opts_.record_every_iterations <= 0)
      throw std::invalid_argument("record cadence must be positive");
  }

  void charge(std::uint64_t ev) { evaluations_ += ev; }
  std::uint64_t evaluations() const { return evaluations_; }
  double passes() const { return double(evaluations_) / double(prob_.n()); }

  bool budget_left(std::int64_t k) const {
    if (!trace_.ok() || stopped_) return false;
    if (opts_.max_iterations >= 0 && k >= opts_.max_iterations) return false;
    return passes() < opts_.max_passes;
  }

  /// Records when the cadence is due (or `force`). The variance callback is
  /// only invoked when a row is written.
  template <typename VarianceFn>
  void maybe_record(std::int64_t k, const Vector<Scalar>& x,
                    const Vector<Scalar>* x_hat, bool force, bool restart,
                    VarianceFn&& variance) {
    if (!force && !due(k)) return;
    TraceRow<Scalar> row;
    row.k = k;
    row.effective_passes = passes();
    row.restart = restart;
    row.feasible = is_feasible(prob_.regularizer(), x);
    try {
      row.objective = objective(x);
      if (x_hat) row.objective_avg = objective(*x_hat);
      if (opts_.record_gap && !opts_.perturbation.active() &&
          duality_gap_supported(prob_))
        row.gap = duality_gap(prob_, x);
      if (opts_.variance_trials >= 0) row.variance = variance();
    } catch (const std::domain_error& e) {
      fail(std::string(e.what()) + " at iteration " + std::to_string(k));
      row.objective = std::numeric_limits<Scalar>::quiet_NaN();
    }
    if (opts_.record_time)
      row.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start_)
                        .count();

    if (!std::isfinite(row.objective)) {
      fail("non-finite objective at iteration " + std::to_string(k));
    } else if (trace_.rows.empty()) {
      f0_ = row.objective;
    } else if (f0_ > Scalar(0) && row.objective > Scalar(1e6) * f0_) {
      fail("divergence: objective exceeded 1e6 * F(x_0) at iteration " +
           std::to_string(k));
    }
    if (opts_.fstar && opts_.stop_suboptimality &&
        row.objective - *opts_.fstar <= *opts_.stop_suboptimality)
      stopped_ = true;
    last_k_ = k;
    last_pass_ = row.effective_passes;
    trace_.rows.push_back(std::move(row));
  }

  void maybe_record(std::int64_t k, const Vector<Scalar>& x,
                    const Vector<Scalar>* x_hat, bool force, bool restart) {
    maybe_record(k, x, x_hat, force, restart, [] { return Scalar(0); });
  }

  /// Aborts on a non-finite iterate.
  bool check_finite(std::int64_t k, const Vector<Scalar>& x) {
    if (x.allFinite()) return true;
    fail("non-finite iterate at iteration " + std::to_string(k));
    return false;
  }

  void mark_restart(std::int64_t k) { trace_.restart_index = k; }

  /// Final row if the last iteration was not recorded yet.
  template <typename VarianceFn>
  void finish(std::int64_t k, const Vector<Scalar>& x,
              const Vector<Scalar>* x_hat, VarianceFn&& variance) {
    if (!trace_.ok()) return;
    if (trace_.rows.empty() || trace_.rows.back().k != k)
      maybe_record(k, x, x_hat, true, false, variance);
  }

  SolverTrace<Scalar> take_trace() { return std::move(trace_); }

  Rng probe_rng() const { return Rng(mix_seed(opts_.seed ^ 0xa5a5a5a5ULL)); }

 private:
  bool due(std::int64_t k) const {
    if (opts_.record_every_iterations > 0)
      return k - last_k_ >= opts_.record_every_iterations;
    return passes() - last_pass_ >= opts_.record_every - 1e-12;
  }

  Scalar objective(const Vector<Scalar>& x) const {
    const bool mc = opts_.perturbation.active() &&
                    opts_.perturbation.kind == PerturbationKind::dropout;
    const int m = mc ? opts_.mc_samples : 0;
    // a box violation is reported through the feasibility flag
    if (prob_.regularizer().kind == RegularizerKind::box_indicator)
      return smooth_objective(prob_, x, opts_.perturbation, m, opts_.eval_seed);
    return evaluate_objective(prob_, x, opts_.perturbation, m, opts_.eval_seed);
  }

  void fail(std::string why) {
    if (trace_.failure.empty()) trace_.failure = std::move(why);
  }

  const Problem<Scalar>& prob_;
  const RunOptions<Scalar>& opts_;
  std::chrono::steady_clock::time_point start_;
  SolverTrace<Scalar> trace_;
  std::uint64_t evaluations_ = 0;
  std::int64_t last_k_ = 0;
  double last_pass_ = 0.0;
  Scalar f0_{};
  bool stopped_ = false;
};

template <typename Scalar>
void require_strongly_convex(const Problem<Scalar>& prob) {
  if (!(prob.mu() > Scalar(0)))
    throw std::invalid_argument("solvers require mu > 0 (strongly convex case)");
}

template <typename Scalar>
Vector<Scalar> initial_point(const Problem<Scalar>& prob,
                             const RunOptions<Scalar>& opts) {
  if (!opts.x0) return Vector<Scalar>::Zero(prob.p());
  check_dim(prob, opts.x0->size());
  return *opts.x0;
}

template <typename Scalar>
void require_step_bound(Scalar eta, Scalar bound, const char* what) {
  if (eta > bound * (Scalar(1) + Scalar(1e-12)))
    throw std::invalid_argument(std::string("step size ") +
                                std::to_string(double(eta)) + " violates " +
                                what + " = " + std::to_string(double(bound)));
}

inline std::string estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::exact: return "exact";
    case EstimatorKind::sgd: return "sgd";
    case EstimatorKind::svrg: return "svrg";
    case EstimatorKind::saga: return "saga";
  }
  return "?";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Basic proximal step: x_k = prox(x_{k-1} - eta_k g_k), optional averaging

template <typename Scalar>
SolverResult<Scalar> run_basic(const Problem<Scalar>& prob, EstimatorKind kind,
                               const SamplingDistribution<Scalar>& dist,
                               const StepPolicy<Scalar>& policy,
                               const RunOptions<Scalar>& opts) {
  detail::require_strongly_convex(prob);
  if (dist.size() != prob.n())
    throw std::invalid_argument("sampling distribution size differs from n");
  if (regime_of(policy.kind) != Regime::basic)
    throw std::invalid_argument("run_basic needs a non-accelerated policy");
  const bool vr = kind == EstimatorKind::svrg || kind == EstimatorKind::saga;
  const Index n = prob.n();
  const Scalar mu = prob.mu();
  const auto& pert = opts.perturbation;

  TwoStageController controller(is_decreasing(policy.kind),
                                policy.stage1_epochs);
  {
    const Scalar eta1 = step_size(policy, 1, controller.stage());
    if (vr)
      detail::require_step_bound(eta1, Scalar(1) / (Scalar(12) * dist.L_Q()),
                                 "1/(12 L_Q)");
    else
      detail::require_step_bound(eta1, Scalar(1) / prob.max_smoothness(), "1/L");
  }

  detail::RunMonitor<Scalar> mon(prob, opts, detail::estimator_name(kind));
  Rng rng(mix_seed(opts.seed));
  Vector<Scalar> x = detail::initial_point(prob, opts);
  Vector<Scalar> x_hat = x;
  Schedule<Scalar> schedule(
      Regime::basic, mu, opts.gamma0.value_or(mu), n,
      vr ? std::optional<Scalar>(Scalar(1) / (Scalar(5) * Scalar(n)))
         : std::nullopt);

  SvrgState<Scalar> svrg;
  SagaState<Scalar> saga;
  std::uint64_t init_ev = 0;
  if (kind == EstimatorKind::svrg)
    svrg = svrg_init(prob, x, pert, rng, AnchorPerturbation::replay, &init_ev);
  else if (kind == EstimatorKind::saga)
    saga = saga_init(prob, x, opts.saga_beta, pert, rng, &init_ev);
  mon.charge(init_ev);

  const Index batch = batch_size(policy);
  Rng probe_rng = mon.probe_rng();
  auto probe = [&](const Vector<Scalar>& at) {
    EstimatorRef<Scalar> est = ExactEstimator<Scalar>{};
    if (kind == EstimatorKind::sgd) est = SgdEstimator<Scalar>{&dist, batch};
    if (kind == EstimatorKind::svrg) est = SvrgEstimator<Scalar>{&svrg, &dist};
    if (kind == EstimatorKind::saga) est = SagaEstimator<Scalar>{&saga, &dist};
    return variance_probe(est, prob, at, pert, opts.variance_trials, probe_rng);
  };
  const Vector<Scalar>* avg = opts.averaging ? &x_hat : nullptr;

  std::int64_t k = 0, k_stage = 0;
  mon.maybe_record(0, x, avg, true, false, [&] { return probe(x); });
  if (controller.stage() == Stage::decreasing && policy.stage1_epochs <= 0.0)
    mon.mark_restart(0);

  Vector<Scalar> x_prev;
  while (mon.budget_left(k)) {
    ++k;
    ++k_stage;
    const Scalar eta = step_size(policy, k_stage, controller.stage());
    const auto& st = schedule.advance(eta);

    GradientSample<Scalar> gs;
    switch (kind) {
      case EstimatorKind::exact: gs = estimate_exact(prob, x); break;
      case EstimatorKind::sgd:
        gs = estimate_sgd(prob, x, dist, batch, pert, rng);
        break;
      case EstimatorKind::svrg:
        gs = estimate_svrg(svrg, prob, x, dist, pert, rng);
        break;
      case EstimatorKind::saga:
        gs = estimate_saga(saga, prob, x, dist, pert, rng);
        break;
    }
    mon.charge(gs.evaluations);
    x_prev = std::move(x);
    x = prox(prob.regularizer(), eta, (x_prev - eta * gs.g).eval());

    if (kind == EstimatorKind::svrg)
      mon.charge(svrg_post_step(svrg, x, rng, prob, pert));
    else if (kind == EstimatorKind::saga)
      mon.charge(saga_post_step(saga, x, rng, prob, pert));
    if (opts.averaging) x_hat = update_averaging(x_hat, x, st.tau);
    const bool restart = controller.should_restart(mon.passes());

    if (opts.observer) {
      IterationInfo<Scalar> info;
      info.k = k;
      info.k_stage = k_stage;
      info.evaluations = mon.evaluations();
      info.schedule = &st;
      info.x_prev = &x_prev;
      info.x = &x;
      info.g = &gs.g;
      info.query = &x_prev;
      info.x_hat = &x_hat;
      info.svrg = kind == EstimatorKind::svrg ? &svrg : nullptr;
      info.saga = kind == EstimatorKind::saga ? &saga : nullptr;
      info.restarted = restart;
      opts.observer(info);
    }
    if (!mon.check_finite(k, x)) break;

    if (restart) {
      schedule.restart(mu);
      k_stage = 0;
      x_hat = x;
      mon.mark_restart(k);
    }
    mon.maybe_record(k, x, avg, restart, restart, [&] { return probe(x); });
  }
  mon.finish(k, x, avg, [&] { return probe(x); });

  SolverResult<Scalar> res;
  res.output = opts.averaging ? x_hat : x;
  res.x = std::move(x);
  res.x_hat = opts.averaging ? std::move(x_hat) : res.x;
  res.evaluations = mon.evaluations();
  res.iterations = k;
  res.trace = mon.take_trace();
  return res;
}

// ---------------------------------------------------------------------------
// Accelerated SGD: extrapolated proximal steps with delta_k = sqrt(eta_k gamma_k)

template <typename Scalar>
SolverResult<Scalar> run_accelerated_sgd(const Problem<Scalar>& prob,
                                         EstimatorKind kind,
                                         const SamplingDistribution<Scalar>& dist,
                                         const StepPolicy<Scalar>& policy,
                                         const RunOptions<Scalar>& opts) {
  detail::require_strongly_convex(prob);
  if (kind != EstimatorKind::exact && kind != EstimatorKind::sgd)
    throw std::invalid_argument("accelerated SGD takes exact or sgd estimators");
  if (dist.size() != prob.n())
    throw std::invalid_argument("sampling distribution size differs from n");
  if (regime_of(policy.kind) != Regime::accelerated_sgd)
    throw std::invalid_argument("run_accelerated_sgd needs an acc-SGD policy");
  const Scalar mu = prob.mu();
  const auto& pert = opts.perturbation;

  TwoStageController controller(is_decreasing(policy.kind),
                                policy.stage1_epochs);
  detail::require_step_bound(step_size(policy, 1, controller.stage()),
                             Scalar(1) / prob.max_smoothness(), "1/L");

  detail::RunMonitor<Scalar> mon(
      prob, opts, "acc-" + detail::estimator_name(kind));
  Rng rng(mix_seed(opts.seed));
  Vector<Scalar> x = detail::initial_point(prob, opts);
  Vector<Scalar> y = x, v = x, v_rec = x, x_prev;
  Schedule<Scalar> schedule(Regime::accelerated_sgd, mu,
                            opts.gamma0.value_or(mu), prob.n());

  const Index batch = batch_size(policy);
  Rng probe_rng = mon.probe_rng();
  auto probe = [&](const Vector<Scalar>& at) {
    EstimatorRef<Scalar> est = ExactEstimator<Scalar>{};
    if (kind == EstimatorKind::sgd) est = SgdEstimator<Scalar>{&dist, batch};
    return variance_probe(est, prob, at, pert, opts.variance_trials, probe_rng);
  };

  std::int64_t k = 0, k_stage = 0;
  mon.maybe_record(0, x, nullptr, true, false, [&] { return probe(x); });
  if (controller.stage() == Stage::decreasing && policy.stage1_epochs <= 0.0)
    mon.mark_restart(0);

  while (mon.budget_left(k)) {
    ++k;
    ++k_stage;
    const Scalar gamma_prev = schedule.state().gamma;
    const Scalar eta = step_size(policy, k_stage, controller.stage());
    const ScheduleState<Scalar> st = schedule.advance(eta);
    const Scalar delta = st.delta, gamma = st.gamma;

    GradientSample<Scalar> gs =
        kind == EstimatorKind::exact
            ? estimate_exact(prob, y)
            : estimate_sgd(prob, y, dist, batch, pert, rng);
    mon.charge(gs.evaluations);
    const Vector<Scalar> y_prev = y;
    x_prev = std::move(x);
    x = prox(prob.regularizer(), eta, (y_prev - eta * gs.g).eval());

    // minimizer of d_k: closed form and the quadratic recursion
    v = x_prev + (x - x_prev) / delta;
    v_rec = ((Scalar(1) - delta) * gamma_prev / gamma) * v_rec +
            (mu * delta / gamma) * y_prev -
            (delta / (gamma * eta)) * (y_prev - x);

    const bool restart = controller.should_restart(mon.passes());
    std::optional<Scalar> theta, beta;
    if (restart) {
      schedule.restart(mu);
      k_stage = 0;
      y = x;
      v = x;
      v_rec = x;
      mon.mark_restart(k);
    } else {
      const Scalar eta_next = step_size(policy, k_stage + 1, controller.stage());
      const auto next = schedule.peek(eta_next);
      beta = delta * (Scalar(1) - delta) * eta_next /
             (eta * next.delta + eta_next * delta * delta);
      theta = next.gamma / (gamma + next.delta * mu);
      y = x + *beta * (x - x_prev);
    }

    if (opts.observer) {
      IterationInfo<Scalar> info;
      info.k = k;
      info.k_stage = restart ? 0 : k_stage;
      info.evaluations = mon.evaluations();
      info.schedule = &st;
      info.x_prev = &x_prev;
      info.x = &x;
      info.g = &gs.g;
      info.query = &y_prev;
      info.y = &y;
      info.v = &v;
      info.v_recursive = &v_rec;
      info.theta = theta;
      info.beta = beta;
      info.restarted = restart;
      opts.observer(info);
    }
    if (!mon.check_finite(k, x)) break;
    mon.maybe_record(k, x, nullptr, restart, restart, [&] { return probe(x); });
  }
  mon.finish(k, x, nullptr, [&] { return probe(x); });

  SolverResult<Scalar> res;
  res.x = x;
  res.x_hat = x;
  res.output = std::move(x);
  res.evaluations = mon.evaluations();
  res.iterations = k;
  res.trace = mon.take_trace();
  return res;
}

// ---------------------------------------------------------------------------
// Accelerated random-SVRG (fresh anchor perturbations, output is the anchor)

template <typename Scalar>
SolverResult<Scalar> run_accelerated_svrg(const Problem<Scalar>& prob,
                                          const SamplingDistribution<Scalar>& dist,
                                          const StepPolicy<Scalar>& policy,
                                          const RunOptions<Scalar>& opts) {
  detail::require_strongly_convex(prob);
  if (dist.size() != prob.n())
    throw std::invalid_argument("sampling distribution size differs from n");
  if (regime_of(policy.kind) != Regime::accelerated_svrg)
    throw std::invalid_argument("run_accelerated_svrg needs an acc-SVRG policy");
  const Index n = prob.n();
  const Scalar nn = Scalar(n);
  const Scalar mu = prob.mu();
  const auto& pert = opts.perturbation;

  TwoStageController controller(is_decreasing(policy.kind),
                                policy.stage1_epochs);
  detail::RunMonitor<Scalar> mon(prob, opts, "acc-svrg");
  Rng rng(mix_seed(opts.seed));
  Vector<Scalar> x = detail::initial_point(prob, opts);
  Vector<Scalar> v = x, y;
  Schedule<Scalar> schedule(Regime::accelerated_svrg, mu,
                            opts.gamma0.value_or(mu), n);
  std::uint64_t init_ev = 0;
  SvrgState<Scalar> svrg =
      svrg_init(prob, x, pert, rng, AnchorPerturbation::fresh, &init_ev);
  mon.charge(init_ev);

  Rng probe_rng = mon.probe_rng();
  auto probe = [&](const Vector<Scalar>& at) {
    return variance_probe(EstimatorRef<Scalar>(SvrgEstimator<Scalar>{&svrg, &dist}),
                          prob, at, pert, opts.variance_trials, probe_rng);
  };

  std::int64_t k = 0, k_stage = 0;
  mon.maybe_record(0, x, nullptr, true, false, [&] { return probe(x); });
  if (controller.stage() == Stage::decreasing && policy.stage1_epochs <= 0.0)
    mon.mark_restart(0);

  Vector<Scalar> x_prev;
  while (mon.budget_left(k)) {
    ++k;
    ++k_stage;
    const Scalar eta = step_size(policy, k_stage, controller.stage());
    const auto& st = schedule.advance(eta);
    const Scalar delta = st.delta, gamma = st.gamma;
    detail::require_step_bound(
        eta,
        std::min(Scalar(1) / (Scalar(3) * dist.L_Q()),
                 Scalar(1) / (Scalar(15) * gamma * nn)),
        "min(1/(3 L_Q), 1/(15 gamma_k n))");

    const Scalar theta = (Scalar(3) * nn * delta - Scalar(5) * mu * eta) /
                         (Scalar(3) - Scalar(5) * mu * eta);
    if (!(theta >= Scalar(0) && theta <= Scalar(1)))
      throw std::domain_error("theta_k = " + std::to_string(double(theta)) +
                              " outside [0,1]: inconsistent eta/mu/n");
    y = theta * v + (Scalar(1) - theta) * svrg.anchor;

    GradientSample<Scalar> gs = estimate_svrg(svrg, prob, y, dist, pert, rng);
    mon.charge(gs.evaluations);
    x_prev = std::move(x);
    x = prox(prob.regularizer(), eta, (y - eta * gs.g).eval());
    const Scalar a = mu * delta / gamma;
    v = (Scalar(1) - a) * v + a * y + (delta / (gamma * eta)) * (x - y);
    mon.charge(svrg_post_step(svrg, x, rng, prob, pert));

    const bool restart = controller.should_restart(mon.passes());
    if (restart) {
      schedule.restart(mu);
      k_stage = 0;
      v = x;
      mon.charge(svrg_reset(svrg, prob, x, pert, rng));
      mon.mark_restart(k);
    }

    if (opts.observer) {
      IterationInfo<Scalar> info;
      info.k = k;
      info.k_stage = k_stage;
      info.evaluations = mon.evaluations();
      info.schedule = &st;
      info.x_prev = &x_prev;
      info.x = &x;
      info.g = &gs.g;
      info.query = &y;
      info.y = &y;
      info.v = &v;
      info.theta = theta;
      info.svrg = &svrg;
      info.restarted = restart;
      opts.observer(info);
    }
    if (!mon.check_finite(k, x)) break;
    mon.maybe_record(k, x, nullptr, restart, restart, [&] { return probe(x); });
  }
  mon.finish(k, x, nullptr, [&] { return probe(x); });

  SolverResult<Scalar> res;
  res.x = std::move(x);
  res.x_hat = res.x;
  res.output = svrg.anchor;
  res.evaluations = mon.evaluations();
  res.iterations = k;
  res.trace = mon.take_trace();
  return res;
}

// ---------------------------------------------------------------------------
// Named algorithms

/// The step-size table rows plus the SAGA and exact-gradient variants.
enum class Algorithm {
  ista,
  fista,
  sgd,
  sgd_d,
  acc_sgd,
  acc_sgd_d,
  acc_mb_sgd_d,
  rand_svrg,
  rand_svrg_d,
  saga,
  saga_d,
  acc_svrg,
  acc_svrg_d,
};

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ista: return "ista";
    case Algorithm::fista: return "fista";
    case Algorithm::sgd: return "sgd";
    case Algorithm::sgd_d: return "sgd-d";
    case Algorithm::acc_sgd: return "acc-sgd";
    case Algorithm::acc_sgd_d: return "acc-sgd-d";
    case Algorithm::acc_mb_sgd_d: return "acc-mb-sgd-d";
    case Algorithm::rand_svrg: return "rand-svrg";
    case Algorithm::rand_svrg_d: return "rand-svrg-d";
    case Algorithm::saga: return "saga";
    case Algorithm::saga_d: return "saga-d";
    case Algorithm::acc_svrg: return "acc-svrg";
    case Algorithm::acc_svrg_d: return "acc-svrg-d";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (int a = 0; a <= int(Algorithm::acc_svrg_d); ++a)
    if (s == to_string(Algorithm(a))) return Algorithm(a);
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

inline PolicyKind policy_kind(Algorithm a) {
  switch (a) {
    case Algorithm::ista:
    case Algorithm::sgd: return PolicyKind::sgd_const;
    case Algorithm::sgd_d: return PolicyKind::sgd_decr;
    case Algorithm::fista:
    case Algorithm::acc_sgd: return PolicyKind::acc_sgd_const;
    case Algorithm::acc_sgd_d: return PolicyKind::acc_sgd_decr;
    case Algorithm::acc_mb_sgd_d: return PolicyKind::acc_mb_sgd_decr;
    case Algorithm::rand_svrg:
    case Algorithm::saga: return PolicyKind::svrg_const;
    case Algorithm::rand_svrg_d:
    case Algorithm::saga_d: return PolicyKind::svrg_decr;
    case Algorithm::acc_svrg: return PolicyKind::acc_svrg_const;
    case Algorithm::acc_svrg_d: return PolicyKind::acc_svrg_decr;
  }
  return PolicyKind::sgd_const;
}

inline EstimatorKind estimator_kind(Algorithm a) {
  switch (a) {
    case Algorithm::ista:
    case Algorithm::fista: return EstimatorKind::exact;
    case Algorithm::rand_svrg:
    case Algorithm::rand_svrg_d:
    case Algorithm::acc_svrg:
    case Algorithm::acc_svrg_d: return EstimatorKind::svrg;
    case Algorithm::saga:
    case Algorithm::saga_d: return EstimatorKind::saga;
    default: return EstimatorKind::sgd;
  }
}

/// Policy constants from the problem: L = max_i L_i, L_Q from `dist`.
template <typename Scalar>
StepPolicy<Scalar> make_policy(Algorithm a, const Problem<Scalar>& prob,
                               const SamplingDistribution<Scalar>& dist,
                               double stage1_epochs = 0.0) {
  StepPolicy<Scalar> p;
  p.kind = policy_kind(a);
  p.L = prob.max_smoothness();
  p.L_Q = dist.L_Q();
  p.mu = prob.mu();
  p.n = prob.n();
  p.stage1_epochs = stage1_epochs;
  return p;
}

template <typename Scalar>
SolverResult<Scalar> run_algorithm(const Problem<Scalar>& prob, Algorithm a,
                                   const SamplingDistribution<Scalar>& dist,
                                   const StepPolicy<Scalar>& policy,
                                   const RunOptions<Scalar>& opts) {
  SolverResult<Scalar> res;
  switch (regime_of(policy.kind)) {
    case Regime::basic:
      res = run_basic(prob, estimator_kind(a), dist, policy, opts);
      break;
    case Regime::accelerated_sgd:
      res = run_accelerated_sgd(prob, estimator_kind(a), dist, policy, opts);
      break;
    case Regime::accelerated_svrg:
      res = run_accelerated_svrg(prob, dist, policy, opts);
      break;
  }
  res.trace.algorithm = to_string(a);
  return res;
}

template <typename Scalar>
SolverResult<Scalar> run_algorithm(const Problem<Scalar>& prob, Algorithm a,
                                   const SamplingDistribution<Scalar>& dist,
                                   const RunOptions<Scalar>& opts,
                                   double stage1_epochs = 0.0) {
  return run_algorithm(prob, a, dist, make_policy(a, prob, dist, stage1_epochs),
                       opts);
}

/// Constant stage for stage1_epochs passes, then a restart from the current
/// iterate with the decreasing rule and gamma_0 = mu.
template <typename Scalar>
SolverResult<Scalar> run_two_stage(const Problem<Scalar>& prob, Algorithm a,
                                   const SamplingDistribution<Scalar>& dist,
                                   const RunOptions<Scalar>& opts,
                                   double stage1_epochs) {
  if (!is_decreasing(policy_kind(a)))
    throw std::invalid_argument(std::string("'") + to_string(a) +
                                "' has no decreasing stage");
  return run_algorithm(prob, a, dist, opts, stage1_epochs);
}

}  // namespace vrprox

#endif  // VRPROX_SOLVERS_HPP
