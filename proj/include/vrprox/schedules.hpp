#ifndef VRPROX_SCHEDULES_HPP
#define VRPROX_SCHEDULES_HPP

#include "vrprox/prox.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace vrprox {

/// How delta_k is tied to eta_k and gamma_k.
///   basic            delta = eta * gamma
///   accelerated_sgd  delta = sqrt(eta * gamma)
///   accelerated_svrg delta = sqrt(5 eta gamma / (3n))
enum class Regime { basic, accelerated_sgd, accelerated_svrg };

template <typename Scalar>
struct DeltaGamma {
  Scalar delta;
  Scalar gamma;
};

/// Solves the coupled system delta_k = h(eta_k, gamma_k),
/// gamma_k = (1 - delta_k) gamma_{k-1} + mu delta_k for (delta_k, gamma_k).
template <typename Scalar>
DeltaGamma<Scalar> solve_delta(Regime regime, Scalar eta, Scalar gamma_prev,
                               Scalar mu, Index n = 1) {
  if (!(eta > Scalar(0))) throw std::invalid_argument("eta must be positive");
  if (!(mu >= Scalar(0))) throw std::invalid_argument("mu must be >= 0");
  if (!(gamma_prev >= mu))
    throw std::invalid_argument("gamma_{k-1} must be at least mu");
  Scalar delta;
  if (regime == Regime::basic) {
    delta = eta * gamma_prev / (Scalar(1) + eta * (gamma_prev - mu));
  } else {
    const Scalar c = regime == Regime::accelerated_sgd
                         ? eta
                         : Scalar(5) * eta / (Scalar(3) * Scalar(n));
    // positive root of delta^2 + c (gamma_prev - mu) delta - c gamma_prev,
    // written in the cancellation-free form
    const Scalar b = c * (gamma_prev - mu);
    delta = Scalar(2) * c * gamma_prev /
            (b + std::sqrt(b * b + Scalar(4) * c * gamma_prev));
  }
  if (!(delta < Scalar(1)))
    throw std::domain_error(
        "step size too large for the regime: delta_k = " +
        std::to_string(double(delta)) + " violates delta_k < 1");
  if (!(delta > Scalar(0)))
    throw std::domain_error("delta_k must be positive (is gamma_0 > 0?)");
  // (1 - delta) gamma_prev + mu delta, arranged so that gamma_k >= mu exactly
  return {delta, mu + (Scalar(1) - delta) * (gamma_prev - mu)};
}

/// Snapshot of the estimate-sequence weights after iteration k.
template <typename Scalar>
struct ScheduleState {
  std::int64_t k = 0;
  Scalar eta{};
  Scalar delta{};
  Scalar gamma{};
  Scalar Gamma = Scalar(1);  // prod_{t <= k} (1 - delta_t)
  Scalar tau{};
  Regime regime = Regime::basic;
};

/// Running recursion for (delta_k, gamma_k, Gamma_k, tau_k).
template <typename Scalar>
class Schedule {
 public:
  /// tau_cap, when set, makes tau_k = min(delta_k, tau_cap); otherwise
  /// tau_k = delta_k.
  Schedule(Regime regime, Scalar mu, Scalar gamma0, Index n,
           std::optional<Scalar> tau_cap = std::nullopt)
      : mu_(mu), n_(n), tau_cap_(tau_cap) {
    state_.regime = regime;
    restart(gamma0);
  }

  void restart(Scalar gamma0) {
    if (!(gamma0 >= mu_)) throw std::invalid_argument("gamma_0 must be >= mu");
    const Regime r = state_.regime;
    state_ = ScheduleState<Scalar>{};
    state_.regime = r;
    state_.gamma = gamma0;
  }

  /// Weights iteration k+1 would get with step eta, without committing.
  DeltaGamma<Scalar> peek(Scalar eta) const {
    return solve_delta(state_.regime, eta, state_.gamma, mu_, n_);
  }

  const ScheduleState<Scalar>& advance(Scalar eta) {
    const auto dg = peek(eta);
    state_.k += 1;
    state_.eta = eta;
    state_.delta = dg.delta;
    state_.gamma = dg.gamma;
    state_.Gamma *= (Scalar(1) - dg.delta);
    state_.tau = tau_cap_ ? std::min(dg.delta, *tau_cap_) : dg.delta;
    return state_;
  }

  const ScheduleState<Scalar>& state() const { return state_; }
  Scalar mu() const { return mu_; }

 private:
  ScheduleState<Scalar> state_;
  Scalar mu_;
  Index n_;
  std::optional<Scalar> tau_cap_;
};

// ---------------------------------------------------------------------------
// Step-size policies

enum class PolicyKind {
  sgd_const,
  sgd_decr,
  acc_sgd_const,
  acc_sgd_decr,
  acc_mb_sgd_decr,
  svrg_const,
  svrg_decr,
  acc_svrg_const,
  acc_svrg_decr,
};

enum class Stage { constant, decreasing };

inline bool is_decreasing(PolicyKind k) {
  return k == PolicyKind::sgd_decr || k == PolicyKind::acc_sgd_decr ||
         k == PolicyKind::acc_mb_sgd_decr || k == PolicyKind::svrg_decr ||
         k == PolicyKind::acc_svrg_decr;
}

inline Regime regime_of(PolicyKind k) {
  switch (k) {
    case PolicyKind::acc_sgd_const:
    case PolicyKind::acc_sgd_decr:
    case PolicyKind::acc_mb_sgd_decr:
      return Regime::accelerated_sgd;
    case PolicyKind::acc_svrg_const:
    case PolicyKind::acc_svrg_decr:
      return Regime::accelerated_svrg;
    default:
      return Regime::basic;
  }
}

/// A row of the step-size table together with the constants it reads.
/// L bounds every L_i, L_Q comes from the sampling distribution.
template <typename Scalar>
struct StepPolicy {
  PolicyKind kind = PolicyKind::sgd_const;
  Scalar L{};
  Scalar L_Q{};
  Scalar mu{};
  Index n = 1;
  /// Effective passes spent in the constant stage before switching to the
  /// decreasing rule. Ignored by constant-only kinds.
  double stage1_epochs = 0.0;
};

/// eta for the constant stage (and the cap of the decreasing stage).
template <typename Scalar>
Scalar base_step(const StepPolicy<Scalar>& p) {
  if (!(p.mu > Scalar(0)))
    throw std::invalid_argument("step-size policy requires mu > 0 "
                                "(strongly convex case only)");
  const Scalar n = Scalar(p.n);
  switch (p.kind) {
    case PolicyKind::sgd_const:
    case PolicyKind::sgd_decr:
    case PolicyKind::acc_sgd_const:
    case PolicyKind::acc_sgd_decr:
    case PolicyKind::acc_mb_sgd_decr:
      if (!(p.L > Scalar(0))) throw std::invalid_argument("policy needs L > 0");
      return Scalar(1) / p.L;
    case PolicyKind::svrg_const:
      if (!(p.L_Q > Scalar(0))) throw std::invalid_argument("policy needs L_Q > 0");
      return Scalar(1) / (Scalar(12) * p.L_Q);
    case PolicyKind::svrg_decr:
      if (!(p.L_Q > Scalar(0))) throw std::invalid_argument("policy needs L_Q > 0");
      return std::min(Scalar(1) / (Scalar(12) * p.L_Q),
                      Scalar(1) / (Scalar(5) * p.mu * n));
    case PolicyKind::acc_svrg_const:
    case PolicyKind::acc_svrg_decr:
      if (!(p.L_Q > Scalar(0))) throw std::invalid_argument("policy needs L_Q > 0");
      return std::min(Scalar(1) / (Scalar(3) * p.L_Q),
                      Scalar(1) / (Scalar(15) * p.mu * n));
  }
  return Scalar(0);
}

/// eta_k. In the decreasing stage k counts iterations since the restart and
/// must be >= 1.
template <typename Scalar>
Scalar step_size(const StepPolicy<Scalar>& p, std::int64_t k, Stage stage) {
  const Scalar eta = base_step(p);
  if (stage == Stage::constant || !is_decreasing(p.kind)) return eta;
  if (k < 1) throw std::invalid_argument("decreasing stage needs k >= 1");
  const Scalar kk = Scalar(k + 2);
  switch (p.kind) {
    case PolicyKind::sgd_decr:
    case PolicyKind::svrg_decr:
      return std::min(eta, Scalar(2) / (p.mu * kk));
    case PolicyKind::acc_sgd_decr:
    case PolicyKind::acc_mb_sgd_decr:
      return std::min(eta, Scalar(4) / (p.mu * kk * kk));
    case PolicyKind::acc_svrg_decr:
      return std::min(eta, Scalar(12) * Scalar(p.n) / (Scalar(5) * p.mu * kk * kk));
    default:
      return eta;
  }
}

/// ceil(sqrt(L / mu)), the minibatch size of acc_mb_sgd_decr; 1 otherwise.
template <typename Scalar>
Index batch_size(const StepPolicy<Scalar>& p) {
  if (p.kind != PolicyKind::acc_mb_sgd_decr) return 1;
  return std::max<Index>(1, Index(std::ceil(std::sqrt(double(p.L / p.mu)))));
}

// ---------------------------------------------------------------------------
// Closed forms of Gamma_k = prod_{t=1}^k (1 - delta_t)

enum class GammaPattern {
  constant,        // delta_t = delta
  inverse_linear,  // delta_t = 2 / (t + 2)
  capped,          // delta_t = min(2 / (t + 2), delta)
};

template <typename Scalar>
Scalar gamma_product_closed_form(GammaPattern pattern, std::int64_t k,
                                 Scalar delta = Scalar(0)) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  switch (pattern) {
    case GammaPattern::constant:
      return std::pow(Scalar(1) - delta, Scalar(k));
    case GammaPattern::inverse_linear:
      return Scalar(2) / (Scalar(k + 1) * Scalar(k + 2));
    case GammaPattern::capped: {
      if (!(delta > Scalar(0) && delta < Scalar(1)))
        throw std::invalid_argument("capped pattern needs delta in (0,1)");
      const auto k0 =
          static_cast<std::int64_t>(std::ceil(Scalar(2) / delta - Scalar(2)));
      if (k < k0) return std::pow(Scalar(1) - delta, Scalar(k));
      const Scalar g = std::pow(Scalar(1) - delta, Scalar(k0 - 1));
      return g * Scalar(k0) * Scalar(k0 + 1) /
             (Scalar(k + 1) * Scalar(k + 2));
    }
  }
  return Scalar(0);
}

/// Switches a two-stage policy from its constant to its decreasing rule once
/// the effective-pass counter reaches stage1_epochs. Fires at most once.
class TwoStageController {
 public:
  TwoStageController(bool two_stage, double stage1_epochs)
      : two_stage_(two_stage), stage1_epochs_(stage1_epochs) {
    if (two_stage_ && stage1_epochs_ <= 0.0) {
      stage_ = Stage::decreasing;
    }
  }

  Stage stage() const { return stage_; }

  /// True exactly once, at the first call whose pass count is >= the budget.
  bool should_restart(double effective_passes) {
    if (!two_stage_ || stage_ == Stage::decreasing) return false;
    if (effective_passes >= stage1_epochs_) {
      stage_ = Stage::decreasing;
      return true;
    }
    return false;
  }

 private:
  bool two_stage_;
  double stage1_epochs_;
  Stage stage_ = Stage::constant;
};

}  // namespace vrprox

#endif  // VRPROX_SCHEDULES_HPP
