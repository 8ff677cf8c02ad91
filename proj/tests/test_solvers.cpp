#include "vrprox/solvers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace vrprox;
using Vec = Vector<double>;

namespace {

Dataset<double> gaussian_rows(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 1);
  Dataset<double> d;
  d.features.resize(n, p);
  d.labels.resize(n);
  Vec w(p);
  for (auto& v : w) v = N(rng);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) d.features(i, j) = N(rng);
    d.labels[i] = (d.features.row(i).dot(w) + 0.5 * N(rng)) > 0 ? 1.0 : -1.0;
  }
  return normalize_rows(d);
}

Problem<double> logistic(Index n, Index p, std::uint64_t seed, double lambda,
                         RegularizerSpec<double> reg = {}) {
  return Problem<double>(gaussian_rows(n, p, seed), LossKind::logistic, lambda, reg);
}

// f(x) = (1/2)(sqrt2 x_1 - 1)^2 / 2 + (lambda/2)||x||^2 with a zero second row:
// Hessian diag(1 + lambda, lambda), max L_i = 2 + lambda.
Problem<double> ill_conditioned_quadratic(double lambda) {
  Dataset<double> d;
  d.features = RowMatrix<double>::Zero(2, 2);
  d.features(0, 0) = std::sqrt(2.0);
  d.labels.resize(2);
  d.labels << 1.0, 0.0;
  return Problem<double>(d, LossKind::squared, lambda);
}

Vec quadratic_minimizer(const Problem<double>& prob) {
  const Matrix<double> A = prob.data().features;
  const double n = double(prob.n());
  const Matrix<double> H = A.transpose() * A / n + prob.l2_strength() * Matrix<double>::Identity(prob.p(), prob.p());
  return H.ldlt().solve(A.transpose() * prob.data().labels / n);
}

RunOptions<double> quiet(double passes) {
  RunOptions<double> o;
  o.max_passes = passes;
  o.record_every = passes;
  o.record_gap = false;
  return o;
}

SamplingDistribution<double> uniform(const Problem<double>& prob) {
  return build_distribution(SamplingMode::uniform, prob.smoothness());
}

}  // namespace

TEST(UpdateAveraging, Basics) {
  const Vec a = Vec::Constant(3, 2.0), b = Vec::Constant(3, -1.0);
  EXPECT_EQ(update_averaging(a, b, 1.0), b);
  Vec xh = Vec::Zero(3);
  const Vec c = Vec::Constant(3, 5.0);
  for (int k = 1; k <= 60; ++k) {
    xh = update_averaging(xh, c, 0.5);
    EXPECT_NEAR((xh - c).norm(), c.norm() * std::pow(0.5, k), 1e-12);
  }
  EXPECT_THROW(update_averaging(a, b, 1.5), std::invalid_argument);
}

TEST(UpdateAveraging, RecursiveEqualsGammaWeightedForm) {
  // x_hat_k = Gamma_k (x_0 + sum_t delta_t / Gamma_t x_t) when tau_k = delta_k
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0, 1);
  const double mu = 0.05;
  Schedule<double> s(Regime::basic, mu, 1.0, 1);
  Vec x0(4);
  for (auto& v : x0) v = N(rng);
  Vec xh = x0, weighted = x0;
  for (int k = 1; k <= 1000; ++k) {
    const auto& st = s.advance(std::min(0.5, 2 / (mu * (k + 2))));
    Vec xk(4);
    for (auto& v : xk) v = N(rng);
    xh = update_averaging(xh, xk, st.delta);
    weighted += st.delta / st.Gamma * xk;
    ASSERT_LT((xh - st.Gamma * weighted).norm(), 1e-10 * std::max(1.0, xh.norm())) << k;
  }
}

TEST(RunBasic, GradientDescentOnQuadratic) {
  const auto prob = ill_conditioned_quadratic(0.05);
  const Vec xs = quadratic_minimizer(prob);
  const double fs = evaluate_objective(prob, xs);
  auto o = quiet(3000);
  o.record_every_iterations = 1;
  o.x0 = Vec::Constant(2, 3.0);
  const auto res = run_basic(prob, EstimatorKind::exact, uniform(prob),
                             make_policy(Algorithm::ista, prob, uniform(prob)), o);
  const double L = prob.max_smoothness(), mu = prob.mu();
  const double r0 = (*o.x0 - xs).norm();
  double prev = INFINITY;
  for (const auto& row : res.trace.rows) {
    EXPECT_LE(row.objective, prev + 1e-15);
    prev = row.objective;
  }
  EXPECT_LT(res.trace.rows.back().objective - fs, 1e-10);
  EXPECT_LE((res.x - xs).norm(), std::pow(1 - mu / L, res.iterations / 2.0) * r0 * 1.0001);
}

TEST(RunBasic, SingleComponentSvrgEqualsExact) {
  const auto prob = logistic(1, 4, 2, 0.1);
  const auto dist = uniform(prob);
  const auto policy = make_policy(Algorithm::rand_svrg, prob, dist);
  auto o = quiet(1e9);
  o.max_iterations = 200;
  std::vector<Vec> exact_iterates, svrg_iterates;
  o.observer = [&](const IterationInfo<double>& info) { exact_iterates.push_back(*info.x); };
  run_basic(prob, EstimatorKind::exact, dist, policy, o);
  o.observer = [&](const IterationInfo<double>& info) { svrg_iterates.push_back(*info.x); };
  run_basic(prob, EstimatorKind::svrg, dist, policy, o);
  ASSERT_EQ(exact_iterates.size(), svrg_iterates.size());
  for (std::size_t k = 0; k < exact_iterates.size(); ++k)
    EXPECT_LT((exact_iterates[k] - svrg_iterates[k]).norm(), 1e-14);
}

TEST(RunBasic, StepPreconditions) {
  const auto prob = logistic(20, 3, 3, 0.01);
  const auto dist = uniform(prob);
  auto policy = make_policy(Algorithm::rand_svrg, prob, dist);
  policy.L_Q = dist.L_Q() / 2;  // 1/(12 L_Q) now exceeds the true bound
  EXPECT_THROW(run_basic(prob, EstimatorKind::svrg, dist, policy, quiet(1)), std::invalid_argument);
  auto sgd = make_policy(Algorithm::sgd, prob, dist);
  sgd.L = prob.max_smoothness() / 2;
  EXPECT_THROW(run_basic(prob, EstimatorKind::sgd, dist, sgd, quiet(1)), std::invalid_argument);
  EXPECT_THROW(run_basic(prob, EstimatorKind::sgd, dist, make_policy(Algorithm::acc_sgd, prob, dist), quiet(1)),
               std::invalid_argument);
  const Problem<double> flat(gaussian_rows(5, 2, 4), LossKind::logistic, 0.0);
  EXPECT_THROW(run_algorithm(flat, Algorithm::sgd, uniform(flat), quiet(1)), std::invalid_argument);
}

TEST(RunMonitor, DivergenceGuard) {
  const Problem<double> prob(gaussian_rows(20, 3, 4), LossKind::squared, 0.01);
  auto o = quiet(1e9);
  o.record_every_iterations = 1;
  detail::RunMonitor<double> mon(prob, o, "sgd");
  mon.maybe_record(0, Vec::Zero(3), nullptr, true, false);
  mon.maybe_record(1, Vec::Constant(3, 10.0), nullptr, false, false);
  EXPECT_TRUE(mon.budget_left(1));
  mon.maybe_record(2, Vec::Constant(3, 1e5), nullptr, false, false);
  EXPECT_FALSE(mon.budget_left(2));
  const auto trace = mon.take_trace();
  EXPECT_NE(trace.failure.find("divergence"), std::string::npos) << trace.failure;
  EXPECT_EQ(trace.rows.size(), 3u);
}

TEST(RunBasic, NonFiniteObjectiveIsRecordedNotThrown) {
  const Problem<double> prob(gaussian_rows(20, 3, 4), LossKind::squared, 0.01);
  auto o = quiet(10);
  o.x0 = Vec::Constant(3, 1e300);
  const auto res = run_algorithm(prob, Algorithm::sgd, uniform(prob), o);
  EXPECT_FALSE(res.trace.ok());
  EXPECT_NE(res.trace.failure.find("non-finite"), std::string::npos) << res.trace.failure;
  EXPECT_EQ(res.iterations, 0);
}

TEST(RunBasic, ProxStepOptimalityEveryIteration) {
  const double omega = 0.02;
  const auto prob = logistic(50, 8, 5, 0.01, RegularizerSpec<double>::l1(omega));
  auto o = quiet(30);
  int checked = 0;
  o.observer = [&](const IterationInfo<double>& info) {
    const double eta = info.schedule->eta;
    const Vec sub = (*info.x_prev - *info.x) / eta - *info.g;
    for (Index j = 0; j < sub.size(); ++j) {
      const double xj = (*info.x)[j];
      if (xj != 0.0)
        ASSERT_NEAR(sub[j], omega * (xj > 0 ? 1 : -1), 1e-8);
      else
        ASSERT_LE(std::abs(sub[j]), omega + 1e-8);
    }
    ++checked;
  };
  for (auto a : {Algorithm::sgd, Algorithm::rand_svrg, Algorithm::saga, Algorithm::ista})
    run_algorithm(prob, a, uniform(prob), o);
  EXPECT_GT(checked, 1000);
}

TEST(RunBasic, FixedPointWithExactGradient) {
  Dataset<double> d = gaussian_rows(6, 3, 6);
  const Problem<double> prob(d, LossKind::squared, 0.1);
  const Vec xs = quadratic_minimizer(prob);
  auto o = quiet(1e9);
  o.max_iterations = 100;
  o.x0 = xs;
  const auto res = run_algorithm(prob, Algorithm::ista, uniform(prob), o);
  EXPECT_LT((res.x - xs).norm(), 1e-14);
}

TEST(RunBasic, CostAccounting) {
  const auto prob = logistic(40, 3, 7, 0.01);
  const auto dist = uniform(prob);
  for (auto a : {Algorithm::sgd, Algorithm::rand_svrg, Algorithm::saga, Algorithm::ista, Algorithm::acc_mb_sgd_d,
                 Algorithm::acc_svrg}) {
    auto o = quiet(20);
    std::uint64_t prev = 0, resets = 0;
    std::int64_t iters = 0;
    const std::uint64_t batch = std::uint64_t(batch_size(make_policy(a, prob, dist)));
    o.observer = [&](const IterationInfo<double>& info) {
      ASSERT_GE(info.evaluations, prev);
      prev = info.evaluations;
      ++iters;
    };
    const auto res = run_algorithm(prob, a, dist, o);
    const std::uint64_t n = 40;
    switch (estimator_kind(a)) {
      case EstimatorKind::exact: EXPECT_EQ(res.evaluations, n * std::uint64_t(iters)); break;
      case EstimatorKind::sgd: EXPECT_EQ(res.evaluations, batch * std::uint64_t(iters)); break;
      case EstimatorKind::saga: EXPECT_EQ(res.evaluations, n + 2 * std::uint64_t(iters)); break;
      case EstimatorKind::svrg:
        resets = (res.evaluations - n - 2 * std::uint64_t(iters));
        EXPECT_EQ(resets % n, 0u);
        break;
    }
    for (std::size_t r = 1; r < res.trace.rows.size(); ++r)
      EXPECT_GE(res.trace.rows[r].effective_passes, res.trace.rows[r - 1].effective_passes);
    EXPECT_EQ(res.trace.rows.back().effective_passes, double(res.evaluations) / 40.0);
  }
}

TEST(RunBasic, RecordCadenceAndDeterminism) {
  const auto prob = logistic(100, 5, 8, 0.001);
  RunOptions<double> o;
  o.max_passes = 50;
  o.perturbation = PerturbationSpec<double>::dropout(0.1);
  o.variance_trials = 20;
  const auto a = run_algorithm(prob, Algorithm::rand_svrg, uniform(prob), o);
  const auto b = run_algorithm(prob, Algorithm::rand_svrg, uniform(prob), o);
  ASSERT_EQ(a.trace.rows.size(), b.trace.rows.size());
  for (std::size_t r = 0; r < a.trace.rows.size(); ++r) {
    EXPECT_EQ(a.trace.rows[r].k, b.trace.rows[r].k);
    EXPECT_EQ(a.trace.rows[r].objective, b.trace.rows[r].objective);
    EXPECT_EQ(a.trace.rows[r].variance, b.trace.rows[r].variance);
    EXPECT_FALSE(a.trace.rows[r].gap.has_value());
  }
  EXPECT_EQ(a.x, b.x);
  // a row at k=0 and then one roughly every 5 passes
  EXPECT_EQ(a.trace.rows.front().k, 0);
  for (std::size_t r = 2; r + 1 < a.trace.rows.size(); ++r) {
    const double step = a.trace.rows[r].effective_passes - a.trace.rows[r - 1].effective_passes;
    EXPECT_GE(step, 5.0 - 1e-9);
    EXPECT_LT(step, 5.0 + 100.0 / 100 + 1e-9);  // at most one anchor reset of overshoot
  }
  o.seed = 2;
  const auto c = run_algorithm(prob, Algorithm::rand_svrg, uniform(prob), o);
  EXPECT_NE(a.x, c.x);
}

TEST(RunBasic, AveragingRecordsAveragedObjective) {
  const auto prob = logistic(60, 4, 9, 0.01);
  auto o = quiet(40);
  o.averaging = true;
  o.record_every = 5;
  const auto res = run_algorithm(prob, Algorithm::saga, uniform(prob), o);
  for (const auto& row : res.trace.rows) EXPECT_TRUE(row.objective_avg.has_value());
  EXPECT_EQ(res.output, res.x_hat);
  EXPECT_NE(res.x, res.x_hat);
  o.averaging = false;
  const auto plain = run_algorithm(prob, Algorithm::saga, uniform(prob), o);
  EXPECT_FALSE(plain.trace.rows.back().objective_avg.has_value());
}

TEST(RunBasic, BoxIndicatorReportsSmoothPartAndFeasibility) {
  const auto prob = logistic(30, 4, 10, 0.01, RegularizerSpec<double>::box(Vec::Zero(4), Vec::Constant(4, 0.1)));
  auto o = quiet(20);
  o.record_every = 2;
  const auto res = run_algorithm(prob, Algorithm::rand_svrg, uniform(prob), o);
  ASSERT_TRUE(res.trace.ok());
  for (const auto& row : res.trace.rows) {
    EXPECT_TRUE(row.feasible);
    EXPECT_TRUE(std::isfinite(row.objective));
  }
  EXPECT_TRUE((res.x.array() >= 0).all() && (res.x.array() <= 0.1).all());
}

TEST(RunTwoStage, ZeroStageOneIsPureDecreasing) {
  const auto prob = logistic(30, 3, 11, 0.05);
  const double L = prob.max_smoothness(), mu = prob.mu();
  auto o = quiet(10);
  std::int64_t seen = 0;
  o.observer = [&](const IterationInfo<double>& info) {
    EXPECT_DOUBLE_EQ(info.schedule->eta, std::min(1 / L, 2 / (mu * double(info.k + 2))));
    ++seen;
  };
  const auto res = run_two_stage(prob, Algorithm::sgd_d, uniform(prob), o, 0.0);
  EXPECT_EQ(seen, res.iterations);
  EXPECT_EQ(res.trace.restart_index, std::optional<std::int64_t>(0));
  EXPECT_THROW(run_two_stage(prob, Algorithm::sgd, uniform(prob), o, 0.0), std::invalid_argument);
}

TEST(RunTwoStage, RestartFiresOnceAndPreservesIterate) {
  const auto prob = logistic(50, 4, 12, 0.02);
  const auto dist = uniform(prob);
  for (auto a : {Algorithm::sgd_d, Algorithm::rand_svrg_d, Algorithm::saga_d, Algorithm::acc_sgd_d,
                 Algorithm::acc_mb_sgd_d, Algorithm::acc_svrg_d}) {
    auto o = quiet(40);
    o.record_every = 1;
    int restarts = 0;
    std::int64_t restart_k = -1;
    double passes_at_restart = 0, prev_passes = 0;
    Vec x_at_restart;
    o.observer = [&](const IterationInfo<double>& info) {
      if (info.restarted) {
        ++restarts;
        restart_k = info.k;
        passes_at_restart = double(info.evaluations) / 50.0;
        x_at_restart = *info.x;
        EXPECT_LT(prev_passes, 15.0);
      }
      prev_passes = double(info.evaluations) / 50.0;
    };
    const auto res = run_two_stage(prob, a, dist, o, 15.0);
    EXPECT_EQ(restarts, 1) << to_string(a);
    EXPECT_GE(passes_at_restart, 15.0) << to_string(a);
    ASSERT_TRUE(res.trace.restart_index.has_value());
    EXPECT_EQ(*res.trace.restart_index, restart_k);
    const auto it = std::find_if(res.trace.rows.begin(), res.trace.rows.end(),
                                 [](const auto& r) { return r.restart; });
    ASSERT_NE(it, res.trace.rows.end()) << to_string(a);
    EXPECT_EQ(it->k, restart_k);
    EXPECT_EQ(it->objective, evaluate_objective(prob, x_at_restart));
  }
}

TEST(RunAcceleratedSgd, ConstantStepMomentumClosedForm) {
  const auto prob = logistic(40, 5, 13, 0.01);
  const double eta = 1 / prob.max_smoothness(), mu = prob.mu();
  const double expected = (1 - std::sqrt(mu * eta)) / (1 + std::sqrt(mu * eta));
  auto o = quiet(1e9);
  o.max_iterations = 300;
  int seen = 0;
  o.observer = [&](const IterationInfo<double>& info) {
    ASSERT_TRUE(info.beta.has_value());
    EXPECT_NEAR(*info.beta, expected, 1e-12);
    ++seen;
  };
  run_algorithm(prob, Algorithm::fista, uniform(prob), o);
  EXPECT_EQ(seen, 300);
}

TEST(RunAcceleratedSgd, ExtrapolationIdentityAndEstimateSequence) {
  const auto prob = logistic(80, 6, 14, 0.005, RegularizerSpec<double>::l1(0.01));
  for (auto a : {Algorithm::acc_sgd, Algorithm::acc_sgd_d, Algorithm::fista}) {
    auto o = quiet(1e9);
    o.max_iterations = 3000;
    double worst = 0, worst_v = 0;
    o.observer = [&](const IterationInfo<double>& info) {
      if (!info.theta) return;
      const double th = *info.theta;
      const Vec r = *info.y - th * *info.x - (1 - th) * *info.v;
      worst = std::max(worst, r.norm() / (1 + info.y->norm()));
      worst_v = std::max(worst_v, (*info.v - *info.v_recursive).norm() / (1 + info.v->norm()));
    };
    run_algorithm(prob, a, uniform(prob), o, 5.0);
    EXPECT_LE(worst, 1e-8) << to_string(a);
    EXPECT_LE(worst_v, 1e-8) << to_string(a);
  }
}

TEST(RunAcceleratedSgd, FirstStepIdentityOneDimensional) {
  Dataset<double> d;
  d.features = RowMatrix<double>::Constant(1, 1, 1.0);
  d.labels = Vec::Constant(1, 2.0);
  const Problem<double> prob(d, LossKind::squared, 0.5);
  auto o = quiet(1e9);
  o.max_iterations = 1;
  o.x0 = Vec::Constant(1, -3.0);
  bool checked = false;
  o.observer = [&](const IterationInfo<double>& info) {
    const double th = *info.theta;
    EXPECT_NEAR((*info.y)[0], th * (*info.x)[0] + (1 - th) * (*info.v)[0], 1e-15);
    checked = true;
  };
  run_algorithm(prob, Algorithm::fista, uniform(prob), o);
  EXPECT_TRUE(checked);
}

TEST(RunAcceleratedSgd, FasterThanBasicOnIllConditionedQuadratic) {
  const double lambda = 2e-4;  // L / mu = (2 + lambda) / lambda ~ 1e4
  const auto prob = ill_conditioned_quadratic(lambda);
  const Vec xs = quadratic_minimizer(prob);
  const double fs = evaluate_objective(prob, xs);
  auto iterations_to = [&](Algorithm a) {
    auto o = quiet(1e9);
    o.max_iterations = 400000;
    o.x0 = Vec::Constant(2, 1.0);
    o.fstar = fs;
    o.stop_suboptimality = 1e-8;
    o.record_every_iterations = 1;
    const auto res = run_algorithm(prob, a, uniform(prob), o);
    EXPECT_LE(res.trace.rows.back().objective - fs, 1e-8) << to_string(a);
    return res.trace.rows.back().k;
  };
  const auto basic = iterations_to(Algorithm::ista);
  const auto acc = iterations_to(Algorithm::fista);
  EXPECT_LE(5 * acc, basic) << "basic " << basic << " accelerated " << acc;
}

TEST(RunAcceleratedSvrg, SingleComponentConverges) {
  Dataset<double> d;
  d.features = RowMatrix<double>::Constant(1, 1, 1.0);
  d.labels = Vec::Constant(1, 2.0);
  const Problem<double> prob(d, LossKind::squared, 0.5);
  auto o = quiet(2000);
  o.x0 = Vec::Constant(1, -3.0);
  o.observer = [&](const IterationInfo<double>& info) {
    ASSERT_GE(*info.theta, 0.0);
    ASSERT_LE(*info.theta, 1.0);
  };
  const auto res = run_algorithm(prob, Algorithm::acc_svrg, uniform(prob), o);
  // minimizer of (1/2)(x - 2)^2 + (1/4)x^2 is 4/3
  EXPECT_NEAR(res.output[0], 4.0 / 3.0, 1e-10);
}

TEST(RunAcceleratedSvrg, EstimateSequenceUpdateFollowsAlgorithm) {
  const auto prob = logistic(30, 4, 15, 0.01);
  const auto dist = uniform(prob);
  auto o = quiet(5);
  Vec v_prev = Vec::Zero(4), anchor_prev = Vec::Zero(4);
  double gamma_prev = prob.mu();
  const double mu = prob.mu(), n = 30;
  int checked = 0;
  o.observer = [&](const IterationInfo<double>& info) {
    const auto& s = *info.schedule;
    const double eta = s.eta, delta = s.delta, gamma = s.gamma;
    EXPECT_NEAR(delta, std::sqrt(5 * eta * gamma / (3 * n)), 1e-15);
    EXPECT_NEAR(gamma, (1 - delta) * gamma_prev + mu * delta, 1e-15);
    const double theta = (3 * n * delta - 5 * mu * eta) / (3 - 5 * mu * eta);
    EXPECT_NEAR(*info.theta, theta, 1e-15);
    const Vec y = theta * v_prev + (1 - theta) * anchor_prev;
    EXPECT_LT((y - *info.y).norm(), 1e-14);
    const Vec v = (1 - mu * delta / gamma) * v_prev + (mu * delta / gamma) * y + (delta / (gamma * eta)) * (*info.x - y);
    EXPECT_LT((v - *info.v).norm(), 1e-12 * (1 + v.norm()));
    v_prev = *info.v;
    anchor_prev = info.svrg->anchor;
    gamma_prev = gamma;
    ++checked;
  };
  run_algorithm(prob, Algorithm::acc_svrg, dist, o);
  EXPECT_GT(checked, 10);
}

TEST(RunAcceleratedSvrg, StepBound) {
  const auto prob = logistic(30, 4, 16, 0.01);
  const auto dist = uniform(prob);
  auto policy = make_policy(Algorithm::acc_svrg, prob, dist);
  policy.L_Q = dist.L_Q() / 4;
  policy.mu = prob.mu() / 4;
  EXPECT_THROW(run_accelerated_svrg(prob, dist, policy, quiet(2)), std::invalid_argument);
}

TEST(RunAlgorithm, AllAlgorithmsDecreaseObjective) {
  const auto prob = logistic(100, 5, 17, 0.01);
  const auto dist = build_distribution(SamplingMode::lipschitz, prob.smoothness());
  const double f0 = evaluate_objective(prob, Vec::Zero(5));
  for (int a = 0; a <= int(Algorithm::acc_svrg_d); ++a) {
    const auto res = run_algorithm(prob, Algorithm(a), dist, quiet(30), 10.0);
    ASSERT_TRUE(res.trace.ok()) << to_string(Algorithm(a)) << ": " << res.trace.failure;
    EXPECT_LT(res.trace.rows.back().objective, f0) << to_string(Algorithm(a));
    EXPECT_EQ(res.trace.algorithm, to_string(Algorithm(a)));
    EXPECT_EQ(parse_algorithm(to_string(Algorithm(a))), Algorithm(a));
  }
  EXPECT_THROW(parse_algorithm("svrg++"), std::invalid_argument);
}
