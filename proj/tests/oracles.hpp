// Reference solvers used by the tests. They only use Eigen, never the library.
#ifndef VRPROX_TESTS_ORACLES_HPP
#define VRPROX_TESTS_ORACLES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

inline double logistic_objective(const Mat& A, const Vec& b, double lambda, const Vec& x) {
  const Vec m = (A * x).cwiseProduct(b);
  double s = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) s += log1pexp(-m[i]);
  return s / double(A.rows()) + 0.5 * lambda * x.squaredNorm();
}

/// Damped Newton on the l2-regularized logistic objective. Stops once the
/// Newton decrement is below 1e-30 or after 100 steps.
inline Vec newton_logistic(const Mat& A, const Vec& b, double lambda) {
  const double n = double(A.rows());
  Vec x = Vec::Zero(A.cols());
  for (int it = 0; it < 100; ++it) {
    const Vec m = (A * x).cwiseProduct(b);
    Vec s(m.size()), w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double sig = 1 / (1 + std::exp(m[i]));  // sigma(-m)
      s[i] = -b[i] * sig;
      w[i] = sig * (1 - sig);
    }
    const Vec g = A.transpose() * s / n + lambda * x;
    const Mat H = A.transpose() * w.asDiagonal() * A / n + lambda * Mat::Identity(A.cols(), A.cols());
    const Vec step = H.ldlt().solve(g);
    const double dec = g.dot(step);
    double t = 1;
    const double f = logistic_objective(A, b, lambda, x);
    while (logistic_objective(A, b, lambda, x - t * step) > f - 0.25 * t * dec && t > 1e-10) t /= 2;
    x -= t * step;
    if (dec < 1e-30) break;
  }
  return x;
}

inline Vec ridge(const Mat& A, const Vec& b, double lambda) {
  const double n = double(A.rows());
  const Mat H = A.transpose() * A / n + lambda * Mat::Identity(A.cols(), A.cols());
  return H.ldlt().solve(A.transpose() * b / n);
}

inline double ridge_objective(const Mat& A, const Vec& b, double lambda, const Vec& x) {
  return 0.5 * (A * x - b).squaredNorm() / double(A.rows()) + 0.5 * lambda * x.squaredNorm();
}

}  // namespace oracle

#endif  // VRPROX_TESTS_ORACLES_HPP
