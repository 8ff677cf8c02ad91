#ifndef VRPROX_SAMPLING_HPP
#define VRPROX_SAMPLING_HPP

#include "vrprox/prox.hpp"
#include "vrprox/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vrprox {

enum class SamplingMode { uniform, lipschitz };

/// Index distribution Q with the constants L_Q = max_i L_i / (q_i n) and
/// rho_Q = 1 / (n min_i q_i). Sampling is inverse-CDF on a cumulative table.
template <typename Scalar>
class SamplingDistribution {
 public:
  /// Arbitrary q. Entries must be positive; q is renormalized when it is off
  /// by more than 1e-12 from summing to one.
  SamplingDistribution(Vector<Scalar> q, const Vector<Scalar>& smoothness)
      : q_(std::move(q)) {
    if (q_.size() == 0) throw std::invalid_argument("empty distribution");
    if (q_.size() != smoothness.size())
      throw std::invalid_argument("q and L differ in length");
    if ((q_.array() <= Scalar(0)).any() || !q_.allFinite())
      throw std::invalid_argument("sampling probabilities must be positive");
    if (std::abs(q_.sum() - Scalar(1)) > Scalar(1e-12)) q_ /= q_.sum();
    const Scalar n = Scalar(q_.size());
    L_Q_ = (smoothness.array() / (q_.array() * n)).maxCoeff();
    rho_Q_ = Scalar(1) / (n * q_.minCoeff());
    uniform_ = (q_.array() == q_[0]).all();
    if (uniform_) {
      rho_Q_ = Scalar(1);
      L_Q_ = smoothness.maxCoeff();
    }
    cdf_.resize(q_.size());
    Scalar acc(0);
    for (Index i = 0; i < q_.size(); ++i) cdf_[i] = (acc += q_[i]);
    cdf_[q_.size() - 1] = Scalar(1);
  }

  Index size() const { return q_.size(); }
  const Vector<Scalar>& q() const { return q_; }
  Scalar q(Index i) const { return q_[i]; }
  Scalar L_Q() const { return L_Q_; }
  Scalar rho_Q() const { return rho_Q_; }
  bool is_uniform() const { return uniform_; }

  /// 1 / (q_i n), the importance weight applied to component i.
  Scalar weight(Index i) const {
    return Scalar(1) / (q_[i] * Scalar(q_.size()));
  }

  Index sample(Rng& rng) const {
    const double u = uniform01(rng);
    if (uniform_)
      return std::min<Index>(Index(u * double(q_.size())), q_.size() - 1);
    const auto it = std::upper_bound(cdf_.data(), cdf_.data() + cdf_.size(),
                                     Scalar(u));
    return std::min<Index>(it - cdf_.data(), q_.size() - 1);
  }

 private:
  Vector<Scalar> q_;
  Vector<Scalar> cdf_;
  Scalar L_Q_{};
  Scalar rho_Q_{};
  bool uniform_ = false;
};

/// uniform: q_i = 1/n. lipschitz: q_i = L_i / sum_j L_j.
template <typename Scalar>
SamplingDistribution<Scalar> build_distribution(SamplingMode mode,
                                                const Vector<Scalar>& L) {
  if (L.size() == 0) throw std::invalid_argument("empty smoothness vector");
  if ((L.array() <= Scalar(0)).any())
    throw std::invalid_argument("smoothness constants must be positive");
  if (mode == SamplingMode::uniform || (L.array() == L[0]).all())
    return SamplingDistribution<Scalar>(
        Vector<Scalar>::Constant(L.size(), Scalar(1) / Scalar(L.size())), L);
  return SamplingDistribution<Scalar>(L / L.sum(), L);
}

template <typename Scalar>
Index sample(const SamplingDistribution<Scalar>& dist, Rng& rng) {
  return dist.sample(rng);
}

inline SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "uniform") return SamplingMode::uniform;
  if (s == "lipschitz") return SamplingMode::lipschitz;
  throw std::invalid_argument("unknown sampling mode '" + s + "'");
}

}  // namespace vrprox

#endif  // VRPROX_SAMPLING_HPP
