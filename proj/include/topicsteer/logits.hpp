#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace topicsteer {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

/// Unnormalized per-step scores over a vocabulary.
template <typename Scalar>
using LogitVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using LogitVectorXd = LogitVector<double>;
using LogitVectorXf = LogitVector<float>;

template <typename Scalar>
constexpr Scalar negative_infinity() {
  return -std::numeric_limits<Scalar>::infinity();
}

/// Index of the largest entry; the lowest index wins ties.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = i;
  }
  return best;
}

/// Numerically stable softmax. Entries equal to -inf map to exactly 0.
template <typename Derived>
LogitVector<typename Derived::Scalar> softmax(
    const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = scores.maxCoeff();
  LogitVector<Scalar> exps = (scores.array() - top).exp().matrix();
  return exps / exps.sum();
}

template <typename Derived>
LogitVector<typename Derived::Scalar> log_softmax(
    const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = scores.maxCoeff();
  const Scalar log_norm =
      top + std::log((scores.array() - top).exp().sum());
  return (scores.array() - log_norm).matrix();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& scores) {
  return scores.array().isFinite().all();
}

}  // namespace topicsteer
