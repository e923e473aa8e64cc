#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

#include "topicsteer/logits.hpp"

namespace topicsteer {

/// Masks everything outside the top-k entries, then everything outside the
/// smallest descending-probability prefix of the survivors whose softmax mass
/// reaches top_p. Entries are ordered by score, ties by lower index, and at
/// least one entry always survives.
template <typename Derived>
LogitVector<typename Derived::Scalar> truncate_top_k_top_p(
    const Eigen::MatrixBase<Derived>& scores, std::size_t top_k, double top_p) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<std::size_t>(scores.size());
  LogitVector<Scalar> out = scores;
  if (n == 0) return out;

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  const std::size_t k = std::clamp<std::size_t>(top_k, 1, n);
  for (std::size_t r = k; r < n; ++r) out(order[r]) = negative_infinity<Scalar>();

  const LogitVector<Scalar> probs = softmax(out);
  double mass = 0.0;
  std::size_t keep = 0;
  while (keep < k) {
    mass += static_cast<double>(probs(order[keep]));
    ++keep;
    if (mass >= top_p) break;
  }
  for (std::size_t r = keep; r < k; ++r) out(order[r]) = negative_infinity<Scalar>();
  return out;
}

/// Portable seeded generator.
///
/// Stream contract: the engine is std::mt19937_64 seeded with the 64-bit
/// seed (its output sequence is fixed by the C++ standard); every uniform
/// draw consumes exactly one 64-bit output x and returns (x >> 11) * 2^-53.
/// No standard-library distribution is involved, so draws agree across
/// platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Inverse-CDF draw over `probs` in index order. Zero-probability entries
/// are never returned.
template <typename Derived>
Eigen::Index sample_categorical(const Eigen::MatrixBase<Derived>& probs, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  Eigen::Index last_positive = -1;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = static_cast<double>(probs(i));
    if (!(p > 0.0)) continue;
    last_positive = i;
    cumulative += p;
    if (u < cumulative) return i;
  }
  return last_positive;
}

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

/// Per-article seed: independent of execution order and condition.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view article_id);

}  // namespace topicsteer
