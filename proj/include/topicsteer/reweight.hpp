#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topicsteer/errors.hpp"
#include "topicsteer/logits.hpp"
#include "topicsteer/topic_vocabulary.hpp"

namespace topicsteer {

enum class ReweightMethod { none, constant_shift, factor_scaling, threshold_selection };

/// CLI spelling: none | shift | scale | threshold.
std::string_view to_string(ReweightMethod method);
/// Accepts the CLI spelling and the long names. Throws InputError.
ReweightMethod parse_reweight_method(std::string_view name);

/// Strength parameters for one reweighting method. Only the fields of the
/// active method are read.
struct ReweightConfig {
  ReweightMethod method = ReweightMethod::none;
  double c = 0.0;         // constant shift
  double alpha = 1.0;     // scaling factor
  double theta = 0.005;   // probability threshold
  double beta = 0.0;      // encouragement above the current max

  /// Checks the active method's fields only. Throws InputError.
  void validate() const;
};

namespace detail {

template <typename Derived>
void check_reweight_input(const Eigen::MatrixBase<Derived>& scores, const TopicTokenSet& topic) {
  if (!all_finite(scores)) throw InputError("reweighting requires finite scores");
  for (TokenId id : topic.ids()) {
    if (id < 0 || id >= scores.size()) {
      throw InputError("topic token " + std::to_string(id) + " outside logit vector of size " +
                       std::to_string(scores.size()));
    }
  }
}

}  // namespace detail

/// Adds `c` to every topic-token logit.
template <typename Derived>
LogitVector<typename Derived::Scalar> constant_shift(const Eigen::MatrixBase<Derived>& scores,
                                                     const TopicTokenSet& topic,
                                                     typename Derived::Scalar c) {
  detail::check_reweight_input(scores, topic);
  LogitVector<typename Derived::Scalar> out = scores;
  for (TokenId id : topic.ids()) out(id) += c;
  return out;
}

/// Multiplies every topic-token logit by `alpha`. The direction of the effect
/// depends on the sign of the logit: alpha < 1 raises negative logits and
/// lowers positive ones.
template <typename Derived>
LogitVector<typename Derived::Scalar> factor_scaling(const Eigen::MatrixBase<Derived>& scores,
                                                     const TopicTokenSet& topic,
                                                     typename Derived::Scalar alpha) {
  detail::check_reweight_input(scores, topic);
  LogitVector<typename Derived::Scalar> out = scores;
  for (TokenId id : topic.ids()) out(id) *= alpha;
  return out;
}

/// Topic tokens whose softmax probability is at least `theta` are lifted to
/// max(scores) + beta.
///
/// Probabilities and the maximum both come from the input vector, and all
/// qualifying tokens are lifted together, so the result does not depend on
/// the order of the ids in the topic set.
template <typename Derived>
LogitVector<typename Derived::Scalar> threshold_selection(
    const Eigen::MatrixBase<Derived>& scores, const TopicTokenSet& topic,
    typename Derived::Scalar theta, typename Derived::Scalar beta) {
  using Scalar = typename Derived::Scalar;
  detail::check_reweight_input(scores, topic);
  if (!(theta >= Scalar(0) && theta <= Scalar(1))) throw InputError("theta must lie in [0,1]");
  if (!(beta >= Scalar(0))) throw InputError("beta must be non-negative");

  const LogitVector<Scalar> probs = softmax(scores);
  const Scalar lifted = scores.maxCoeff() + beta;
  LogitVector<Scalar> out = scores;
  for (TokenId id : topic.ids()) {
    if (probs(id) >= theta) out(id) = lifted;
  }
  return out;
}

/// Ids that threshold_selection would lift for these inputs.
template <typename Derived>
std::vector<TokenId> threshold_selected(const Eigen::MatrixBase<Derived>& scores,
                                        const TopicTokenSet& topic,
                                        typename Derived::Scalar theta) {
  const auto probs = softmax(scores);
  std::vector<TokenId> selected;
  for (TokenId id : topic.ids()) {
    if (probs(id) >= theta) selected.push_back(id);
  }
  return selected;
}

template <typename Derived>
LogitVector<typename Derived::Scalar> reweight(const Eigen::MatrixBase<Derived>& scores,
                                               const TopicTokenSet& topic,
                                               const ReweightConfig& config) {
  using Scalar = typename Derived::Scalar;
  switch (config.method) {
    case ReweightMethod::constant_shift:
      return constant_shift(scores, topic, static_cast<Scalar>(config.c));
    case ReweightMethod::factor_scaling:
      return factor_scaling(scores, topic, static_cast<Scalar>(config.alpha));
    case ReweightMethod::threshold_selection:
      return threshold_selection(scores, topic, static_cast<Scalar>(config.theta),
                                 static_cast<Scalar>(config.beta));
    case ReweightMethod::none:
      break;
  }
  return scores;
}

/// One reweighting method bound to the topic it steers toward.
struct TopicProcessor {
  ReweightConfig config;
  TopicTokenSet topic;
};

/// Ordered list of processors applied left to right. Empty is the identity.
class ProcessorChain {
 public:
  ProcessorChain() = default;
  /// Throws ConfigError when a topic id falls outside `vocab_size`, and
  /// InputError for an invalid ReweightConfig.
  ProcessorChain(std::size_t vocab_size, std::vector<TopicProcessor> processors);

  bool empty() const { return processors_.empty(); }
  const std::vector<TopicProcessor>& processors() const { return processors_; }
  std::optional<std::size_t> vocab_size() const { return vocab_size_; }

  template <typename Derived>
  LogitVector<typename Derived::Scalar> apply(const Eigen::MatrixBase<Derived>& scores) const {
    if (vocab_size_ && static_cast<std::size_t>(scores.size()) != *vocab_size_) {
      throw ConfigError("processor chain built for vocabulary of size " +
                        std::to_string(*vocab_size_) + " applied to " +
                        std::to_string(scores.size()) + " logits");
    }
    LogitVector<typename Derived::Scalar> out = scores;
    for (const auto& p : processors_) out = reweight(out, p.topic, p.config);
    return out;
  }

 private:
  std::optional<std::size_t> vocab_size_;
  std::vector<TopicProcessor> processors_;
};

template <typename Derived>
LogitVector<typename Derived::Scalar> apply_chain(const ProcessorChain& chain,
                                                  const Eigen::MatrixBase<Derived>& scores) {
  return chain.apply(scores);
}

}  // namespace topicsteer
