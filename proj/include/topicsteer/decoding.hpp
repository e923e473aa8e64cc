#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topicsteer/logits.hpp"
#include "topicsteer/model.hpp"
#include "topicsteer/reweight.hpp"

namespace topicsteer {

enum class Strategy { greedy, sample, beam };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

/// Decoding hyperparameters. Defaults follow the summarization setup the
/// engine was built for: nucleus 0.95 with top-k 50, 4 beams, 80-90 new tokens.
struct GenerationConfig {
  Strategy strategy = Strategy::greedy;
  std::size_t top_k = 50;
  double top_p = 0.95;
  std::size_t num_beams = 4;
  std::size_t max_new_tokens = 90;
  std::size_t min_new_tokens = 80;
  std::uint64_t seed = 0;
  /// Record pre/post-reweight logits of every chosen token.
  bool trace = false;

  /// Throws InputError.
  void validate() const;
};

struct StepRecord {
  TokenId token = 0;
  double raw_logit = 0.0;
  double reweighted_logit = 0.0;
};

struct GenerationResult {
  /// Newly generated tokens, prefix and EOS excluded.
  TokenSequence sequence;
  double log_prob = 0.0;
  bool ended_with_eos = false;
  std::vector<StepRecord> steps;
};

struct Beam {
  TokenSequence sequence;
  double cumulative_log_prob = 0.0;
  bool finished = false;
  std::vector<StepRecord> steps;
};

/// Argmax over reweighted logits at every step. Truncation is skipped because
/// it never changes the argmax.
GenerationResult generate_greedy(const LogitsProvider& model, std::span<const TokenId> prefix,
                                 const ProcessorChain& chain, const GenerationConfig& config);

/// Reweight, truncate to top-k/top-p, then draw with Rng(config.seed).
GenerationResult generate_sample(const LogitsProvider& model, std::span<const TokenId> prefix,
                                 const ProcessorChain& chain, const GenerationConfig& config);

/// Beam search over reweighted, truncated log-probabilities, no length
/// penalty. Each live beam proposes its best num_beams successors; the best
/// num_beams of all proposals plus already-finished beams survive. Ties go to
/// the lower token id, then the lower beam index. A beam finishes on EOS or at
/// max_new_tokens; the result is the surviving finished beam with the highest
/// cumulative log-probability.
GenerationResult generate_beam(const LogitsProvider& model, std::span<const TokenId> prefix,
                               const ProcessorChain& chain, const GenerationConfig& config);

/// Dispatches on config.strategy.
GenerationResult generate(const LogitsProvider& model, std::span<const TokenId> prefix,
                          const ProcessorChain& chain, const GenerationConfig& config);

nlohmann::json generation_config_to_json(const GenerationConfig& config);
nlohmann::json reweight_config_to_json(const ReweightConfig& config);

/// {"tokens": [...], "text": "...", "log_prob": x, "config": {...}}
nlohmann::json generation_result_to_json(const GenerationResult& result, const Vocabulary& vocab,
                                         const GenerationConfig& config,
                                         const std::optional<ReweightConfig>& reweight = {});

}  // namespace topicsteer
