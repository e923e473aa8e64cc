#include "topicsteer/decoding.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "topicsteer/errors.hpp"
#include "topicsteer/sampling.hpp"

namespace topicsteer {

using nlohmann::json;

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::greedy:
      return "greedy";
    case Strategy::sample:
      return "sample";
    case Strategy::beam:
      return "beam";
  }
  return "greedy";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "greedy") return Strategy::greedy;
  if (name == "sample") return Strategy::sample;
  if (name == "beam") return Strategy::beam;
  throw InputError("unknown decoding strategy '" + std::string(name) + "'");
}

void GenerationConfig::validate() const {
  if (top_k < 1) throw InputError("top_k must be >= 1");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw InputError("top_p must lie in (0,1]");
  if (num_beams < 1) throw InputError("num_beams must be >= 1");
  if (min_new_tokens > max_new_tokens) {
    throw InputError("min_new_tokens must not exceed max_new_tokens");
  }
}

namespace {

void check_setup(const LogitsProvider& model, std::span<const TokenId> prefix,
                 const ProcessorChain& chain, const GenerationConfig& config) {
  config.validate();
  const auto& vocab = model.vocabulary();
  if (prefix.empty() || prefix.front() != vocab.bos()) {
    throw InputError("prefix must be non-empty and start with BOS");
  }
  vocab.validate(prefix);
  if (chain.vocab_size() && *chain.vocab_size() != vocab.size()) {
    throw ConfigError("processor chain vocabulary size does not match the model");
  }
}

// Raw provider scores and the scores after reweighting and the EOS window mask.
struct StepScores {
  LogitVectorXd raw;
  LogitVectorXd adjusted;
};

StepScores score_step(const LogitsProvider& model, std::span<const TokenId> context,
                      const ProcessorChain& chain, std::size_t generated,
                      const GenerationConfig& config) {
  StepScores s;
  s.raw = model.next_logits(context);
  if (static_cast<std::size_t>(s.raw.size()) != model.vocabulary().size()) {
    throw ConfigError("provider returned logits of the wrong size");
  }
  s.adjusted = chain.apply(s.raw);
  if (generated < config.min_new_tokens) {
    s.adjusted(model.vocabulary().eos()) = negative_infinity<double>();
  }
  return s;
}

StepRecord record(const StepScores& s, TokenId token) {
  return {token, s.raw(token), s.adjusted(token)};
}

}  // namespace

GenerationResult generate_greedy(const LogitsProvider& model, std::span<const TokenId> prefix,
                                 const ProcessorChain& chain, const GenerationConfig& config) {
  check_setup(model, prefix, chain, config);
  const TokenId eos = model.vocabulary().eos();
  TokenSequence context(prefix.begin(), prefix.end());
  GenerationResult result;
  for (std::size_t step = 0; step < config.max_new_tokens; ++step) {
    const StepScores s = score_step(model, context, chain, step, config);
    const auto token = static_cast<TokenId>(argmax(s.adjusted));
    result.log_prob += log_softmax(s.adjusted)(token);
    if (config.trace) result.steps.push_back(record(s, token));
    if (token == eos) {
      result.ended_with_eos = true;
      break;
    }
    result.sequence.push_back(token);
    context.push_back(token);
  }
  return result;
}

GenerationResult generate_sample(const LogitsProvider& model, std::span<const TokenId> prefix,
                                 const ProcessorChain& chain, const GenerationConfig& config) {
  check_setup(model, prefix, chain, config);
  const TokenId eos = model.vocabulary().eos();
  TokenSequence context(prefix.begin(), prefix.end());
  Rng rng(config.seed);
  GenerationResult result;
  for (std::size_t step = 0; step < config.max_new_tokens; ++step) {
    const StepScores s = score_step(model, context, chain, step, config);
    const LogitVectorXd truncated = truncate_top_k_top_p(s.adjusted, config.top_k, config.top_p);
    const LogitVectorXd probs = softmax(truncated);
    const auto token = static_cast<TokenId>(sample_categorical(probs, rng));
    result.log_prob += std::log(probs(token));
    if (config.trace) result.steps.push_back(record(s, token));
    if (token == eos) {
      result.ended_with_eos = true;
      break;
    }
    result.sequence.push_back(token);
    context.push_back(token);
  }
  return result;
}

GenerationResult generate_beam(const LogitsProvider& model, std::span<const TokenId> prefix,
                               const ProcessorChain& chain, const GenerationConfig& config) {
  check_setup(model, prefix, chain, config);
  const TokenId eos = model.vocabulary().eos();
  const std::size_t width = config.num_beams;

  struct Candidate {
    double score;
    TokenId token;
    std::size_t beam;
    bool carried;
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.token != b.token) return a.token < b.token;
    return a.beam < b.beam;
  };

  std::vector<Beam> beams(1);
  std::vector<bool> ended_with_eos(1, false);
  TokenSequence context(prefix.begin(), prefix.end());
  const std::size_t prefix_len = context.size();

  for (std::size_t step = 0; step < config.max_new_tokens; ++step) {
    std::vector<Candidate> pool;
    std::vector<std::vector<StepRecord>> step_records(beams.size());
    std::vector<StepScores> scored(beams.size());
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const Beam& beam = beams[b];
      if (beam.finished) {
        pool.push_back({beam.cumulative_log_prob, eos, b, true});
        continue;
      }
      context.resize(prefix_len);
      context.insert(context.end(), beam.sequence.begin(), beam.sequence.end());
      scored[b] = score_step(model, context, chain, step, config);
      const LogitVectorXd logp =
          log_softmax(truncate_top_k_top_p(scored[b].adjusted, config.top_k, config.top_p));

      std::vector<Candidate> local;
      for (Eigen::Index t = 0; t < logp.size(); ++t) {
        if (std::isinf(logp(t))) continue;
        local.push_back({beam.cumulative_log_prob + logp(t), static_cast<TokenId>(t), b, false});
      }
      const std::size_t keep = std::min(width, local.size());
      std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep),
                        local.end(), better);
      pool.insert(pool.end(), local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep));
    }

    std::sort(pool.begin(), pool.end(), better);
    pool.resize(std::min(width, pool.size()));

    std::vector<Beam> next;
    std::vector<bool> next_eos;
    next.reserve(pool.size());
    for (const Candidate& c : pool) {
      Beam beam = beams[c.beam];
      bool eos_end = ended_with_eos[c.beam];
      if (!c.carried) {
        beam.cumulative_log_prob = c.score;
        if (config.trace) beam.steps.push_back(record(scored[c.beam], c.token));
        if (c.token == eos) {
          beam.finished = true;
          eos_end = true;
        } else {
          beam.sequence.push_back(c.token);
          if (beam.sequence.size() >= config.max_new_tokens) beam.finished = true;
        }
      }
      next.push_back(std::move(beam));
      next_eos.push_back(eos_end);
    }
    beams = std::move(next);
    ended_with_eos = std::move(next_eos);
    if (std::all_of(beams.begin(), beams.end(), [](const Beam& b) { return b.finished; })) break;
  }

  // Beams arrive sorted best-first; pick the best finished one, falling back
  // to the best unfinished beam (only possible when max_new_tokens == 0).
  std::size_t best = 0;
  for (std::size_t b = 0; b < beams.size(); ++b) {
    if (beams[b].finished) {
      best = b;
      break;
    }
  }
  GenerationResult result;
  result.sequence = std::move(beams[best].sequence);
  result.log_prob = beams[best].cumulative_log_prob;
  result.ended_with_eos = ended_with_eos[best];
  result.steps = std::move(beams[best].steps);
  return result;
}

GenerationResult generate(const LogitsProvider& model, std::span<const TokenId> prefix,
                          const ProcessorChain& chain, const GenerationConfig& config) {
  switch (config.strategy) {
    case Strategy::greedy:
      return generate_greedy(model, prefix, chain, config);
    case Strategy::sample:
      return generate_sample(model, prefix, chain, config);
    case Strategy::beam:
      return generate_beam(model, prefix, chain, config);
  }
  throw InputError("unknown decoding strategy");
}

json generation_config_to_json(const GenerationConfig& config) {
  return json{{"strategy", to_string(config.strategy)},
              {"top_k", config.top_k},
              {"top_p", config.top_p},
              {"num_beams", config.num_beams},
              {"min_new_tokens", config.min_new_tokens},
              {"max_new_tokens", config.max_new_tokens},
              {"seed", config.seed}};
}

json reweight_config_to_json(const ReweightConfig& config) {
  json out{{"method", to_string(config.method)}};
  switch (config.method) {
    case ReweightMethod::none:
      break;
    case ReweightMethod::constant_shift:
      out["c"] = config.c;
      break;
    case ReweightMethod::factor_scaling:
      out["alpha"] = config.alpha;
      break;
    case ReweightMethod::threshold_selection:
      out["theta"] = config.theta;
      out["beta"] = config.beta;
      break;
  }
  return out;
}

json generation_result_to_json(const GenerationResult& result, const Vocabulary& vocab,
                               const GenerationConfig& config,
                               const std::optional<ReweightConfig>& reweight) {
  json cfg = generation_config_to_json(config);
  if (reweight) cfg["reweight"] = reweight_config_to_json(*reweight);
  json out{{"tokens", result.sequence},
           {"text", vocab.decode(result.sequence)},
           {"log_prob", result.log_prob},
           {"config", std::move(cfg)}};
  if (!result.steps.empty()) {
    json steps = json::array();
    for (const auto& s : result.steps) {
      steps.push_back({{"token", s.token},
                       {"raw_logit", s.raw_logit},
                       {"reweighted_logit", s.reweighted_logit}});
    }
    out["steps"] = std::move(steps);
  }
  return out;
}

}  // namespace topicsteer
