#pragma once

// Slow, obviously-correct reference implementations used by the unit and
// acceptance tests.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "topicsteer/logits.hpp"
#include "topicsteer/model.hpp"
#include "topicsteer/reweight.hpp"

namespace tstest {

using namespace topicsteer;

/// log softmax in long double, skipping -inf entries.
inline std::vector<long double> log_probs_ld(const LogitVectorXd& scores) {
  long double top = -std::numeric_limits<long double>::infinity();
  for (Eigen::Index i = 0; i < scores.size(); ++i) top = std::max<long double>(top, scores(i));
  long double sum = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (std::isinf(scores(i))) continue;
    sum += std::exp(static_cast<long double>(scores(i)) - top);
  }
  std::vector<long double> out(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out[static_cast<std::size_t>(i)] =
        std::isinf(scores(i)) ? -std::numeric_limits<long double>::infinity()
                              : static_cast<long double>(scores(i)) - top - std::log(sum);
  }
  return out;
}

struct ExhaustiveBest {
  TokenSequence sequence;
  long double log_prob = -std::numeric_limits<long double>::infinity();
  std::size_t candidates = 0;
};

/// Enumerates every length-`steps` continuation over `alphabet` with EOS
/// masked at each step, scoring each under the full reweighted distribution.
/// Ties keep the lexicographically first sequence.
inline ExhaustiveBest exhaustive_best(const LogitsProvider& model, const TokenSequence& prefix,
                                      const ProcessorChain& chain,
                                      const std::vector<TokenId>& alphabet, std::size_t steps) {
  ExhaustiveBest best;
  std::vector<std::size_t> digits(steps, 0);
  const TokenId eos = model.vocabulary().eos();
  while (true) {
    TokenSequence context = prefix;
    TokenSequence seq;
    long double total = 0;
    for (std::size_t s = 0; s < steps; ++s) {
      LogitVectorXd scores = chain.apply(model.next_logits(context));
      scores(eos) = -std::numeric_limits<double>::infinity();
      const TokenId t = alphabet[digits[s]];
      total += log_probs_ld(scores)[static_cast<std::size_t>(t)];
      seq.push_back(t);
      context.push_back(t);
    }
    ++best.candidates;
    if (total > best.log_prob) {
      best.log_prob = total;
      best.sequence = seq;
    }
    std::size_t pos = steps;
    while (pos > 0) {
      --pos;
      if (++digits[pos] < alphabet.size()) break;
      digits[pos] = 0;
      if (pos == 0) return best;
    }
    if (steps == 0) return best;
  }
}

/// Positions whose id appears in `topic`, found by linear scan.
inline double brute_token_score(const TokenSequence& ids, const std::vector<TokenId>& topic) {
  if (ids.empty()) return 0.0;
  std::size_t hits = 0;
  for (TokenId id : ids) {
    for (TokenId t : topic) {
      if (t == id) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(ids.size());
}

/// Full quadratic LCS table.
inline std::size_t lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

inline double f1_oracle(std::size_t lcs, std::size_t cand, std::size_t ref) {
  if (lcs == 0 || cand == 0 || ref == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(cand);
  const double r = static_cast<double>(lcs) / static_cast<double>(ref);
  return 2 * p * r / (p + r);
}

}  // namespace tstest
