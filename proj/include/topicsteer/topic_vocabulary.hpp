#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "topicsteer/logits.hpp"
#include "topicsteer/topic_model.hpp"
#include "topicsteer/vocabulary.hpp"

namespace topicsteer {

struct WordVariants {
  std::string word;
  std::set<std::string> variants;
};

/// Surface forms of `word`: the word, its stem, its dictionary lemma when that
/// differs from the stem, the capitalized form of each, and every one of
/// those with a single leading space.
WordVariants expand_word(const std::string& word, const LemmaDictionary& lemmas = {});

/// Vocabulary ids whose token string equals one of the variants, ascending.
std::vector<TokenId> matching_tokens(const WordVariants& variants, const Vocabulary& vocab);

/// Topic-relevant token ids for one topic. Immutable once built.
class TopicTokenSet {
 public:
  TopicTokenSet() = default;
  TopicTokenSet(TopicId topic, std::map<TokenId, std::string> provenance);

  TopicId topic() const { return topic_; }
  /// Sorted, deduplicated.
  const std::vector<TokenId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(TokenId id) const;
  /// The highest-weight topic word that contributed `id`.
  const std::string& source_word(TokenId id) const;
  const std::map<TokenId, std::string>& provenance() const { return provenance_; }

 private:
  TopicId topic_ = 0;
  std::vector<TokenId> ids_;
  std::map<TokenId, std::string> provenance_;
};

/// Union of exact vocabulary matches over the variants of the topic's top_n
/// words. Throws InputError for an unknown topic or top_n == 0.
TopicTokenSet topic_token_set(TopicId topic, const TopicModel& model, const Vocabulary& vocab,
                              std::size_t top_n, const LemmaDictionary& lemmas = {});

}  // namespace topicsteer
