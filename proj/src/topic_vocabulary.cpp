#include "topicsteer/topic_vocabulary.hpp"

#include <algorithm>
#include <cctype>

#include "topicsteer/errors.hpp"
#include "topicsteer/log.hpp"
#include "topicsteer/stemmer.hpp"

namespace topicsteer {

namespace {

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

WordVariants expand_word(const std::string& word, const LemmaDictionary& lemmas) {
  WordVariants out{word, {}};
  if (word.empty()) return out;

  std::vector<std::string> bases{word};
  const std::string stemmed = stem(word);
  if (!stemmed.empty()) bases.push_back(stemmed);
  if (auto lemma = lemmas.lemma(word); lemma && !lemma->empty() && *lemma != stemmed) {
    bases.push_back(*lemma);
  }
  for (const auto& base : bases) {
    for (const auto& form : {base, capitalized(base)}) {
      out.variants.insert(form);
      out.variants.insert(" " + form);
    }
  }
  return out;
}

std::vector<TokenId> matching_tokens(const WordVariants& variants, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& form : variants.variants) {
    if (auto id = vocab.find(form)) ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

TopicTokenSet::TopicTokenSet(TopicId topic, std::map<TokenId, std::string> provenance)
    : topic_(topic), provenance_(std::move(provenance)) {
  ids_.reserve(provenance_.size());
  for (const auto& [id, word] : provenance_) ids_.push_back(id);
}

bool TopicTokenSet::contains(TokenId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

const std::string& TopicTokenSet::source_word(TokenId id) const {
  auto it = provenance_.find(id);
  if (it == provenance_.end()) throw InputError("token " + std::to_string(id) + " not in topic set");
  return it->second;
}

TopicTokenSet topic_token_set(TopicId topic, const TopicModel& model, const Vocabulary& vocab,
                              std::size_t top_n, const LemmaDictionary& lemmas) {
  if (top_n == 0) throw InputError("top_n must be at least 1");
  std::map<TokenId, std::string> provenance;
  for (const auto& entry : model.top_words(topic, top_n)) {
    for (TokenId id : matching_tokens(expand_word(entry.word, lemmas), vocab)) {
      // Words arrive in descending weight order; the first claim wins.
      provenance.emplace(id, entry.word);
    }
  }
  if (provenance.empty()) {
    log_warning("topic " + std::to_string(topic) + " matched no vocabulary tokens");
  }
  return TopicTokenSet(topic, std::move(provenance));
}

}  // namespace topicsteer
