#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace topicsteer {

using TopicId = int;

struct WeightedWord {
  std::string word;
  double weight = 0.0;

  bool operator==(const WeightedWord&) const = default;
};

/// LDA-style topics: each topic is a word list sorted by descending weight.
class TopicModel {
 public:
  TopicModel() = default;
  /// Validates weights and words, then sorts each topic by descending weight
  /// (stable, so equal weights keep file order). Throws FormatError.
  explicit TopicModel(std::map<TopicId, std::vector<WeightedWord>> topics);

  std::size_t topic_count() const { return topics_.size(); }
  bool has_topic(TopicId id) const { return topics_.contains(id); }
  std::vector<TopicId> topic_ids() const;

  /// Throws InputError for an unknown id.
  const std::vector<WeightedWord>& words(TopicId id) const;
  /// The first min(top_n, size) words of the topic.
  std::vector<WeightedWord> top_words(TopicId id, std::size_t top_n) const;

  struct Occurrence {
    TopicId topic;
    double weight;
  };
  /// Every topic containing `word` (exact, lowercase), in topic-id order.
  /// Empty when the word is out of dictionary.
  const std::vector<Occurrence>& occurrences(const std::string& word) const;

 private:
  std::map<TopicId, std::vector<WeightedWord>> topics_;
  std::unordered_map<std::string, std::vector<Occurrence>> dictionary_;
};

TopicModel topic_model_from_json(const nlohmann::json& doc);
TopicModel load_topic_model(const std::filesystem::path& path);

/// Optional word -> lemma map; absent entries fall back to the stemmer.
class LemmaDictionary {
 public:
  LemmaDictionary() = default;
  explicit LemmaDictionary(std::unordered_map<std::string, std::string> entries)
      : entries_(std::move(entries)) {}

  std::optional<std::string> lemma(const std::string& word) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

LemmaDictionary load_lemma_dictionary(const std::filesystem::path& path);

}  // namespace topicsteer
