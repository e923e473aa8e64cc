#include "topicsteer/topic_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "topicsteer/errors.hpp"

namespace topicsteer {

using nlohmann::json;

namespace {

bool is_canonical(const std::string& word) {
  return !word.empty() && std::none_of(word.begin(), word.end(), [](unsigned char c) {
    return std::isupper(c) != 0;
  });
}

json read_json_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw FormatError(std::string("cannot open ") + what + " file " + path.string());
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

TopicModel::TopicModel(std::map<TopicId, std::vector<WeightedWord>> topics)
    : topics_(std::move(topics)) {
  for (auto& [id, words] : topics_) {
    if (words.empty()) throw FormatError("topic " + std::to_string(id) + " has no words");
    for (const auto& w : words) {
      if (!is_canonical(w.word)) {
        throw FormatError("topic " + std::to_string(id) + " word '" + w.word +
                          "' is not a non-empty lowercase word");
      }
      if (!std::isfinite(w.weight) || w.weight < 0.0) {
        throw FormatError("topic " + std::to_string(id) + " word '" + w.word +
                          "' has invalid weight");
      }
    }
    std::stable_sort(words.begin(), words.end(),
                     [](const WeightedWord& a, const WeightedWord& b) { return a.weight > b.weight; });
    for (const auto& w : words) dictionary_[w.word].push_back({id, w.weight});
  }
}

std::vector<TopicId> TopicModel::topic_ids() const {
  std::vector<TopicId> ids;
  ids.reserve(topics_.size());
  for (const auto& [id, words] : topics_) ids.push_back(id);
  return ids;
}

const std::vector<WeightedWord>& TopicModel::words(TopicId id) const {
  auto it = topics_.find(id);
  if (it == topics_.end()) throw InputError("unknown topic id " + std::to_string(id));
  return it->second;
}

std::vector<WeightedWord> TopicModel::top_words(TopicId id, std::size_t top_n) const {
  const auto& all = words(id);
  const auto n = std::min(top_n, all.size());
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)};
}

const std::vector<TopicModel::Occurrence>& TopicModel::occurrences(const std::string& word) const {
  static const std::vector<Occurrence> kNone;
  auto it = dictionary_.find(word);
  return it == dictionary_.end() ? kNone : it->second;
}

TopicModel topic_model_from_json(const json& doc) {
  try {
    std::map<TopicId, std::vector<WeightedWord>> topics;
    for (const auto& entry : doc.at("topics")) {
      const auto id = entry.at("id").get<TopicId>();
      std::vector<WeightedWord> words;
      for (const auto& pair : entry.at("words")) {
        if (!pair.is_array() || pair.size() != 2) {
          throw FormatError("topic " + std::to_string(id) + ": words must be [word, weight] pairs");
        }
        words.push_back({pair[0].get<std::string>(), pair[1].get<double>()});
      }
      if (!topics.emplace(id, std::move(words)).second) {
        throw FormatError("duplicate topic id " + std::to_string(id));
      }
    }
    return TopicModel(std::move(topics));
  } catch (const json::exception& e) {
    throw FormatError(std::string("topic model: ") + e.what());
  }
}

TopicModel load_topic_model(const std::filesystem::path& path) {
  return topic_model_from_json(read_json_file(path, "topic model"));
}

std::optional<std::string> LemmaDictionary::lemma(const std::string& word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

LemmaDictionary load_lemma_dictionary(const std::filesystem::path& path) {
  const json doc = read_json_file(path, "lemma dictionary");
  try {
    return LemmaDictionary(doc.get<std::unordered_map<std::string, std::string>>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("lemma dictionary: ") + e.what());
  }
}

}  // namespace topicsteer
