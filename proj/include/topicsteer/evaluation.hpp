#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topicsteer/csv.hpp"
#include "topicsteer/decoding.hpp"
#include "topicsteer/topic_model.hpp"
#include "topicsteer/topic_vocabulary.hpp"

namespace topicsteer {

/// Lowercased maximal runs of ASCII letters and digits.
std::vector<std::string> split_words(std::string_view text);

/// Dictionary lemma when one is supplied, otherwise the Porter stem.
std::string canonical_form(const std::string& word, const LemmaDictionary& lemmas = {});

struct LemmaScoreOptions {
  /// Default: binary presence of each topic word. When set, the score is the
  /// average normalized topic weight per summary word instead.
  bool count_weighted = false;
  LemmaDictionary lemmas;
};

/// Topic mass covered by the summary: sum of the weights of top_n topic words
/// whose canonical form occurs in the summary, over the total top_n weight.
double lemma_topic_score(std::string_view summary, TopicId topic, const TopicModel& model,
                         std::size_t top_n, const LemmaScoreOptions& options = {});

/// Fraction of positions holding a topic token. 0 for an empty sequence.
double token_topic_score(std::span<const TokenId> summary_ids, const TopicTokenSet& topic_set);

struct DictScore {
  double score = 0.0;
  std::size_t in_dictionary_words = 0;
  /// Set when no summary word is in the topic model's dictionary.
  bool warning() const { return in_dictionary_words == 0; }
};

/// Mean over in-dictionary summary words of p(topic | word), where p is the
/// word's weight in each topic normalized over the topics containing it.
DictScore dict_topic_score(std::string_view summary, TopicId topic, const TopicModel& model);

/// Longest common subsequence length of two token sequences.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Sentence-level ROUGE-L F1 over stemmed words.
double rouge_l_f1(std::string_view candidate, std::string_view reference);

struct TopicalScores {
  double lemma_score = 0.0;
  double token_score = 0.0;
  double dict_score = 0.0;
};

struct QualityScores {
  double rouge_l_f1 = 0.0;
  /// Values computed outside this library (e.g. MAUVE, BERTScore).
  std::map<std::string, double> external;
};

struct ScoreReport {
  std::string article_id;
  std::string condition;
  TopicId steered_tid = 0;
  TopicId tid1 = 0;
  TopicId tid2 = 0;
  TopicalScores topic1;
  TopicalScores topic2;
  QualityScores quality;
  std::string text;
};

struct ScoringContext {
  const TopicModel& topics;
  const Vocabulary& vocab;
  std::size_t top_n = 25;
  LemmaScoreOptions lemma_options;
};

struct SummaryTarget {
  std::string article_id;
  std::string condition;
  std::pair<TopicId, TopicId> tids;
  std::pair<std::string, std::string> references;
  /// Must be one of tids; selects the ROUGE-L reference.
  TopicId steered_tid = 0;
};

/// Scores one generated summary against both topics and the reference of the
/// steered topic. Token sets are passed in so callers can cache them.
ScoreReport score_summary(const GenerationResult& summary, const SummaryTarget& target,
                          const ScoringContext& context, const TopicTokenSet& set1,
                          const TopicTokenSet& set2);

ScoreReport score_summary(const GenerationResult& summary, const SummaryTarget& target,
                          const ScoringContext& context);

/// article_id, condition, steered_tid, lemma_t1, token_t1, dict_t1, lemma_t2,
/// token_t2, dict_t2, rouge_l_f1
const csv::Row& score_csv_header();
csv::Row score_csv_row(const ScoreReport& report);

}  // namespace topicsteer
