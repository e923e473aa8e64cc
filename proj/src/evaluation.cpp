#include "topicsteer/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "topicsteer/errors.hpp"
#include "topicsteer/stemmer.hpp"

namespace topicsteer {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string canonical_form(const std::string& word, const LemmaDictionary& lemmas) {
  if (auto lemma = lemmas.lemma(word)) return *lemma;
  return stem(word);
}

double lemma_topic_score(std::string_view summary, TopicId topic, const TopicModel& model,
                         std::size_t top_n, const LemmaScoreOptions& options) {
  if (top_n == 0) throw InputError("top_n must be at least 1");
  const auto top = model.top_words(topic, top_n);
  const auto words = split_words(summary);
  if (words.empty()) return 0.0;

  double total = 0.0;
  for (const auto& w : top) total += w.weight;
  if (total <= 0.0) return 0.0;

  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& word : words) ++counts[canonical_form(word, options.lemmas)];

  if (!options.count_weighted) {
    double covered = 0.0;
    for (const auto& w : top) {
      if (counts.contains(canonical_form(w.word, options.lemmas))) covered += w.weight;
    }
    return covered / total;
  }

  std::unordered_map<std::string, double> mass;
  for (const auto& w : top) mass[canonical_form(w.word, options.lemmas)] += w.weight / total;
  double acc = 0.0;
  for (const auto& [form, count] : counts) {
    if (auto it = mass.find(form); it != mass.end()) acc += it->second * static_cast<double>(count);
  }
  return acc / static_cast<double>(words.size());
}

double token_topic_score(std::span<const TokenId> summary_ids, const TopicTokenSet& topic_set) {
  if (summary_ids.empty()) return 0.0;
  const auto hits = std::count_if(summary_ids.begin(), summary_ids.end(),
                                  [&](TokenId id) { return topic_set.contains(id); });
  return static_cast<double>(hits) / static_cast<double>(summary_ids.size());
}

DictScore dict_topic_score(std::string_view summary, TopicId topic, const TopicModel& model) {
  if (!model.has_topic(topic)) throw InputError("unknown topic id " + std::to_string(topic));
  DictScore out;
  double acc = 0.0;
  for (const auto& word : split_words(summary)) {
    const auto& occ = model.occurrences(word);
    double norm = 0.0;
    double target = 0.0;
    for (const auto& o : occ) {
      norm += o.weight;
      if (o.topic == topic) target += o.weight;
    }
    if (norm <= 0.0) continue;
    acc += target / norm;
    ++out.in_dictionary_words;
  }
  if (out.in_dictionary_words > 0) out.score = acc / static_cast<double>(out.in_dictionary_words);
  return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

namespace {

std::vector<std::string> stemmed_words(std::string_view text) {
  auto words = split_words(text);
  for (auto& w : words) w = stem(w);
  return words;
}

}  // namespace

double rouge_l_f1(std::string_view candidate, std::string_view reference) {
  const auto cand = stemmed_words(candidate);
  const auto ref = stemmed_words(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(cand, ref));
  const double precision = lcs / static_cast<double>(cand.size());
  const double recall = lcs / static_cast<double>(ref.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

ScoreReport score_summary(const GenerationResult& summary, const SummaryTarget& target,
                          const ScoringContext& context, const TopicTokenSet& set1,
                          const TopicTokenSet& set2) {
  const auto [tid1, tid2] = target.tids;
  if (tid1 == tid2) throw InputError("tid1 and tid2 must differ");
  if (target.steered_tid != tid1 && target.steered_tid != tid2) {
    throw InputError("steered topic must be tid1 or tid2");
  }
  if (target.references.first.empty() || target.references.second.empty()) {
    throw InputError("reference summaries must be non-empty");
  }
  if (target.condition.empty()) throw InputError("condition label must be non-empty");

  ScoreReport report;
  report.article_id = target.article_id;
  report.condition = target.condition;
  report.steered_tid = target.steered_tid;
  report.tid1 = tid1;
  report.tid2 = tid2;
  report.text = context.vocab.decode(summary.sequence);

  auto topical = [&](TopicId tid, const TopicTokenSet& set) {
    return TopicalScores{
        lemma_topic_score(report.text, tid, context.topics, context.top_n, context.lemma_options),
        token_topic_score(summary.sequence, set),
        dict_topic_score(report.text, tid, context.topics).score};
  };
  report.topic1 = topical(tid1, set1);
  report.topic2 = topical(tid2, set2);

  const auto& reference =
      target.steered_tid == tid1 ? target.references.first : target.references.second;
  report.quality.rouge_l_f1 = rouge_l_f1(report.text, reference);
  return report;
}

ScoreReport score_summary(const GenerationResult& summary, const SummaryTarget& target,
                          const ScoringContext& context) {
  const auto set1 = topic_token_set(target.tids.first, context.topics, context.vocab, context.top_n,
                                    context.lemma_options.lemmas);
  const auto set2 = topic_token_set(target.tids.second, context.topics, context.vocab,
                                    context.top_n, context.lemma_options.lemmas);
  return score_summary(summary, target, context, set1, set2);
}

const csv::Row& score_csv_header() {
  static const csv::Row header{"article_id", "condition", "steered_tid", "lemma_t1",
                               "token_t1",   "dict_t1",   "lemma_t2",    "token_t2",
                               "dict_t2",    "rouge_l_f1"};
  return header;
}

csv::Row score_csv_row(const ScoreReport& r) {
  using csv::format_number;
  csv::Row row{r.article_id,
               r.condition,
               std::to_string(r.steered_tid),
               format_number(r.topic1.lemma_score),
               format_number(r.topic1.token_score),
               format_number(r.topic1.dict_score),
               format_number(r.topic2.lemma_score),
               format_number(r.topic2.token_score),
               format_number(r.topic2.dict_score),
               format_number(r.quality.rouge_l_f1)};
  for (const auto& [name, value] : r.quality.external) row.push_back(format_number(value));
  return row;
}

}  // namespace topicsteer
