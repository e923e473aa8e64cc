#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topicsteer/decoding.hpp"
#include "topicsteer/evaluation.hpp"
#include "topicsteer/model.hpp"
#include "topicsteer/reweight.hpp"
#include "topicsteer/topic_model.hpp"

namespace topicsteer {

/// One article with its two most prominent topics and a reference summary
/// focused on each.
struct CorpusSample {
  std::string article_id;
  std::string article;
  TopicId tid1 = 0;
  TopicId tid2 = 0;
  std::string reference1;
  std::string reference2;
};

/// JSON-lines corpus, one object per line:
///   {"article_id", "article", "tid1", "tid2", "summary1", "summary2"}
/// Samples keep file order and are truncated to `limit`. Throws FormatError
/// on duplicate ids, tid1 == tid2, or empty references.
std::vector<CorpusSample> load_corpus(const std::filesystem::path& path,
                                      std::optional<std::size_t> limit = std::nullopt);

nlohmann::json corpus_sample_to_json(const CorpusSample& sample);

/// Builds a logits provider from a model spec. A path to a toy-model JSON
/// file always works; other backends register a factory under a scheme name
/// and are addressed as "<scheme>:<argument>".
using ProviderFactory =
    std::function<std::unique_ptr<LogitsProvider>(const std::string& argument)>;
void register_provider(const std::string& scheme, ProviderFactory factory);
std::unique_ptr<LogitsProvider> make_provider(const std::string& spec);

struct Condition {
  std::string label;
  ReweightConfig reweight;
  GenerationConfig generation;
};

enum class SteeringPolicy { tid1, tid2, both };
SteeringPolicy parse_steering_policy(std::string_view name);
std::string_view to_string(SteeringPolicy policy);

struct ExperimentConfig {
  std::filesystem::path corpus;
  std::filesystem::path topics;
  std::string model;
  std::optional<std::filesystem::path> lemmas;
  std::vector<Condition> conditions;
  std::size_t limit = 25;
  SteeringPolicy policy = SteeringPolicy::both;
  std::filesystem::path out_dir = "out";
  std::uint64_t master_seed = 0;
  std::size_t top_n = 25;
  bool count_weighted = false;
  /// Worker threads over samples; output order never depends on it.
  std::size_t jobs = 1;

  /// Throws ConfigError: empty or duplicate labels, limit 0, no conditions,
  /// invalid decoding or reweighting parameters.
  void validate() const;
};

/// Per-condition field overrides from the command line. Set fields replace
/// the value in every condition.
struct ConditionOverrides {
  std::optional<ReweightMethod> method;
  std::optional<double> c, alpha, theta, beta;
  std::optional<Strategy> strategy;
  std::optional<std::size_t> num_beams, top_k, min_tokens, max_tokens;
  std::optional<double> top_p;

  void apply(Condition& condition) const;
};

/// Parses the JSON config. Relative paths resolve against `base_dir`.
/// Missing fields keep their defaults. Throws ConfigError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc,
                                             const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

struct SweepSummary {
  std::size_t expected_rows = 0;
  std::size_t scored_rows = 0;
  std::size_t error_rows = 0;
  /// Successful rows in output order.
  std::vector<ScoreReport> reports;
  std::filesystem::path scores_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path generations_jsonl;
  std::filesystem::path manifest;
};

/// Runs every (sample, condition, steered topic) cell, writing into out_dir:
///   scores.csv        one row per cell; failed cells carry an error message
///   aggregate.csv     mean and sample std per condition and metric
///   generations.jsonl the generated summaries
///   manifest.json     config hash, seeds, row accounting, timestamp
/// Everything except the manifest timestamp is a function of the config.
SweepSummary run_sweep(const ExperimentConfig& config);

/// Column name used for the per-row error message in scores.csv.
inline constexpr const char* kErrorColumn = "error";

struct MergeSummary {
  std::size_t rows = 0;
  std::size_t matched_rows = 0;
  std::size_t rejected_rows = 0;
};

/// Left-joins external metric values (CSV: article_id, condition, metric,
/// value, optionally steered_tid) onto a score report keyed by
/// (article_id, condition[, steered_tid]). Each metric becomes a column.
/// External rows with no matching report row go to `rejects_csv`. Throws
/// MergeError when one key carries conflicting values for a metric.
MergeSummary merge_external_scores(const std::filesystem::path& report_csv,
                                   const std::filesystem::path& external_csv,
                                   const std::filesystem::path& merged_csv,
                                   const std::filesystem::path& rejects_csv);

}  // namespace topicsteer
