#include "topicsteer/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "topicsteer/errors.hpp"
#include "topicsteer/sampling.hpp"

namespace topicsteer {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Corpus

namespace {

std::string id_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw FormatError("article_id must be a string or integer");
}

}  // namespace

std::vector<CorpusSample> load_corpus(const fs::path& path, std::optional<std::size_t> limit) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus file " + path.string());
  std::vector<CorpusSample> samples;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    CorpusSample s;
    try {
      const json doc = json::parse(line);
      s.article_id = id_string(doc.at("article_id"));
      s.article = doc.at("article").get<std::string>();
      s.tid1 = doc.at("tid1").get<TopicId>();
      s.tid2 = doc.at("tid2").get<TopicId>();
      s.reference1 = doc.at("summary1").get<std::string>();
      s.reference2 = doc.at("summary2").get<std::string>();
    } catch (const json::exception& e) {
      throw FormatError(where + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where + e.what());
    }
    if (s.tid1 == s.tid2) throw FormatError(where + "tid1 equals tid2");
    if (s.reference1.empty() || s.reference2.empty()) {
      throw FormatError(where + "reference summaries must be non-empty");
    }
    if (!seen.insert(s.article_id).second) {
      throw FormatError(where + "duplicate article_id '" + s.article_id + "'");
    }
    samples.push_back(std::move(s));
  }
  if (limit && samples.size() > *limit) samples.resize(*limit);
  return samples;
}

json corpus_sample_to_json(const CorpusSample& s) {
  return json{{"article_id", s.article_id}, {"article", s.article}, {"tid1", s.tid1},
              {"tid2", s.tid2},             {"summary1", s.reference1}, {"summary2", s.reference2}};
}

// ---------------------------------------------------------------------------
// Providers

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, ProviderFactory>& registry() {
  static std::map<std::string, ProviderFactory> factories;
  return factories;
}

}  // namespace

void register_provider(const std::string& scheme, ProviderFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[scheme] = std::move(factory);
}

std::unique_ptr<LogitsProvider> make_provider(const std::string& spec) {
  if (spec.empty()) throw ConfigError("model spec is empty");
  const auto colon = spec.find(':');
  if (colon != std::string::npos && colon > 1) {
    const std::string scheme = spec.substr(0, colon);
    const std::string argument = spec.substr(colon + 1);
    if (scheme == "toy") return std::make_unique<ToyMarkovModel>(load_toy_model(argument));
    ProviderFactory factory;
    {
      std::lock_guard lock(registry_mutex());
      auto it = registry().find(scheme);
      if (it != registry().end()) factory = it->second;
    }
    if (factory) return factory(argument);
    if (!fs::exists(spec)) throw ConfigError("no provider registered for '" + scheme + "'");
  }
  return std::make_unique<ToyMarkovModel>(load_toy_model(spec));
}

// ---------------------------------------------------------------------------
// Config

SteeringPolicy parse_steering_policy(std::string_view name) {
  if (name == "tid1") return SteeringPolicy::tid1;
  if (name == "tid2") return SteeringPolicy::tid2;
  if (name == "both") return SteeringPolicy::both;
  throw ConfigError("unknown steered-topic policy '" + std::string(name) + "'");
}

std::string_view to_string(SteeringPolicy policy) {
  switch (policy) {
    case SteeringPolicy::tid1:
      return "tid1";
    case SteeringPolicy::tid2:
      return "tid2";
    case SteeringPolicy::both:
      return "both";
  }
  return "both";
}

void ExperimentConfig::validate() const {
  if (conditions.empty()) throw ConfigError("experiment has no conditions");
  if (limit < 1) throw ConfigError("articles limit must be >= 1");
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  std::set<std::string> labels;
  for (const auto& c : conditions) {
    if (c.label.empty()) throw ConfigError("condition label must be non-empty");
    if (!labels.insert(c.label).second) throw ConfigError("duplicate condition label '" + c.label + "'");
    try {
      c.reweight.validate();
      c.generation.validate();
    } catch (const InputError& e) {
      throw ConfigError("condition '" + c.label + "': " + e.what());
    }
  }
}

void ConditionOverrides::apply(Condition& condition) const {
  auto& r = condition.reweight;
  auto& g = condition.generation;
  if (method) r.method = *method;
  if (c) r.c = *c;
  if (alpha) r.alpha = *alpha;
  if (theta) r.theta = *theta;
  if (beta) r.beta = *beta;
  if (strategy) g.strategy = *strategy;
  if (num_beams) g.num_beams = *num_beams;
  if (top_k) g.top_k = *top_k;
  if (top_p) g.top_p = *top_p;
  if (min_tokens) g.min_new_tokens = *min_tokens;
  if (max_tokens) g.max_new_tokens = *max_tokens;
}

namespace {

template <typename T>
void read_opt(const json& doc, const char* key, T& out) {
  if (auto it = doc.find(key); it != doc.end()) out = it->get<T>();
}

Condition condition_from_json(const json& doc, const Condition& defaults) {
  Condition c = defaults;
  read_opt(doc, "label", c.label);
  if (auto it = doc.find("method"); it != doc.end()) {
    c.reweight.method = parse_reweight_method(it->get<std::string>());
  }
  read_opt(doc, "c", c.reweight.c);
  read_opt(doc, "alpha", c.reweight.alpha);
  read_opt(doc, "theta", c.reweight.theta);
  read_opt(doc, "beta", c.reweight.beta);
  if (auto it = doc.find("strategy"); it != doc.end()) {
    c.generation.strategy = parse_strategy(it->get<std::string>());
  }
  read_opt(doc, "top_k", c.generation.top_k);
  read_opt(doc, "top_p", c.generation.top_p);
  read_opt(doc, "beams", c.generation.num_beams);
  read_opt(doc, "min_tokens", c.generation.min_new_tokens);
  read_opt(doc, "max_tokens", c.generation.max_new_tokens);
  return c;
}

json condition_to_json(const Condition& c) {
  json out = reweight_config_to_json(c.reweight);
  out["label"] = c.label;
  out["strategy"] = to_string(c.generation.strategy);
  out["top_k"] = c.generation.top_k;
  out["top_p"] = c.generation.top_p;
  out["beams"] = c.generation.num_beams;
  out["min_tokens"] = c.generation.min_new_tokens;
  out["max_tokens"] = c.generation.max_new_tokens;
  return out;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& doc, const fs::path& base_dir) {
  ExperimentConfig cfg;
  try {
    if (auto it = doc.find("corpus"); it != doc.end()) cfg.corpus = resolve(base_dir, it->get<std::string>());
    if (auto it = doc.find("topics"); it != doc.end()) cfg.topics = resolve(base_dir, it->get<std::string>());
    if (auto it = doc.find("lemmas"); it != doc.end()) cfg.lemmas = resolve(base_dir, it->get<std::string>());
    if (auto it = doc.find("out_dir"); it != doc.end()) cfg.out_dir = resolve(base_dir, it->get<std::string>());
    if (auto it = doc.find("model"); it != doc.end()) {
      cfg.model = it->get<std::string>();
      // A bare relative path is a toy-model file next to the config.
      if (cfg.model.find(':') == std::string::npos) cfg.model = resolve(base_dir, cfg.model).string();
    }
    read_opt(doc, "limit", cfg.limit);
    read_opt(doc, "seed", cfg.master_seed);
    read_opt(doc, "top_n", cfg.top_n);
    read_opt(doc, "count_weighted", cfg.count_weighted);
    read_opt(doc, "jobs", cfg.jobs);
    if (auto it = doc.find("policy"); it != doc.end()) {
      cfg.policy = parse_steering_policy(it->get<std::string>());
    }
    Condition defaults;
    if (auto it = doc.find("defaults"); it != doc.end()) defaults = condition_from_json(*it, defaults);
    if (auto it = doc.find("conditions"); it != doc.end()) {
      for (const auto& entry : *it) cfg.conditions.push_back(condition_from_json(entry, defaults));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return experiment_config_from_json(doc, path.parent_path());
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json conditions = json::array();
  for (const auto& c : cfg.conditions) conditions.push_back(condition_to_json(c));
  json out{{"corpus", cfg.corpus.string()},
           {"topics", cfg.topics.string()},
           {"model", cfg.model},
           {"limit", cfg.limit},
           {"policy", to_string(cfg.policy)},
           {"seed", cfg.master_seed},
           {"top_n", cfg.top_n},
           {"count_weighted", cfg.count_weighted},
           {"conditions", std::move(conditions)}};
  if (cfg.lemmas) out["lemmas"] = cfg.lemmas->string();
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

struct Cell {
  std::string article_id;
  std::string condition;
  TopicId steered_tid = 0;
  std::optional<ScoreReport> report;
  std::string error;
  json generation;
};

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "lemma_steered", "token_steered", "dict_steered", "lemma_other", "token_other",
      "dict_other",    "lemma_t1",      "token_t1",     "dict_t1",     "lemma_t2",
      "token_t2",      "dict_t2",       "rouge_l_f1"};
  return names;
}

std::vector<double> metric_values(const ScoreReport& r) {
  const bool first = r.steered_tid == r.tid1;
  const TopicalScores& steered = first ? r.topic1 : r.topic2;
  const TopicalScores& other = first ? r.topic2 : r.topic1;
  return {steered.lemma_score, steered.token_score, steered.dict_score, other.lemma_score,
          other.token_score,   other.dict_score,    r.topic1.lemma_score, r.topic1.token_score,
          r.topic1.dict_score, r.topic2.lemma_score, r.topic2.token_score, r.topic2.dict_score,
          r.quality.rouge_l_f1};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

SweepSummary run_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto samples = load_corpus(config.corpus, config.limit);
  const TopicModel topics = load_topic_model(config.topics);
  const LemmaDictionary lemmas = config.lemmas ? load_lemma_dictionary(*config.lemmas) : LemmaDictionary{};
  const std::unique_ptr<LogitsProvider> provider = make_provider(config.model);
  const Vocabulary& vocab = provider->vocabulary();

  // Token sets are immutable and shared by every worker.
  std::map<TopicId, TopicTokenSet> token_sets;
  for (TopicId id : topics.topic_ids()) {
    token_sets.emplace(id, topic_token_set(id, topics, vocab, config.top_n, lemmas));
  }

  ScoringContext scoring{topics, vocab, config.top_n, {config.count_weighted, lemmas}};

  auto run_sample = [&](const CorpusSample& sample) {
    std::vector<Cell> cells;
    TokenSequence prefix{vocab.bos()};
    const TokenSequence body = vocab.encode(sample.article);
    prefix.insert(prefix.end(), body.begin(), body.end());
    const std::uint64_t seed = derive_seed(config.master_seed, sample.article_id);

    std::vector<TopicId> steered;
    if (config.policy != SteeringPolicy::tid2) steered.push_back(sample.tid1);
    if (config.policy != SteeringPolicy::tid1) steered.push_back(sample.tid2);

    for (const auto& condition : config.conditions) {
      for (TopicId tid : steered) {
        Cell cell{sample.article_id, condition.label, tid, std::nullopt, {}, {}};
        try {
          auto set_for = [&](TopicId t) -> const TopicTokenSet& {
            auto it = token_sets.find(t);
            if (it == token_sets.end()) throw InputError("unknown topic id " + std::to_string(t));
            return it->second;
          };
          const TopicTokenSet& steered_set = set_for(tid);
          ProcessorChain chain(vocab.size(), {TopicProcessor{condition.reweight, steered_set}});
          GenerationConfig gen = condition.generation;
          gen.seed = seed;
          const GenerationResult result = generate(*provider, prefix, chain, gen);

          SummaryTarget target{sample.article_id, condition.label, {sample.tid1, sample.tid2},
                               {sample.reference1, sample.reference2}, tid};
          cell.report = score_summary(result, target, scoring, set_for(sample.tid1),
                                      set_for(sample.tid2));
          cell.generation = generation_result_to_json(result, vocab, gen, condition.reweight);
          cell.generation["article_id"] = sample.article_id;
          cell.generation["condition"] = condition.label;
          cell.generation["steered_tid"] = tid;
        } catch (const std::exception& e) {
          cell.report.reset();
          cell.error = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
    return cells;
  };

  std::vector<std::vector<Cell>> per_sample(samples.size());
  const std::size_t workers = std::clamp<std::size_t>(config.jobs, 1, std::max<std::size_t>(samples.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) per_sample[i] = run_sample(samples[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < samples.size(); i = next++) per_sample[i] = run_sample(samples[i]);
      });
    }
    for (auto& t : pool) t.join();
  }

  fs::create_directories(config.out_dir);
  SweepSummary summary;
  summary.scores_csv = config.out_dir / "scores.csv";
  summary.aggregate_csv = config.out_dir / "aggregate.csv";
  summary.generations_jsonl = config.out_dir / "generations.jsonl";
  summary.manifest = config.out_dir / "manifest.json";

  std::string scores;
  std::string generations;
  csv::Row header = score_csv_header();
  header.push_back(kErrorColumn);
  scores += csv::format_row(header) + "\n";

  // condition label -> metric index -> values
  std::map<std::string, std::vector<std::vector<double>>> by_condition;
  for (const auto& cells : per_sample) {
    for (const auto& cell : cells) {
      ++summary.expected_rows;
      if (cell.report) {
        ++summary.scored_rows;
        csv::Row row = score_csv_row(*cell.report);
        row.emplace_back();
        scores += csv::format_row(row) + "\n";
        generations += cell.generation.dump() + "\n";
        summary.reports.push_back(*cell.report);
        auto& bucket = by_condition[cell.condition];
        const auto values = metric_values(*cell.report);
        bucket.resize(values.size());
        for (std::size_t m = 0; m < values.size(); ++m) bucket[m].push_back(values[m]);
      } else {
        ++summary.error_rows;
        csv::Row row{cell.article_id, cell.condition, std::to_string(cell.steered_tid)};
        row.resize(score_csv_header().size());
        row.push_back(cell.error);
        scores += csv::format_row(row) + "\n";
      }
    }
  }

  std::string aggregate = csv::format_row({"condition", "metric", "n", "mean", "std"}) + "\n";
  for (const auto& condition : config.conditions) {
    auto it = by_condition.find(condition.label);
    if (it == by_condition.end()) continue;
    for (std::size_t m = 0; m < it->second.size(); ++m) {
      const auto& v = it->second[m];
      const auto n = static_cast<double>(v.size());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= n;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      aggregate += csv::format_row({condition.label, metric_names()[m], std::to_string(v.size()),
                                    csv::format_number(mean), csv::format_number(sd)}) +
                   "\n";
    }
  }

  const json config_json = experiment_config_to_json(config);
  json seeds = json::object();
  for (const auto& s : samples) seeds[s.article_id] = derive_seed(config.master_seed, s.article_id);
  json manifest{{"config", config_json},
                {"config_hash", hex64(fnv1a64(config_json.dump()))},
                {"master_seed", config.master_seed},
                {"sample_seeds", std::move(seeds)},
                {"samples", samples.size()},
                {"conditions", config.conditions.size()},
                {"steered_topics_per_sample", config.policy == SteeringPolicy::both ? 2 : 1},
                {"rows", {{"expected", summary.expected_rows},
                          {"scored", summary.scored_rows},
                          {"errors", summary.error_rows}}},
                {"created_at", utc_timestamp()}};

  write_text(summary.scores_csv, scores);
  write_text(summary.aggregate_csv, aggregate);
  write_text(summary.generations_jsonl, generations);
  write_text(summary.manifest, manifest.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------
// Merge

namespace {

std::size_t column_index(const csv::Row& header, const std::string& name, const fs::path& file) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw MergeError(file.string() + " has no '" + name + "' column");
  return static_cast<std::size_t>(it - header.begin());
}

std::optional<std::size_t> find_column(const csv::Row& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

bool same_value(const std::string& a, const std::string& b) {
  if (a == b) return true;
  try {
    return std::stod(a) == std::stod(b);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

MergeSummary merge_external_scores(const fs::path& report_csv, const fs::path& external_csv,
                                   const fs::path& merged_csv, const fs::path& rejects_csv) {
  const auto report = csv::read_file(report_csv);
  if (report.empty()) throw MergeError(report_csv.string() + " is empty");
  const auto external = csv::read_file(external_csv);
  const csv::Row& rheader = report.front();

  MergeSummary summary;
  summary.rows = report.size() - 1;

  if (external.size() <= 1) {
    fs::copy_file(report_csv, merged_csv, fs::copy_options::overwrite_existing);
    std::string rejects;
    if (!external.empty()) rejects = csv::format_row(external.front()) + "\n";
    write_text(rejects_csv, rejects);
    return summary;
  }

  const csv::Row& eheader = external.front();
  const auto e_article = column_index(eheader, "article_id", external_csv);
  const auto e_condition = column_index(eheader, "condition", external_csv);
  const auto e_metric = column_index(eheader, "metric", external_csv);
  const auto e_value = column_index(eheader, "value", external_csv);
  const auto e_tid = find_column(eheader, "steered_tid");

  const auto r_article = column_index(rheader, "article_id", report_csv);
  const auto r_condition = column_index(rheader, "condition", report_csv);
  std::optional<std::size_t> r_tid;
  if (e_tid) r_tid = column_index(rheader, "steered_tid", report_csv);

  auto key_of = [](const csv::Row& row, std::size_t a, std::size_t c, std::optional<std::size_t> t) {
    std::string key = row.at(a) + '\x1f' + row.at(c);
    if (t) key += '\x1f' + row.at(*t);
    return key;
  };

  std::set<std::string> report_keys;
  for (std::size_t i = 1; i < report.size(); ++i) {
    report_keys.insert(key_of(report[i], r_article, r_condition, r_tid));
  }

  std::map<std::string, std::map<std::string, std::string>> values;
  std::set<std::string> metrics;
  std::string rejects = csv::format_row(eheader) + "\n";
  for (std::size_t i = 1; i < external.size(); ++i) {
    const csv::Row& row = external[i];
    if (row.size() < eheader.size()) {
      throw MergeError(external_csv.string() + ": row " + std::to_string(i + 1) + " is short");
    }
    const std::string key = key_of(row, e_article, e_condition, e_tid);
    if (!report_keys.contains(key)) {
      rejects += csv::format_row(row) + "\n";
      ++summary.rejected_rows;
      continue;
    }
    const std::string& metric = row[e_metric];
    auto [it, inserted] = values[key].emplace(metric, row[e_value]);
    if (!inserted && !same_value(it->second, row[e_value])) {
      throw MergeError("conflicting values for article '" + row[e_article] + "', condition '" +
                       row[e_condition] + "', metric '" + metric + "'");
    }
    metrics.insert(metric);
  }

  csv::Row header = rheader;
  header.insert(header.end(), metrics.begin(), metrics.end());
  std::string merged = csv::format_row(header) + "\n";
  for (std::size_t i = 1; i < report.size(); ++i) {
    csv::Row row = report[i];
    row.resize(rheader.size());
    auto it = values.find(key_of(report[i], r_article, r_condition, r_tid));
    if (it != values.end()) ++summary.matched_rows;
    for (const auto& metric : metrics) {
      if (it == values.end()) {
        row.emplace_back();
        continue;
      }
      auto v = it->second.find(metric);
      row.push_back(v == it->second.end() ? std::string() : v->second);
    }
    merged += csv::format_row(row) + "\n";
  }
  write_text(merged_csv, merged);
  write_text(rejects_csv, rejects);
  return summary;
}

}  // namespace topicsteer
