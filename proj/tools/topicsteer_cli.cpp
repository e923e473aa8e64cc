// Command-line front end: generate, sweep, merge, expand-topic.
//
// Exit codes: 0 success, 1 usage/config error, 2 sweep finished with per-row
// errors, 3 total failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "topicsteer/decoding.hpp"
#include "topicsteer/errors.hpp"
#include "topicsteer/evaluation.hpp"
#include "topicsteer/experiment.hpp"
#include "topicsteer/topic_vocabulary.hpp"

namespace ts = topicsteer;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRowErrors = 2;
constexpr int kExitFailure = 3;

struct SteeringFlags {
  std::optional<std::string> method;
  std::optional<double> c, alpha, theta, beta;
  std::optional<std::string> strategy;
  std::optional<std::size_t> beams, top_k, min_tokens, max_tokens;
  std::optional<double> top_p;

  void add_to(CLI::App& app) {
    app.add_option("--method", method, "Reweighting method")
        ->check(CLI::IsMember({"none", "shift", "scale", "threshold"}));
    app.add_option("--c", c, "Constant added to topic logits (shift)");
    app.add_option("--alpha", alpha, "Factor applied to topic logits (scale)");
    app.add_option("--theta", theta, "Probability threshold (threshold)")->check(CLI::Range(0.0, 1.0));
    app.add_option("--beta", beta, "Encouragement above the max logit (threshold)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--strategy", strategy, "Decoding strategy")
        ->check(CLI::IsMember({"greedy", "sample", "beam"}));
    app.add_option("--beams", beams, "Beam count (default 4)")->check(CLI::PositiveNumber);
    app.add_option("--top-k", top_k, "Top-k truncation (default 50)")->check(CLI::PositiveNumber);
    app.add_option("--top-p", top_p, "Nucleus mass (default 0.95)");
    app.add_option("--min-tokens", min_tokens, "Minimum new tokens (default 80)");
    app.add_option("--max-tokens", max_tokens, "Maximum new tokens (default 90)");
  }

  ts::ConditionOverrides overrides() const {
    ts::ConditionOverrides o;
    if (method) o.method = ts::parse_reweight_method(*method);
    o.c = c;
    o.alpha = alpha;
    o.theta = theta;
    o.beta = beta;
    if (strategy) o.strategy = ts::parse_strategy(*strategy);
    o.num_beams = beams;
    o.top_k = top_k;
    o.top_p = top_p;
    o.min_tokens = min_tokens;
    o.max_tokens = max_tokens;
    return o;
  }
};

json scores_to_json(const ts::TopicalScores& s) {
  return {{"lemma", s.lemma_score}, {"token", s.token_score}, {"dict", s.dict_score}};
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  SteeringFlags steering;
  std::string model;
  std::string topics_file;
  std::string corpus;
  std::string article_id;
  std::string text;
  std::optional<ts::TopicId> topic;
  std::size_t top_n = 25;
  std::uint64_t seed = 0;
  bool trace = false;
};

int run_generate(const GenerateArgs& args) {
  const auto provider = ts::make_provider(args.model);
  const auto& vocab = provider->vocabulary();

  std::optional<ts::CorpusSample> sample;
  if (!args.corpus.empty()) {
    for (auto& s : ts::load_corpus(args.corpus)) {
      if (args.article_id.empty() || s.article_id == args.article_id) {
        sample = std::move(s);
        break;
      }
    }
    if (!sample) throw ts::ConfigError("article '" + args.article_id + "' not in corpus");
  }
  const std::string article = sample ? sample->article : args.text;

  ts::Condition condition;
  condition.label = "cli";
  args.steering.overrides().apply(condition);
  condition.generation.seed = args.seed;
  condition.generation.trace = args.trace;

  std::optional<ts::TopicModel> topics;
  if (!args.topics_file.empty()) topics = ts::load_topic_model(args.topics_file);

  std::optional<ts::TopicId> steered = args.topic;
  if (!steered && sample) steered = sample->tid1;
  if (condition.reweight.method != ts::ReweightMethod::none && (!topics || !steered)) {
    throw ts::ConfigError("steering requires --topics-file and --topic (or a corpus article)");
  }

  std::vector<ts::TopicProcessor> processors;
  if (topics && steered) {
    processors.push_back({condition.reweight, ts::topic_token_set(*steered, *topics, vocab, args.top_n)});
  }
  const ts::ProcessorChain chain(vocab.size(), std::move(processors));

  ts::TokenSequence prefix{vocab.bos()};
  const auto body = vocab.encode(article);
  prefix.insert(prefix.end(), body.begin(), body.end());

  const auto result = ts::generate(*provider, prefix, chain, condition.generation);
  json out = ts::generation_result_to_json(result, vocab, condition.generation, condition.reweight);

  if (topics && sample && steered && (*steered == sample->tid1 || *steered == sample->tid2)) {
    ts::ScoringContext ctx{*topics, vocab, args.top_n, {}};
    ts::SummaryTarget target{sample->article_id, condition.label, {sample->tid1, sample->tid2},
                             {sample->reference1, sample->reference2}, *steered};
    const auto report = ts::score_summary(result, target, ctx);
    out["scores"] = {{"article_id", report.article_id},
                     {"steered_tid", report.steered_tid},
                     {"tid1", scores_to_json(report.topic1)},
                     {"tid2", scores_to_json(report.topic2)},
                     {"rouge_l_f1", report.quality.rouge_l_f1}};
  } else if (topics && steered) {
    const auto set = ts::topic_token_set(*steered, *topics, vocab, args.top_n);
    out["scores"] = {{"steered_tid", *steered},
                     {"steered", scores_to_json({ts::lemma_topic_score(out["text"].get<std::string>(),
                                                                       *steered, *topics, args.top_n),
                                                 ts::token_topic_score(result.sequence, set),
                                                 ts::dict_topic_score(out["text"].get<std::string>(),
                                                                      *steered, *topics)
                                                     .score})}};
  }
  std::cout << out["text"].get<std::string>() << '\n' << out.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  SteeringFlags steering;
  std::string config;
  std::string corpus, topics_file, model, out_dir;
  std::optional<std::size_t> limit, jobs;
  std::optional<std::uint64_t> seed;
};

int run_sweep(const SweepArgs& args) {
  ts::ExperimentConfig cfg;
  if (!args.config.empty()) cfg = ts::load_experiment_config(args.config);
  if (!args.corpus.empty()) cfg.corpus = args.corpus;
  if (!args.topics_file.empty()) cfg.topics = args.topics_file;
  if (!args.model.empty()) cfg.model = args.model;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.limit) cfg.limit = *args.limit;
  if (args.jobs) cfg.jobs = *args.jobs;
  if (args.seed) cfg.master_seed = *args.seed;

  if (cfg.conditions.empty()) {
    ts::Condition c;
    c.label = std::string(ts::to_string(args.steering.overrides().method.value_or(ts::ReweightMethod::none)));
    cfg.conditions.push_back(c);
  }
  const auto overrides = args.steering.overrides();
  for (auto& c : cfg.conditions) overrides.apply(c);

  const auto summary = ts::run_sweep(cfg);
  std::cout << "rows: " << summary.expected_rows << " expected, " << summary.scored_rows
            << " scored, " << summary.error_rows << " errors\n"
            << "wrote " << summary.scores_csv.string() << ", " << summary.aggregate_csv.string()
            << ", " << summary.generations_jsonl.string() << ", " << summary.manifest.string()
            << '\n';
  if (summary.expected_rows > 0 && summary.scored_rows == 0) return kExitFailure;
  if (summary.error_rows > 0) return kExitRowErrors;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MergeArgs {
  std::string report, external, out, rejects;
};

int run_merge(const MergeArgs& args) {
  const fs::path out = args.out;
  const fs::path rejects =
      args.rejects.empty() ? out.parent_path() / (out.stem().string() + ".rejects.csv") : fs::path(args.rejects);
  const auto summary = ts::merge_external_scores(args.report, args.external, out, rejects);
  std::cout << "merged " << summary.rows << " rows (" << summary.matched_rows << " matched), "
            << summary.rejected_rows << " external rows rejected to " << rejects.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ExpandArgs {
  std::string model, topics_file;
  ts::TopicId topic = 0;
  std::size_t top_n = 25;
};

int run_expand(const ExpandArgs& args) {
  const auto provider = ts::make_provider(args.model);
  const auto& vocab = provider->vocabulary();
  const auto topics = ts::load_topic_model(args.topics_file);
  const auto set = ts::topic_token_set(args.topic, topics, vocab, args.top_n);

  json words = json::array();
  for (const auto& w : topics.top_words(args.topic, args.top_n)) {
    const auto variants = ts::expand_word(w.word);
    json matched = json::array();
    for (auto id : ts::matching_tokens(variants, vocab)) matched.push_back(vocab.token(id));
    words.push_back({{"word", w.word}, {"weight", w.weight}, {"variants", variants.variants},
                     {"tokens", std::move(matched)}});
  }
  json tokens = json::array();
  for (auto id : set.ids()) {
    tokens.push_back({{"id", id}, {"token", vocab.token(id)}, {"word", set.source_word(id)}});
  }
  std::cout << json{{"topic", args.topic}, {"top_n", args.top_n}, {"size", set.size()},
                    {"words", std::move(words)}, {"token_set", std::move(tokens)}}
                   .dump(2)
            << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic-steered text generation by logit reweighting"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Generate one summary and print it with scores");
  gen.steering.add_to(*generate_cmd);
  generate_cmd->add_option("--model", gen.model, "Toy-model JSON path or <scheme>:<arg>")->required();
  generate_cmd->add_option("--topics-file", gen.topics_file, "Topic-model JSON");
  generate_cmd->add_option("--topic", gen.topic, "Topic id to steer toward");
  generate_cmd->add_option("--corpus", gen.corpus, "Corpus JSONL; the article is taken from here");
  generate_cmd->add_option("--article", gen.article_id, "Article id in the corpus (default: first)");
  generate_cmd->add_option("--text", gen.text, "Raw article text when no corpus is given");
  generate_cmd->add_option("--top-n", gen.top_n, "Topic words per topic")->check(CLI::PositiveNumber);
  generate_cmd->add_option("--seed", gen.seed, "Sampling seed");
  generate_cmd->add_flag("--trace", gen.trace, "Record per-step logits of chosen tokens");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment sweep over a corpus");
  sweep.steering.add_to(*sweep_cmd);
  sweep_cmd->add_option("--config", sweep.config, "Experiment config JSON")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--corpus", sweep.corpus, "Corpus JSONL");
  sweep_cmd->add_option("--topics-file", sweep.topics_file, "Topic-model JSON");
  sweep_cmd->add_option("--model", sweep.model, "Toy-model JSON path or <scheme>:<arg>");
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory");
  sweep_cmd->add_option("--limit", sweep.limit, "Maximum number of articles")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads")->check(CLI::PositiveNumber);

  MergeArgs merge;
  auto* merge_cmd = app.add_subcommand("merge", "Join externally computed scores onto a report");
  merge_cmd->add_option("--report", merge.report, "scores.csv from a sweep")->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--external", merge.external, "CSV: article_id,condition,metric,value")
      ->required()
      ->check(CLI::ExistingFile);
  merge_cmd->add_option("--out", merge.out, "Merged CSV path")->required();
  merge_cmd->add_option("--rejects", merge.rejects, "Unmatched external rows (default <out>.rejects.csv)");

  ExpandArgs expand;
  auto* expand_cmd = app.add_subcommand("expand-topic", "Print the token set of one topic");
  expand_cmd->add_option("--model", expand.model, "Toy-model JSON (provides the vocabulary)")->required();
  expand_cmd->add_option("--topics-file", expand.topics_file, "Topic-model JSON")->required();
  expand_cmd->add_option("--topic", expand.topic, "Topic id")->required();
  expand_cmd->add_option("--top-n", expand.top_n, "Topic words")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate_cmd) return run_generate(gen);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*merge_cmd) return run_merge(merge);
    if (*expand_cmd) return run_expand(expand);
  } catch (const ts::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ts::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ts::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
