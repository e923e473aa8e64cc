#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "topicsteer/logits.hpp"
#include "topicsteer/vocabulary.hpp"

namespace topicsteer {

/// Next-token scoring backend. One prefix in, one logit vector out.
///
/// Implementations must tolerate concurrent calls from independent
/// generation sessions. Neural backends plug in here by deriving from this
/// class; the engine never looks past this interface.
class LogitsProvider {
 public:
  virtual ~LogitsProvider() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  /// `prefix` is non-empty and starts with BOS. Throws InputError when any
  /// id is outside the vocabulary.
  virtual LogitVectorXd next_logits(std::span<const TokenId> prefix) const = 0;
};

/// Order-1 Markov table: the scores for the next token depend only on the
/// last token of the prefix.
class ToyMarkovModel final : public LogitsProvider {
 public:
  /// `table` is vocab x vocab; row r holds the logits following token r.
  ToyMarkovModel(Vocabulary vocab, Eigen::MatrixXd table);

  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVectorXd next_logits(std::span<const TokenId> prefix) const override;

  const Eigen::MatrixXd& table() const { return table_; }

  bool operator==(const ToyMarkovModel& other) const {
    return vocab_ == other.vocab_ && table_ == other.table_;
  }

 private:
  Vocabulary vocab_;
  Eigen::MatrixXd table_;
};

ToyMarkovModel toy_model_from_json(const nlohmann::json& doc);
nlohmann::json toy_model_to_json(const ToyMarkovModel& model);

ToyMarkovModel load_toy_model(const std::filesystem::path& path);
void save_toy_model(const ToyMarkovModel& model, const std::filesystem::path& path);

}  // namespace topicsteer
