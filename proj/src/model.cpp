#include "topicsteer/model.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "topicsteer/errors.hpp"

namespace topicsteer {

using nlohmann::json;

ToyMarkovModel::ToyMarkovModel(Vocabulary vocab, Eigen::MatrixXd table)
    : vocab_(std::move(vocab)), table_(std::move(table)) {
  const auto n = static_cast<Eigen::Index>(vocab_.size());
  if (table_.rows() != n || table_.cols() != n) {
    throw FormatError("toy model table must be " + std::to_string(n) + "x" +
                      std::to_string(n));
  }
  if (!table_.allFinite()) throw FormatError("toy model table has non-finite scores");
}

LogitVectorXd ToyMarkovModel::next_logits(std::span<const TokenId> prefix) const {
  if (prefix.empty()) throw InputError("prefix must be non-empty");
  vocab_.validate(prefix);
  return table_.row(prefix.back()).transpose();
}

ToyMarkovModel toy_model_from_json(const json& doc) {
  try {
    auto tokens = doc.at("tokens").get<std::vector<std::string>>();
    std::vector<std::string> lookup = tokens;
    auto id_of = [&](const std::string& key) -> TokenId {
      const auto name = doc.at(key).get<std::string>();
      auto it = std::find(lookup.begin(), lookup.end(), name);
      if (it == lookup.end()) throw FormatError(key + " token '" + name + "' not in tokens");
      return static_cast<TokenId>(it - lookup.begin());
    };
    const TokenId bos = id_of("bos");
    const TokenId eos = id_of("eos");
    Vocabulary vocab(std::move(tokens), bos, eos);

    const auto n = static_cast<Eigen::Index>(vocab.size());
    const json& rows = doc.at("table");
    if (!rows.is_object()) throw FormatError("'table' must be an object");
    Eigen::MatrixXd table(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& name = vocab.token(static_cast<TokenId>(r));
      auto it = rows.find(name);
      if (it == rows.end()) throw FormatError("table is missing a row for token '" + name + "'");
      if (!it->is_array() || static_cast<Eigen::Index>(it->size()) != n) {
        throw FormatError("row for token '" + name + "' must have " + std::to_string(n) +
                          " scores");
      }
      for (Eigen::Index c = 0; c < n; ++c) {
        const json& cell = (*it)[static_cast<std::size_t>(c)];
        // Non-finite values have no JSON number form; anything else is rejected here.
        if (!cell.is_number()) {
          throw FormatError("row for token '" + name + "' has a non-finite score");
        }
        table(r, c) = cell.get<double>();
      }
    }
    for (auto it = rows.begin(); it != rows.end(); ++it) {
      if (!vocab.find(it.key())) throw FormatError("table row for unknown token '" + it.key() + "'");
    }
    return ToyMarkovModel(std::move(vocab), std::move(table));
  } catch (const json::exception& e) {
    throw FormatError(std::string("toy model: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("toy model: ") + e.what());
  }
}

json toy_model_to_json(const ToyMarkovModel& model) {
  const auto& vocab = model.vocabulary();
  json doc;
  doc["tokens"] = vocab.tokens();
  doc["bos"] = vocab.token(vocab.bos());
  doc["eos"] = vocab.token(vocab.eos());
  json rows = json::object();
  for (Eigen::Index r = 0; r < model.table().rows(); ++r) {
    const LogitVectorXd row = model.table().row(r).transpose();
    rows[vocab.token(static_cast<TokenId>(r))] =
        std::vector<double>(row.data(), row.data() + row.size());
  }
  doc["table"] = std::move(rows);
  return doc;
}

ToyMarkovModel load_toy_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open toy model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return toy_model_from_json(doc);
}

void save_toy_model(const ToyMarkovModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write toy model file " + path.string());
  out << toy_model_to_json(model).dump() << '\n';
}

}  // namespace topicsteer
