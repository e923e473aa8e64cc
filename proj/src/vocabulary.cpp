#include "topicsteer/vocabulary.hpp"

#include <algorithm>

#include "topicsteer/errors.hpp"

namespace topicsteer {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId bos, TokenId eos)
    : tokens_(std::move(tokens)), bos_(bos), eos_(eos) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) {
      throw FormatError("empty token string at id " + std::to_string(i));
    }
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) throw FormatError("duplicate token string '" + tokens_[i] + "'");
    longest_token_ = std::max(longest_token_, tokens_[i].size());
  }
  if (!contains(bos_) || !contains(eos_)) {
    throw InputError("BOS/EOS id outside vocabulary");
  }
  if (bos_ == eos_) throw InputError("BOS and EOS must be distinct tokens");
}

const std::string& Vocabulary::token(TokenId id) const {
  if (!contains(id)) throw InputError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::validate(std::span<const TokenId> ids) const {
  for (std::size_t pos = 0; pos < ids.size(); ++pos) {
    if (!contains(ids[pos])) {
      throw InputError("token id " + std::to_string(ids[pos]) + " at position " +
                       std::to_string(pos) + " outside vocabulary of size " +
                       std::to_string(size()));
    }
  }
}

TokenSequence Vocabulary::encode(std::string_view text) const {
  TokenSequence out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = std::min(longest_token_, text.size() - pos);
    bool matched = false;
    for (; len > 0; --len) {
      auto it = index_.find(std::string(text.substr(pos, len)));
      if (it != index_.end() && it->second != bos_ && it->second != eos_) {
        out.push_back(it->second);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++pos;
  }
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == bos_ || id == eos_) continue;
    out += token(id);
  }
  return out;
}

}  // namespace topicsteer
