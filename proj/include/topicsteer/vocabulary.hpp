#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topicsteer/logits.hpp"

namespace topicsteer {

/// Dense token-id space with designated BOS/EOS specials.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws FormatError on duplicate tokens, InputError on bad specials.
  Vocabulary(std::vector<std::string> tokens, TokenId bos, TokenId eos);

  std::size_t size() const { return tokens_.size(); }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }

  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<TokenId> find(std::string_view token) const;

  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }
  /// Throws InputError naming the first out-of-range id.
  void validate(std::span<const TokenId> ids) const;

  /// Greedy longest-match segmentation; characters no token covers are
  /// skipped. Specials never match.
  TokenSequence encode(std::string_view text) const;
  /// Concatenation of token strings, specials omitted.
  std::string decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && bos_ == other.bos_ && eos_ == other.eos_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t longest_token_ = 0;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
};

}  // namespace topicsteer
