#pragma once

#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "topicsteer/logits.hpp"
#include "topicsteer/model.hpp"
#include "topicsteer/topic_vocabulary.hpp"

namespace tstest {

using namespace topicsteer;

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(TOPICSTEER_DATA_DIR) / name;
}

/// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(n) - 1)); }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }

  LogitVectorXd logits(std::size_t n, double lo = -10.0, double hi = 10.0) {
    LogitVectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = real(lo, hi);
    return v;
  }

  /// Random subset of [0, n), each id kept with probability p.
  std::vector<TokenId> subset(std::size_t n, double p) {
    std::vector<TokenId> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (coin(p)) ids.push_back(static_cast<TokenId>(i));
    }
    return ids;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline TopicTokenSet make_set(std::initializer_list<TokenId> ids, TopicId topic = 0) {
  std::map<TokenId, std::string> prov;
  for (TokenId id : ids) prov.emplace(id, "w" + std::to_string(id));
  return TopicTokenSet(topic, std::move(prov));
}

inline TopicTokenSet make_set(const std::vector<TokenId>& ids, TopicId topic = 0) {
  std::map<TokenId, std::string> prov;
  for (TokenId id : ids) prov.emplace(id, "w" + std::to_string(id));
  return TopicTokenSet(topic, std::move(prov));
}

inline LogitVectorXd vec(std::initializer_list<double> values) {
  LogitVectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

/// Bitwise comparison, so -0.0 != 0.0 and NaN payloads count.
inline bool bit_identical(double a, double b) {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::memcpy(&x, &a, sizeof x);
  std::memcpy(&y, &b, sizeof y);
  return x == y;
}

inline bool bit_identical(const LogitVectorXd& a, const LogitVectorXd& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!bit_identical(a(i), b(i))) return false;
  }
  return true;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("topicsteer-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Vocabulary <s>, </s>, then the given tokens.
inline Vocabulary vocab_with(std::vector<std::string> tokens) {
  tokens.insert(tokens.begin(), {"<s>", "</s>"});
  return Vocabulary(std::move(tokens), 0, 1);
}

/// Random order-1 table over `n` tokens (two of them specials) whose BOS
/// column is strongly negative so BOS is never generated.
inline ToyMarkovModel random_toy_model(Gen& gen, std::size_t n, double spread = 4.0) {
  std::vector<std::string> tokens;
  for (std::size_t i = 2; i < n; ++i) tokens.push_back("t" + std::to_string(i));
  Vocabulary vocab = vocab_with(tokens);
  Eigen::MatrixXd table(n, n);
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.cols(); ++c) table(r, c) = gen.real(-spread, spread);
    table(r, 0) = -50.0;
  }
  return ToyMarkovModel(std::move(vocab), std::move(table));
}

}  // namespace tstest
