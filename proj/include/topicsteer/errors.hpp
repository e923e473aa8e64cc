#pragma once

#include <stdexcept>
#include <string>

namespace topicsteer {

/// Caller passed an argument that violates an operation's precondition.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A file on disk does not conform to its documented format.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Components were wired together inconsistently (e.g. vocabulary mismatch).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class MergeError : public std::runtime_error {
 public:
  explicit MergeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace topicsteer
