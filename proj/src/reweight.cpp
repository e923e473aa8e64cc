#include "topicsteer/reweight.hpp"

#include <cmath>

namespace topicsteer {

std::string_view to_string(ReweightMethod method) {
  switch (method) {
    case ReweightMethod::none:
      return "none";
    case ReweightMethod::constant_shift:
      return "shift";
    case ReweightMethod::factor_scaling:
      return "scale";
    case ReweightMethod::threshold_selection:
      return "threshold";
  }
  return "none";
}

ReweightMethod parse_reweight_method(std::string_view name) {
  if (name == "none") return ReweightMethod::none;
  if (name == "shift" || name == "constant_shift") return ReweightMethod::constant_shift;
  if (name == "scale" || name == "factor_scaling") return ReweightMethod::factor_scaling;
  if (name == "threshold" || name == "threshold_selection") {
    return ReweightMethod::threshold_selection;
  }
  throw InputError("unknown reweighting method '" + std::string(name) + "'");
}

void ReweightConfig::validate() const {
  switch (method) {
    case ReweightMethod::none:
      break;
    case ReweightMethod::constant_shift:
      if (!std::isfinite(c)) throw InputError("shift constant c must be finite");
      break;
    case ReweightMethod::factor_scaling:
      if (!std::isfinite(alpha)) throw InputError("scaling factor alpha must be finite");
      break;
    case ReweightMethod::threshold_selection:
      if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("threshold theta must lie in [0,1]");
      if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw InputError("beta must be finite and >= 0");
      }
      break;
  }
}

ProcessorChain::ProcessorChain(std::size_t vocab_size, std::vector<TopicProcessor> processors)
    : vocab_size_(vocab_size), processors_(std::move(processors)) {
  for (const auto& p : processors_) {
    p.config.validate();
    for (TokenId id : p.topic.ids()) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
        throw ConfigError("topic " + std::to_string(p.topic.topic()) + " token " +
                          std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(vocab_size));
      }
    }
  }
}

}  // namespace topicsteer
