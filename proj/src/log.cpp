#include "topicsteer/log.hpp"

#include <iostream>
#include <mutex>

namespace topicsteer {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& current_sink() {
  static WarningSink sink = [](std::string_view message) {
    std::cerr << "warning: " << message << '\n';
  };
  return sink;
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  std::swap(current_sink(), sink);
  return sink;
}

void log_warning(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(message);
}

}  // namespace topicsteer
