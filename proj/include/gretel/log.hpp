#pragma once

#include <functional>
#include <string>

namespace gretel::log {

using Sink = std::function<void(const std::string&)>;

// Default sink writes "warning: ..." to stderr. Tests install a capture sink.
void set_warn_sink(Sink sink);
void reset_warn_sink();
void warn(const std::string& msg);

}  // namespace gretel::log
