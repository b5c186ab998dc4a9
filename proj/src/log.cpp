#include "gretel/log.hpp"

#include <iostream>
#include <mutex>

namespace gretel::log {

namespace {
std::mutex mu;
Sink sink;  // empty -> stderr
}  // namespace

void set_warn_sink(Sink s) {
    std::lock_guard<std::mutex> lock(mu);
    sink = std::move(s);
}

void reset_warn_sink() {
    std::lock_guard<std::mutex> lock(mu);
    sink = nullptr;
}

void warn(const std::string& msg) {
    std::lock_guard<std::mutex> lock(mu);
    if (sink) {
        sink(msg);
    } else {
        std::cerr << "warning: " << msg << "\n";
    }
}

}  // namespace gretel::log
