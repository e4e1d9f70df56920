// Licensed under the Apache License, Version 2.0. See LICENSE in the project root.
#include "agnet/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <string>

namespace agnet {

namespace {

LogLevel level_from_env() {
    const char* env = std::getenv("AGNET_LOG_LEVEL");
    if (env == nullptr) {
        return LogLevel::warn;
    }
    const std::string v(env);
    if (v == "error") {
        return LogLevel::error;
    }
    if (v == "info") {
        return LogLevel::info;
    }
    if (v == "debug") {
        return LogLevel::debug;
    }
    return LogLevel::warn;
}

std::atomic<int>& threshold() {
    static std::atomic<int> value{static_cast<int>(level_from_env())};
    return value;
}

constexpr std::string_view kNames[] = {"error", "warn", "info", "debug"};

} // namespace

LogLevel log_level() {
    return static_cast<LogLevel>(threshold().load());
}

void set_log_level(LogLevel level) {
    threshold().store(static_cast<int>(level));
}

void log(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) > threshold().load()) {
        return;
    }
    std::clog << "[agnet " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

} // namespace agnet
