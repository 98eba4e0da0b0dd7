// Copyright (C) 2026 The tagdet Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "tagdet/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace tagdet::log {
namespace {

Level from_env() {
    const char* v = std::getenv("TAGDET_LOG");
    if (!v) return Level::Warn;
    const std::string s(v);
    if (s == "quiet") return Level::Quiet;
    if (s == "error") return Level::Error;
    if (s == "info") return Level::Info;
    if (s == "debug") return Level::Debug;
    return Level::Warn;
}

std::atomic<Level>& current() {
    static std::atomic<Level> lvl{from_env()};
    return lvl;
}

void emit(Level lvl, const char* tag, std::string_view msg) {
    if (static_cast<int>(lvl) > static_cast<int>(current().load())) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[" << tag << "] " << msg << '\n';
}

}  // namespace

Level level() { return current().load(); }
void set_level(Level lvl) { current().store(lvl); }

void error(std::string_view msg) { emit(Level::Error, "error", msg); }
void warn(std::string_view msg) { emit(Level::Warn, "warn", msg); }
void info(std::string_view msg) { emit(Level::Info, "info", msg); }
void debug(std::string_view msg) { emit(Level::Debug, "debug", msg); }

}  // namespace tagdet::log
