#include "byhe/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace byhe::log {
namespace {

Level level_from_env() {
    const char* env = std::getenv("BYHE_LOG");
    if (env == nullptr) return Level::error;
    const std::string v(env);
    if (v == "debug") return Level::debug;
    if (v == "info") return Level::info;
    return Level::error;
}

std::atomic<int>& current() {
    static std::atomic<int> lvl{static_cast<int>(level_from_env())};
    return lvl;
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

void emit(Level lvl, const char* tag, std::string_view msg) {
    if (static_cast<int>(lvl) > current().load()) return;
    std::lock_guard lock(sink_mutex());
    std::cerr << "[byhe " << tag << "] " << msg << '\n';
}

}  // namespace

Level level() { return static_cast<Level>(current().load()); }
void set_level(Level lvl) { current().store(static_cast<int>(lvl)); }

void error(std::string_view msg) { emit(Level::error, "error", msg); }
void info(std::string_view msg) { emit(Level::info, "info", msg); }
void debug(std::string_view msg) { emit(Level::debug, "debug", msg); }

}  // namespace byhe::log
