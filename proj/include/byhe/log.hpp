#pragma once

#include <string_view>

namespace byhe::log {

enum class Level { error = 0, info = 1, debug = 2 };

/// Current verbosity, read once from BYHE_LOG (error|info|debug; default error).
Level level();
void set_level(Level lvl);

void error(std::string_view msg);
void info(std::string_view msg);
void debug(std::string_view msg);

}  // namespace byhe::log
