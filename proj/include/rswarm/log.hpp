#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace rswarm::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Verbosity comes from the RS_LOG environment variable
// (error|warn|info|debug); default is warn.
inline Level level() {
    static const Level cached = [] {
        const char* env = std::getenv("RS_LOG");
        if (env == nullptr) return Level::warn;
        if (std::strcmp(env, "error") == 0) return Level::error;
        if (std::strcmp(env, "info") == 0) return Level::info;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        return Level::warn;
    }();
    return cached;
}

inline void emit(Level lvl, const char* tag, const std::string& msg) {
    if (static_cast<int>(lvl) <= static_cast<int>(level())) {
        std::fprintf(stderr, "[rswarm %s] %s\n", tag, msg.c_str());
    }
}

inline void error(const std::string& msg) { emit(Level::error, "error", msg); }
inline void warn(const std::string& msg) { emit(Level::warn, "warn", msg); }
inline void info(const std::string& msg) { emit(Level::info, "info", msg); }
inline void debug(const std::string& msg) { emit(Level::debug, "debug", msg); }

}  // namespace rswarm::log
