#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace markovht {

// Verbosity from the HOEFFDING_LOG environment variable: unset/0 = quiet,
// 1 = info, 2 = debug.
inline int log_level() {
    static const int level = [] {
        const char* v = std::getenv("HOEFFDING_LOG");
        if (v == nullptr || *v == '\0') return 0;
        return std::atoi(v);
    }();
    return level;
}

template <typename... Args>
void log_warn(const char* fmt, Args... args) {
    std::fprintf(stderr, "[markovht] warning: ");
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
    if (log_level() >= 1) {
        std::fprintf(stderr, "[markovht] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    if (log_level() >= 2) {
        std::fprintf(stderr, "[markovht] debug: ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

}  // namespace markovht
