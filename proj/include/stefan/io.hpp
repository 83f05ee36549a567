#pragma once

#include "stefan/error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace stefan::io {

/// 17 significant digits, enough for doubles to round-trip.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw ConfigError("cannot open output file " + path.string());
    return out;
}

} // namespace stefan::io
