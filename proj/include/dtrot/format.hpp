#pragma once

#include <charconv>
#include <string>

namespace dtrot {

/// Shortest round-trip decimal representation; locale independent, so CSV
/// output is byte-stable across runs and platforms.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt_int(long long v) { return std::to_string(v); }

}  // namespace dtrot
