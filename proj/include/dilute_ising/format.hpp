#pragma once

#include <charconv>
#include <cstdint>
#include <string>

// Deterministic value formatting for report files. All floating-point
// output goes through std::to_chars (shortest round-trip form), so a rerun
// with identical inputs produces byte-identical CSV/JSON.

namespace dising::fmt {

inline std::string number(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

inline std::string number(std::int64_t v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

inline std::string number(std::uint64_t v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

}  // namespace dising::fmt
