#pragma once

#include <cstdio>
#include <string>

namespace posh::detail {

// fixed-width decimal rendering keeps report files byte-stable across runs
inline std::string num(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace posh::detail
