#pragma once

#include <cstdio>
#include <string>

namespace gnm {

// Floating values in every CSV are written with 9 significant digits.
inline std::string fmt9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

}  // namespace gnm
