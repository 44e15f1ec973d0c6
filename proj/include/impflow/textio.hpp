#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace impflow {

// Canonical number rendering shared by traces, CSV reports, and the trace
// file format: integers without a decimal point, everything else with up to
// nine significant digits.
inline std::string fmt_double(double v) {
    if (std::isfinite(v) && v == std::rint(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string fmt_rate(double bps) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", bps);
    return buf;
}

inline std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace impflow
