#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace impflow {

// Simulation time in integer nanoseconds; rates in bits per second.
using TimeNs = std::int64_t;
using Bps = double;
using FlowId = std::int64_t;
using NodeIndex = std::int32_t;
using LinkIndex = std::int32_t;

constexpr TimeNs kNoTime = std::numeric_limits<TimeNs>::min();
constexpr NodeIndex kNoNode = -1;

// Slack used when comparing booked rates against capacities. Capacities are
// O(1e9) bps, so this is ~1e-12 relative.
constexpr double kRateEps = 1e-3;

constexpr TimeNs kMicrosecond = 1'000;
constexpr TimeNs kMillisecond = 1'000'000;
constexpr TimeNs kSecond = 1'000'000'000;

inline double ns_to_s(TimeNs t) { return static_cast<double>(t) * 1e-9; }

inline TimeNs s_to_ns(double s) { return static_cast<TimeNs>(s * 1e9); }

class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace impflow
