#include "impflow/flowmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace impflow {

std::int64_t Flow::size_bytes() const {
    std::int64_t total = 0;
    for (const auto& u : units)
        total += u.size_bytes;
    return total;
}

double Flow::avg_importance() const { return average_importance(units); }

double Flow::total_importance() const {
    double total = 0.0;
    for (const auto& u : units)
        total += u.importance;
    return total;
}

double average_importance(const std::vector<ResponseUnit>& units) {
    if (units.empty())
        throw SimError("average_importance: empty unit list");
    double sum = 0.0;
    for (const auto& u : units)
        sum += u.importance;
    return sum / static_cast<double>(units.size());
}

double fic(double avg_importance, double remaining_bytes, double remaining_seconds) {
    if (remaining_bytes <= 0.0)
        throw SimError("fic: remaining size must be positive");
    if (remaining_seconds <= 0.0)
        throw SimError("fic: remaining time must be positive");
    return avg_importance / (remaining_bytes * remaining_seconds);
}

Bps minimal_rate(std::int64_t remaining_bytes, TimeNs deadline, TimeNs now) {
    if (now >= deadline)
        throw SimError("minimal_rate: deadline already passed");
    return static_cast<double>(remaining_bytes) * 8.0 / ns_to_s(deadline - now);
}

Bps minimal_rate(const Flow& flow, TimeNs now) {
    return minimal_rate(flow.size_bytes(), flow.deadline, now);
}

namespace {

struct PrefixStats {
    std::vector<double> sum, sq;
    explicit PrefixStats(const std::vector<double>& v)
        : sum(v.size() + 1, 0.0), sq(v.size() + 1, 0.0) {
        for (size_t i = 0; i < v.size(); ++i) {
            sum[i + 1] = sum[i] + v[i];
            sq[i + 1] = sq[i] + v[i] * v[i];
        }
    }
    // Within-cluster sum of squared deviations for sorted range [i, j).
    double sse(size_t i, size_t j) const {
        double n = static_cast<double>(j - i);
        double s = sum[j] - sum[i];
        return (sq[j] - sq[i]) - s * s / n;
    }
};

// Exhaustive threshold scan for the two-cluster case. Ties prefer the most
// balanced split, then the lower threshold.
size_t best_two_way_threshold(const PrefixStats& ps, size_t n) {
    size_t best_t = 1;
    double best_cost = ps.sse(0, 1) + ps.sse(1, n);
    auto balance = [n](size_t t) {
        return std::abs(static_cast<long>(n) - 2 * static_cast<long>(t));
    };
    for (size_t t = 2; t < n; ++t) {
        double cost = ps.sse(0, t) + ps.sse(t, n);
        if (cost < best_cost - 1e-12 ||
            (cost < best_cost + 1e-12 && balance(t) < balance(best_t))) {
            best_cost = std::min(cost, best_cost);
            best_t = t;
        }
    }
    return best_t;
}

} // namespace

std::vector<std::vector<int>> cluster_by_importance(const std::vector<double>& values,
                                                    int clusters) {
    const size_t n = values.size();
    if (clusters < 1)
        throw SimError("cluster_by_importance: clusters must be >= 1");
    if (n < static_cast<size_t>(clusters))
        throw SimError("cluster_by_importance: fewer units than clusters");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    std::vector<double> sorted(n);
    for (size_t i = 0; i < n; ++i)
        sorted[i] = values[order[i]];
    PrefixStats ps(sorted);

    std::vector<size_t> bounds; // cluster boundaries in sorted order
    if (clusters == 1) {
        bounds = {0, n};
    } else if (clusters == 2) {
        size_t t = best_two_way_threshold(ps, n);
        bounds = {0, t, n};
    } else {
        const size_t k = static_cast<size_t>(clusters);
        constexpr double kInf = std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> cost(k + 1, std::vector<double>(n + 1, kInf));
        std::vector<std::vector<size_t>> from(k + 1, std::vector<size_t>(n + 1, 0));
        cost[0][0] = 0.0;
        for (size_t m = 1; m <= k; ++m)
            for (size_t j = m; j <= n; ++j)
                for (size_t i = m - 1; i < j; ++i) {
                    if (cost[m - 1][i] == kInf)
                        continue;
                    double c = cost[m - 1][i] + ps.sse(i, j);
                    if (c < cost[m][j]) {
                        cost[m][j] = c;
                        from[m][j] = i;
                    }
                }
        bounds.assign(k + 1, 0);
        bounds[k] = n;
        for (size_t m = k; m > 0; --m)
            bounds[m - 1] = from[m][bounds[m]];
    }

    std::vector<std::vector<int>> groups;
    for (size_t g = 0; g + 1 < bounds.size(); ++g) {
        std::vector<int> members(order.begin() + bounds[g], order.begin() + bounds[g + 1]);
        std::sort(members.begin(), members.end());
        groups.push_back(std::move(members));
    }
    std::stable_sort(groups.begin(), groups.end(),
                     [&](const std::vector<int>& a, const std::vector<int>& b) {
                         double ma = 0, mb = 0;
                         for (int i : a) ma += values[i];
                         for (int i : b) mb += values[i];
                         ma /= static_cast<double>(a.size());
                         mb /= static_cast<double>(b.size());
                         if (ma != mb)
                             return ma > mb;
                         return a.front() < b.front();
                     });
    return groups;
}

std::vector<Flow> split_flow(const Flow& flow, int clusters) {
    if (clusters < 1)
        throw SimError("split_flow: clusters must be >= 1");
    if (flow.units.size() < static_cast<size_t>(clusters))
        throw SimError("split_flow: fewer units than clusters");
    if (clusters == 1)
        return {flow};

    std::vector<double> values;
    values.reserve(flow.units.size());
    for (const auto& u : flow.units)
        values.push_back(u.importance);
    auto groups = cluster_by_importance(values, clusters);

    std::vector<Flow> children;
    children.reserve(groups.size());
    for (size_t g = 0; g < groups.size(); ++g) {
        Flow child;
        child.id = flow.id * static_cast<FlowId>(clusters) + static_cast<FlowId>(g);
        child.src = flow.src;
        child.dst = flow.dst;
        child.begin = flow.begin;
        child.deadline = flow.deadline;
        child.parent = flow.id;
        child.split_class = static_cast<int>(g);
        for (int idx : groups[g])
            child.units.push_back(flow.units[idx]);
        children.push_back(std::move(child));
    }
    return children;
}

} // namespace impflow
