#include "impflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace impflow {

namespace {
constexpr double kCapSlack = 1e-6;

struct PathSet {
    std::vector<std::vector<LinkIndex>> link_sets;
};

// Recursively try every path assignment for the flows named in `chosen`.
bool assign_paths(const std::vector<const PathSet*>& paths,
                  const std::vector<Bps>& demands,
                  const std::vector<Bps>& capacity, size_t idx,
                  std::vector<Bps>& used, std::vector<int>& choice) {
    if (idx == paths.size())
        return true;
    for (size_t p = 0; p < paths[idx]->link_sets.size(); ++p) {
        const auto& links = paths[idx]->link_sets[p];
        bool fits = true;
        for (LinkIndex l : links)
            if (used[static_cast<size_t>(l)] + demands[idx] >
                capacity[static_cast<size_t>(l)] + kCapSlack) {
                fits = false;
                break;
            }
        if (!fits)
            continue;
        for (LinkIndex l : links)
            used[static_cast<size_t>(l)] += demands[idx];
        choice[idx] = static_cast<int>(p);
        if (assign_paths(paths, demands, capacity, idx + 1, used, choice))
            return true;
        for (LinkIndex l : links)
            used[static_cast<size_t>(l)] -= demands[idx];
        choice[idx] = -1;
    }
    return false;
}

} // namespace

OracleSolution solve_global(const TinyInstance& instance) {
    if (!instance.topo)
        throw SimError("solve_global: no topology");
    const auto& topo = *instance.topo;
    const size_t n = instance.flows.size();
    if (n > kOracleMaxFlows)
        throw SimError("solve_global: instance exceeds the exhaustive-search guard (" +
                       std::to_string(n) + " flows)");

    std::vector<PathSet> path_sets(n);
    for (size_t i = 0; i < n; ++i) {
        const auto& f = instance.flows[i];
        if (f.demand <= 0.0)
            throw SimError("solve_global: demands must be positive");
        auto paths = topo.disjoint_paths(f.src, f.dst);
        if (paths.size() > kOracleMaxPaths)
            throw SimError("solve_global: too many candidate paths");
        for (const auto& p : paths)
            path_sets[i].link_sets.push_back(p.links);
    }
    std::vector<Bps> capacity(topo.num_links());
    for (size_t l = 0; l < topo.num_links(); ++l)
        capacity[l] = topo.link(static_cast<LinkIndex>(l)).capacity;

    OracleSolution best;
    best.path_choice.assign(n, -1);
    bool have_solution = false;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double weight = 0.0;
        std::vector<const PathSet*> sel_paths;
        std::vector<Bps> sel_demands;
        std::vector<size_t> sel_idx;
        for (size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                weight += instance.flows[i].weight;
                sel_paths.push_back(&path_sets[i]);
                sel_demands.push_back(instance.flows[i].demand);
                sel_idx.push_back(i);
            }
        if (have_solution && weight <= best.objective)
            continue;
        std::vector<Bps> used(capacity.size(), 0.0);
        std::vector<int> choice(sel_paths.size(), -1);
        if (!assign_paths(sel_paths, sel_demands, capacity, 0, used, choice))
            continue;
        have_solution = true;
        best.objective = weight;
        best.selected.assign(sel_idx.begin(), sel_idx.end());
        best.path_choice.assign(n, -1);
        for (size_t k = 0; k < sel_idx.size(); ++k)
            best.path_choice[sel_idx[k]] = choice[k];
    }
    return best;
}

OracleSolution solve_local_knapsack(const KnapsackSetInstance& instance) {
    const size_t n = instance.items.size();
    if (n > kOracleMaxFlows)
        throw SimError("solve_local_knapsack: instance exceeds the exhaustive-search guard");
    for (const auto& item : instance.items)
        if (item.paths.size() > kOracleMaxPaths)
            throw SimError("solve_local_knapsack: too many candidate paths");

    OracleSolution best;
    best.path_choice.assign(n, -1);
    std::vector<int> choice(n, -1);
    std::vector<double> used(instance.knapsack_capacity.size(), 0.0);

    // joint enumeration over (subset, assignment) by depth-first product
    std::function<void(size_t, double)> visit = [&](size_t idx, double value) {
        if (idx == n) {
            if (value > best.objective + 1e-12) {
                best.objective = value;
                best.path_choice = choice;
                best.selected.clear();
                for (size_t i = 0; i < n; ++i)
                    if (choice[i] >= 0)
                        best.selected.push_back(static_cast<int>(i));
            }
            return;
        }
        // skip the item first: keeps the lexicographically smallest bitmask
        // among ties (strict improvement required to replace)
        choice[idx] = -1;
        visit(idx + 1, value);
        const auto& item = instance.items[idx];
        for (size_t p = 0; p < item.paths.size(); ++p) {
            bool fits = true;
            for (int k : item.paths[p])
                if (used[static_cast<size_t>(k)] + item.weight >
                    instance.knapsack_capacity[static_cast<size_t>(k)] + kCapSlack) {
                    fits = false;
                    break;
                }
            if (!fits)
                continue;
            for (int k : item.paths[p])
                used[static_cast<size_t>(k)] += item.weight;
            choice[idx] = static_cast<int>(p);
            visit(idx + 1, value + item.value);
            for (int k : item.paths[p])
                used[static_cast<size_t>(k)] -= item.weight;
            choice[idx] = -1;
        }
    };
    visit(0, 0.0);
    return best;
}

bool feasibility(const FlowOutcome& outcome) {
    return outcome.state == FlowState::Completed && outcome.delivered_at != kNoTime &&
           outcome.delivered_at <= outcome.flow.deadline;
}

double achieved_objective(const TinyInstance& instance, const SimResult& result) {
    double total = 0.0;
    for (const auto& f : instance.flows) {
        const auto* o = result.outcome(f.id);
        if (o && feasibility(*o))
            total += f.weight;
    }
    return total;
}

} // namespace impflow
