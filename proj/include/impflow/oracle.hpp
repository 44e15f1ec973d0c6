#pragma once

#include <vector>

#include "impflow/engine.hpp"
#include "impflow/topology.hpp"

namespace impflow {

// Exhaustive-search guard: instances past these bounds are refused.
constexpr int kOracleMaxFlows = 10;
constexpr int kOracleMaxPaths = 4;

// A single-response-unit flow reduced to (demand, weight) over its
// candidate disjoint paths.
struct TinyFlow {
    FlowId id = 0;
    NodeIndex src = kNoNode;
    NodeIndex dst = kNoNode;
    Bps demand = 0.0;
    double weight = 0.0;
};

struct TinyInstance {
    const Topology* topo = nullptr;
    std::vector<TinyFlow> flows;
};

// Multiple-knapsack view: placing an item on a path consumes its weight on
// every knapsack (link) of that path.
struct KnapsackItem {
    double value = 0.0;
    double weight = 0.0;
    std::vector<std::vector<int>> paths; // candidate paths as knapsack id lists
};

struct KnapsackSetInstance {
    std::vector<double> knapsack_capacity;
    std::vector<KnapsackItem> items;
};

struct OracleSolution {
    double objective = 0.0;
    std::vector<int> selected;        // indices into the instance's flow/item list
    std::vector<int> path_choice;     // -1 for unselected entries
};

// Maximum-weight subset routable on single paths under link capacities,
// by enumeration over subsets (ascending bitmask = deterministic tie-break)
// and path assignments.
OracleSolution solve_global(const TinyInstance& instance);

OracleSolution solve_local_knapsack(const KnapsackSetInstance& instance);

// Closed-deadline feasibility: the flow counts iff it was fully delivered at
// or before its deadline.
bool feasibility(const FlowOutcome& outcome);

// Sum of weights of tiny flows the simulation delivered on time.
double achieved_objective(const TinyInstance& instance, const SimResult& result);

} // namespace impflow
