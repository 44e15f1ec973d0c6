#pragma once

#include <optional>
#include <string>
#include <vector>

#include "impflow/types.hpp"

namespace impflow {

// One semantic result item inside a flow. rank_id links the unit to a
// ground-truth rank list when the workload comes from a trace.
struct ResponseUnit {
    double importance = 0.0;
    std::int64_t size_bytes = 0;
    std::string rank_id; // empty when the unit carries no rank
};

// Flow five-tuple plus its response units. Importance-split children keep a
// reference to their parent and a class label (0 = important, 1 = regular).
struct Flow {
    FlowId id = 0;
    NodeIndex src = kNoNode;
    NodeIndex dst = kNoNode;
    TimeNs begin = 0;
    TimeNs deadline = 0; // absolute
    std::vector<ResponseUnit> units;
    FlowId parent = -1;
    int split_class = -1;

    std::int64_t size_bytes() const;
    double avg_importance() const;
    double total_importance() const;
};

double average_importance(const std::vector<ResponseUnit>& units);

// Flow importance contribution (score per byte*second): I / (RS * RT).
double fic(double avg_importance, double remaining_bytes, double remaining_seconds);

// Lowest rate that still delivers remaining_bytes by the deadline.
Bps minimal_rate(std::int64_t remaining_bytes, TimeNs deadline, TimeNs now);
Bps minimal_rate(const Flow& flow, TimeNs now);

// Exact 1-D k-means on the unit importances (threshold search for k=2,
// interval dynamic program otherwise). Returns per-cluster unit indices in
// the flow's original unit order, clusters sorted by descending mean.
std::vector<std::vector<int>> cluster_by_importance(const std::vector<double>& values,
                                                    int clusters);

// Partitions the flow's units into `clusters` child flows sharing the
// parent's endpoints and deadline, ordered by descending mean importance.
std::vector<Flow> split_flow(const Flow& flow, int clusters);

} // namespace impflow
