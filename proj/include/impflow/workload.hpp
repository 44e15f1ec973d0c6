#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "impflow/flowmodel.hpp"
#include "impflow/topology.hpp"

namespace impflow {

enum class LoadRegime { Light, Medium, Heavy };
enum class TrafficPattern { PartitionAggregate, RandomPairs };

LoadRegime parse_load(const std::string& s);
const char* to_string(LoadRegime r);

struct WorkloadSpec {
    LoadRegime load = LoadRegime::Heavy;
    TimeNs deadline_mean = 20 * kMillisecond;
    TimeNs deadline_floor = 5 * kMillisecond;
    std::int64_t unit_size = 1000;
    double importance_high = 10.0;
    double importance_low = 1.0;
    double high_fraction = 0.5;
    TrafficPattern pattern = TrafficPattern::PartitionAggregate;
    int num_flows = 0; // random_pairs only; partition-aggregate uses servers-1
    std::uint64_t seed = 1;
};

// query id -> rank_ids in descending relevance
struct GroundTruth {
    std::map<std::string, std::vector<std::string>> queries;
};

std::vector<Flow> gen_synthetic(const WorkloadSpec& spec, const Topology& topo);
std::vector<Flow> gen_partition_aggregate(const WorkloadSpec& spec, const Topology& topo);

// Total bytes * 8 / deadline mean: the load a workload puts on the fabric.
Bps aggregate_demand(const std::vector<Flow>& flows, TimeNs deadline_mean);

// Line-oriented trace files:
//   FLOW <id> <src> <dst> <begin_us> <deadline_us>
//   UNIT <flow_id> <rank_id> <size_bytes> <importance>
//   TRUTH <query_id> <rank_id>...
struct TraceData {
    std::vector<Flow> flows;
    GroundTruth truth;
};

TraceData load_trace(const std::string& path);
TraceData parse_trace(std::istream& in, const std::string& name);
void save_trace(std::ostream& out, const TraceData& data);

} // namespace impflow
