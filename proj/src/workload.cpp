#include "impflow/workload.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "impflow/textio.hpp"

namespace impflow {

LoadRegime parse_load(const std::string& s) {
    if (s == "light")
        return LoadRegime::Light;
    if (s == "medium")
        return LoadRegime::Medium;
    if (s == "heavy")
        return LoadRegime::Heavy;
    throw SimError("unknown load regime '" + s + "'");
}

const char* to_string(LoadRegime r) {
    switch (r) {
    case LoadRegime::Light: return "light";
    case LoadRegime::Medium: return "medium";
    case LoadRegime::Heavy: return "heavy";
    }
    return "?";
}

namespace {

// flow sizes are whole response units; KB bounds from the load regime
std::pair<int, int> unit_count_range(LoadRegime r) {
    switch (r) {
    case LoadRegime::Light: return {2, 50};
    case LoadRegime::Medium: return {50, 100};
    case LoadRegime::Heavy: return {100, 150};
    }
    return {2, 50};
}

TimeNs draw_deadline(std::mt19937_64& rng, const WorkloadSpec& spec) {
    std::exponential_distribution<double> exp(1.0 / ns_to_s(spec.deadline_mean));
    TimeNs d = s_to_ns(exp(rng));
    return std::max(d, spec.deadline_floor);
}

std::vector<ResponseUnit> draw_units(std::mt19937_64& rng, const WorkloadSpec& spec,
                                     int count) {
    // bimodal importance, high-importance half rounded up, positions shuffled
    int high = (count + 1) / 2;
    if (spec.high_fraction != 0.5)
        high = static_cast<int>(std::ceil(count * spec.high_fraction));
    std::vector<ResponseUnit> units(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        units[static_cast<size_t>(i)].importance =
            i < high ? spec.importance_high : spec.importance_low;
        units[static_cast<size_t>(i)].size_bytes = spec.unit_size;
    }
    std::shuffle(units.begin(), units.end(), rng);
    return units;
}

} // namespace

std::vector<Flow> gen_synthetic(const WorkloadSpec& spec, const Topology& topo) {
    if (spec.deadline_mean <= 0)
        throw SimError("workload: deadline_mean must be positive");
    if (spec.high_fraction < 0.0 || spec.high_fraction > 1.0)
        throw SimError("workload: high_fraction must be in [0,1]");
    if (spec.pattern == TrafficPattern::PartitionAggregate)
        return gen_partition_aggregate(spec, topo);

    if (spec.num_flows <= 0)
        throw SimError("workload: num_flows must be positive for random_pairs");
    std::mt19937_64 rng(spec.seed);
    auto [lo, hi] = unit_count_range(spec.load);
    std::uniform_int_distribution<int> units(lo, hi);
    std::uniform_int_distribution<NodeIndex> server(0, topo.num_servers() - 1);
    std::vector<Flow> flows;
    for (int i = 0; i < spec.num_flows; ++i) {
        Flow f;
        f.id = i;
        f.src = server(rng);
        do {
            f.dst = server(rng);
        } while (f.dst == f.src);
        f.begin = 0;
        f.deadline = draw_deadline(rng, spec);
        f.units = draw_units(rng, spec, units(rng));
        flows.push_back(std::move(f));
    }
    return flows;
}

std::vector<Flow> gen_partition_aggregate(const WorkloadSpec& spec, const Topology& topo) {
    if (topo.num_servers() < 2)
        throw SimError("workload: partition-aggregate needs at least two servers");
    if (spec.deadline_mean <= 0)
        throw SimError("workload: deadline_mean must be positive");
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<NodeIndex> server(0, topo.num_servers() - 1);
    NodeIndex aggregator = server(rng);
    auto [lo, hi] = unit_count_range(spec.load);
    std::uniform_int_distribution<int> units(lo, hi);

    std::vector<Flow> flows;
    FlowId next = 0;
    for (NodeIndex s = 0; s < topo.num_servers(); ++s) {
        if (s == aggregator)
            continue;
        Flow f;
        f.id = next++;
        f.src = s;
        f.dst = aggregator;
        f.begin = 0;
        f.deadline = draw_deadline(rng, spec);
        f.units = draw_units(rng, spec, units(rng));
        flows.push_back(std::move(f));
    }
    return flows;
}

Bps aggregate_demand(const std::vector<Flow>& flows, TimeNs deadline_mean) {
    double bits = 0.0;
    for (const auto& f : flows)
        bits += static_cast<double>(f.size_bytes()) * 8.0;
    return bits / ns_to_s(deadline_mean);
}

TraceData load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SimError("cannot open trace file '" + path + "'");
    return parse_trace(in, path);
}

TraceData parse_trace(std::istream& in, const std::string& name) {
    TraceData data;
    std::map<FlowId, size_t> flow_index;
    std::set<std::string> seen_ranks;
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw SimError(name + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "FLOW") {
            FlowId id;
            NodeIndex src, dst;
            long long begin_us, deadline_us;
            if (!(ss >> id >> src >> dst >> begin_us >> deadline_us))
                fail("malformed FLOW line");
            if (flow_index.count(id))
                fail("duplicate flow id " + std::to_string(id));
            if (src == dst)
                fail("flow source equals destination");
            if (deadline_us <= begin_us)
                fail("flow deadline not after begin time");
            Flow f;
            f.id = id;
            f.src = src;
            f.dst = dst;
            f.begin = begin_us * kMicrosecond;
            f.deadline = deadline_us * kMicrosecond;
            flow_index[id] = data.flows.size();
            data.flows.push_back(std::move(f));
        } else if (tag == "UNIT") {
            FlowId id;
            std::string rank;
            long long size;
            double importance;
            if (!(ss >> id >> rank >> size >> importance))
                fail("malformed UNIT line");
            auto it = flow_index.find(id);
            if (it == flow_index.end())
                fail("UNIT references unknown flow " + std::to_string(id));
            if (size <= 0)
                fail("unit size must be positive");
            if (importance < 0.0)
                fail("unit importance must be non-negative");
            if (rank != "-" && !seen_ranks.insert(rank).second)
                fail("duplicate rank id '" + rank + "'");
            ResponseUnit u;
            u.importance = importance;
            u.size_bytes = size;
            u.rank_id = rank == "-" ? std::string{} : rank;
            data.flows[it->second].units.push_back(std::move(u));
        } else if (tag == "TRUTH") {
            std::string query;
            if (!(ss >> query))
                fail("malformed TRUTH line");
            if (data.truth.queries.count(query))
                fail("duplicate TRUTH query '" + query + "'");
            std::vector<std::string> ranks;
            std::set<std::string> unique;
            std::string r;
            while (ss >> r) {
                if (!unique.insert(r).second)
                    fail("duplicate rank id '" + r + "' in TRUTH list");
                ranks.push_back(r);
            }
            if (ranks.empty())
                fail("empty TRUTH list");
            data.truth.queries[query] = std::move(ranks);
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    for (const auto& f : data.flows)
        if (f.units.empty())
            throw SimError(name + ": flow " + std::to_string(f.id) + " has no units");
    // truth entries without a matching unit lower achievable precision
    for (const auto& [query, ranks] : data.truth.queries)
        for (const auto& r : ranks)
            if (!seen_ranks.count(r))
                std::cerr << "impflow: warning: " << name << ": truth rank '" << r
                          << "' of query '" << query << "' matches no unit\n";
    return data;
}

void save_trace(std::ostream& out, const TraceData& data) {
    for (const auto& f : data.flows) {
        out << "FLOW " << f.id << ' ' << f.src << ' ' << f.dst << ' '
            << f.begin / kMicrosecond << ' ' << f.deadline / kMicrosecond << '\n';
        for (const auto& u : f.units)
            out << "UNIT " << f.id << ' ' << (u.rank_id.empty() ? "-" : u.rank_id) << ' '
                << u.size_bytes << ' ' << fmt_double(u.importance) << '\n';
    }
    for (const auto& [query, ranks] : data.truth.queries) {
        out << "TRUTH " << query;
        for (const auto& r : ranks)
            out << ' ' << r;
        out << '\n';
    }
}

} // namespace impflow
