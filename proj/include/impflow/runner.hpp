#pragma once

#include <string>
#include <vector>

#include "impflow/config.hpp"
#include "impflow/oracle.hpp"

namespace impflow {

struct SeedRun {
    std::uint64_t seed = 0;
    MetricsReport report;
    SimResult result;
};

struct ScenarioOutput {
    ScenarioConfig config;
    std::vector<SeedRun> runs;
};

// Workload for one seed, honoring the trace file when configured.
std::vector<Flow> build_workload(const ScenarioConfig& cfg, const Topology& topo,
                                 std::uint64_t seed, GroundTruth* truth);

// Executes the scenario for every configured seed. When write_files is set,
// emits metrics.csv, summary.txt, effective.cfg and per-seed traces under
// cfg.out_dir.
ScenarioOutput run_scenario(const ScenarioConfig& cfg, bool write_files);

struct SweepRow {
    LoadRegime load;
    TimeNs deadline_mean;
    ProtocolKind protocol;
    bool split;
    std::uint64_t seed;
    MetricsReport report;
};

// Full grid {light,medium,heavy} x {20,30,40 ms} x the three protocols,
// every configured seed; consolidated into sweep.csv when writing files.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, bool write_files);

// Seeded tiny instance on the configured topology. When same_pair is set all
// flows share one server pair and demands equal an integer fraction of the
// link capacity, which makes FIC-sorted greedy optimal.
struct TinyScenario {
    TinyInstance instance;
    std::vector<Flow> flows;
};
TinyScenario gen_tiny_scenario(const Topology& topo, std::uint64_t seed, int num_flows,
                               Bps link_capacity, bool same_pair);

struct OracleRow {
    int instance = 0;
    double oracle = 0.0;
    double importance_proto = 0.0;
    double fcfs = 0.0;
    double fairshare = 0.0;
    double gap_ratio = 1.0;
};

std::vector<OracleRow> run_oracle_compare(const ScenarioConfig& base, bool write_files);

void write_sweep_csv(std::ostream& os, const ScenarioConfig& base,
                     const std::vector<SweepRow>& rows);
void write_oracle_csv(std::ostream& os, const std::vector<OracleRow>& rows);

} // namespace impflow
