#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "impflow/engine.hpp"
#include "impflow/metrics.hpp"
#include "impflow/workload.hpp"

namespace impflow {

ProtocolKind parse_protocol(const std::string& s);
const char* to_string(ProtocolKind p);

// Everything a run needs: simulation parameters, workload shape, protocol
// choice, seeds, and output options. Parsed from `key = value` text; every
// field has a default; command-line flags override file values.
struct ScenarioConfig {
    std::string scenario = "default";
    SimConfig sim;
    WorkloadSpec workload;
    std::string trace_path; // when set, the workload comes from this file
    std::vector<std::uint64_t> seeds{1};
    std::vector<int> precision_ks{10, 50, 100};
    PrecisionMode precision_mode = PrecisionMode::Paper;
    std::string out_dir = "out";
    bool emit_trace = false;
    bool sweep_toggle_split = false;
    int oracle_instances = 100;
    int oracle_flows = 8;

    void validate() const;
    // Simulation-affecting keys only, sorted; re-running from this text
    // reproduces the outputs byte for byte.
    void echo(std::ostream& os) const;
};

ScenarioConfig parse_config_text(std::istream& in, const std::string& name);
ScenarioConfig load_config(const std::string& path);
void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value);

} // namespace impflow
