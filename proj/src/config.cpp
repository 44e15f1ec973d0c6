#include "impflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "impflow/textio.hpp"

namespace impflow {

ProtocolKind parse_protocol(const std::string& s) {
    if (s == "importance")
        return ProtocolKind::Importance;
    if (s == "fcfs_deadline")
        return ProtocolKind::FcfsDeadline;
    if (s == "fairshare")
        return ProtocolKind::Fairshare;
    throw SimError("unknown protocol '" + s + "'");
}

const char* to_string(ProtocolKind p) {
    switch (p) {
    case ProtocolKind::Importance: return "importance";
    case ProtocolKind::FcfsDeadline: return "fcfs_deadline";
    case ProtocolKind::Fairshare: return "fairshare";
    }
    return "?";
}

namespace {

long long to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long long out = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw SimError("config field '" + key + "': not an integer: '" + v + "'");
    }
}

double to_real(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw SimError("config field '" + key + "': not a number: '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1")
        return true;
    if (v == "off" || v == "false" || v == "0")
        return false;
    throw SimError("config field '" + key + "': expected on/off, got '" + v + "'");
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    return s.substr(b, e - b + 1);
}

} // namespace

void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "scenario") {
        cfg.scenario = value;
    } else if (key == "topology.n") {
        cfg.sim.bcube_n = static_cast<int>(to_int(key, value));
    } else if (key == "topology.k") {
        cfg.sim.bcube_k = static_cast<int>(to_int(key, value));
    } else if (key == "link_capacity_gbps") {
        cfg.sim.link_capacity = to_real(key, value) * 1e9;
    } else if (key == "link_prop_delay_us") {
        cfg.sim.link_prop_delay = static_cast<TimeNs>(to_real(key, value) * 1e3);
    } else if (key == "processing_delay_us") {
        cfg.sim.processing_delay = static_cast<TimeNs>(to_real(key, value) * 1e3);
    } else if (key == "protocol") {
        cfg.sim.protocol = parse_protocol(value);
    } else if (key == "flow_splitting") {
        cfg.sim.flow_splitting = to_bool(key, value);
    } else if (key == "split_clusters") {
        cfg.sim.split_clusters = static_cast<int>(to_int(key, value));
    } else if (key == "audit") {
        cfg.sim.audit = to_bool(key, value);
    } else if (key == "horizon_slack_ms") {
        cfg.sim.horizon_slack = static_cast<TimeNs>(to_real(key, value) * kMillisecond);
    } else if (key == "retry_spacing_ms") {
        cfg.sim.retry_spacing = static_cast<TimeNs>(to_real(key, value) * kMillisecond);
    } else if (key == "fairshare.rto_ms") {
        cfg.sim.fairshare_rto = static_cast<TimeNs>(to_real(key, value) * kMillisecond);
    } else if (key == "fairshare.epoch_ms") {
        cfg.sim.fairshare_epoch = static_cast<TimeNs>(to_real(key, value) * kMillisecond);
    } else if (key == "fairshare.initial_mbps") {
        cfg.sim.fairshare_initial_rate = to_real(key, value) * 1e6;
    } else if (key == "fairshare.increase_mbps") {
        cfg.sim.fairshare_additive_increase = to_real(key, value) * 1e6;
    } else if (key == "workload.pattern") {
        if (value == "partition_aggregate")
            cfg.workload.pattern = TrafficPattern::PartitionAggregate;
        else if (value == "random_pairs")
            cfg.workload.pattern = TrafficPattern::RandomPairs;
        else
            throw SimError("config field 'workload.pattern': unknown value '" + value + "'");
    } else if (key == "workload.load") {
        cfg.workload.load = parse_load(value);
    } else if (key == "workload.deadline_mean_ms") {
        double ms = to_real(key, value);
        cfg.workload.deadline_mean = static_cast<TimeNs>(ms * kMillisecond);
        if (ms <= 0)
            throw SimError("config field 'workload.deadline_mean_ms': must be positive");
    } else if (key == "workload.deadline_floor_ms") {
        cfg.workload.deadline_floor = static_cast<TimeNs>(to_real(key, value) * kMillisecond);
    } else if (key == "workload.unit_size") {
        cfg.workload.unit_size = to_int(key, value);
    } else if (key == "workload.num_flows") {
        cfg.workload.num_flows = static_cast<int>(to_int(key, value));
    } else if (key == "workload.importance_high") {
        cfg.workload.importance_high = to_real(key, value);
    } else if (key == "workload.importance_low") {
        cfg.workload.importance_low = to_real(key, value);
    } else if (key == "workload.high_fraction") {
        cfg.workload.high_fraction = to_real(key, value);
    } else if (key == "workload.trace_file") {
        cfg.trace_path = value;
    } else if (key == "seed") {
        cfg.seeds = {static_cast<std::uint64_t>(to_int(key, value))};
    } else if (key == "seeds") {
        cfg.seeds.clear();
        std::istringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ','))
            cfg.seeds.push_back(static_cast<std::uint64_t>(to_int(key, trim(tok))));
    } else if (key == "precision.ks") {
        cfg.precision_ks.clear();
        std::istringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ','))
            cfg.precision_ks.push_back(static_cast<int>(to_int(key, trim(tok))));
    } else if (key == "precision.mode") {
        if (value == "paper")
            cfg.precision_mode = PrecisionMode::Paper;
        else if (value == "conventional")
            cfg.precision_mode = PrecisionMode::Conventional;
        else
            throw SimError("config field 'precision.mode': unknown value '" + value + "'");
    } else if (key == "sweep.toggle_split") {
        cfg.sweep_toggle_split = to_bool(key, value);
    } else if (key == "oracle.instances") {
        cfg.oracle_instances = static_cast<int>(to_int(key, value));
    } else if (key == "oracle.flows") {
        cfg.oracle_flows = static_cast<int>(to_int(key, value));
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "trace") {
        cfg.emit_trace = to_bool(key, value);
    } else {
        throw SimError("unknown config field '" + key + "'");
    }
}

ScenarioConfig parse_config_text(std::istream& in, const std::string& name) {
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw SimError(name + ":" + std::to_string(lineno) +
                           ": expected 'key = value', got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        try {
            apply_override(cfg, key, value);
        } catch (const SimError& e) {
            throw SimError(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SimError("cannot open config file '" + path + "'");
    return parse_config_text(in, path);
}

void ScenarioConfig::validate() const {
    if (sim.bcube_n < 2)
        throw SimError("config field 'topology.n': must be >= 2");
    if (sim.bcube_k < 0)
        throw SimError("config field 'topology.k': must be >= 0");
    if (sim.link_capacity <= 0)
        throw SimError("config field 'link_capacity_gbps': must be positive");
    if (sim.link_prop_delay < 0 || sim.processing_delay < 0)
        throw SimError("config field 'link_prop_delay_us'/'processing_delay_us': must be >= 0");
    if (sim.split_clusters < 1)
        throw SimError("config field 'split_clusters': must be >= 1");
    if (workload.deadline_mean <= 0)
        throw SimError("config field 'workload.deadline_mean_ms': must be positive");
    if (workload.high_fraction < 0.0 || workload.high_fraction > 1.0)
        throw SimError("config field 'workload.high_fraction': must be in [0,1]");
    if (workload.unit_size <= 0)
        throw SimError("config field 'workload.unit_size': must be positive");
    if (seeds.empty())
        throw SimError("config field 'seeds': must not be empty");
    for (int k : precision_ks)
        if (k < 1)
            throw SimError("config field 'precision.ks': entries must be >= 1");
    if (oracle_instances < 1)
        throw SimError("config field 'oracle.instances': must be >= 1");
    if (oracle_flows < 1)
        throw SimError("config field 'oracle.flows': must be >= 1");
}

void ScenarioConfig::echo(std::ostream& os) const {
    std::map<std::string, std::string> kv;
    kv["scenario"] = scenario;
    kv["topology.n"] = std::to_string(sim.bcube_n);
    kv["topology.k"] = std::to_string(sim.bcube_k);
    kv["link_capacity_gbps"] = fmt_double(sim.link_capacity / 1e9);
    kv["link_prop_delay_us"] = fmt_double(static_cast<double>(sim.link_prop_delay) / 1e3);
    kv["processing_delay_us"] = fmt_double(static_cast<double>(sim.processing_delay) / 1e3);
    kv["protocol"] = to_string(sim.protocol);
    kv["flow_splitting"] = sim.flow_splitting ? "on" : "off";
    kv["split_clusters"] = std::to_string(sim.split_clusters);
    kv["audit"] = sim.audit ? "on" : "off";
    kv["horizon_slack_ms"] =
        fmt_double(static_cast<double>(sim.horizon_slack) / kMillisecond);
    kv["retry_spacing_ms"] =
        fmt_double(static_cast<double>(sim.retry_spacing) / kMillisecond);
    kv["fairshare.rto_ms"] = fmt_double(static_cast<double>(sim.fairshare_rto) / kMillisecond);
    kv["fairshare.epoch_ms"] =
        fmt_double(static_cast<double>(sim.fairshare_epoch) / kMillisecond);
    kv["fairshare.initial_mbps"] = fmt_double(sim.fairshare_initial_rate / 1e6);
    kv["fairshare.increase_mbps"] = fmt_double(sim.fairshare_additive_increase / 1e6);
    kv["workload.pattern"] = workload.pattern == TrafficPattern::PartitionAggregate
                                 ? "partition_aggregate"
                                 : "random_pairs";
    kv["workload.load"] = to_string(workload.load);
    kv["workload.deadline_mean_ms"] =
        fmt_double(static_cast<double>(workload.deadline_mean) / kMillisecond);
    kv["workload.deadline_floor_ms"] =
        fmt_double(static_cast<double>(workload.deadline_floor) / kMillisecond);
    kv["workload.unit_size"] = std::to_string(workload.unit_size);
    kv["workload.num_flows"] = std::to_string(workload.num_flows);
    kv["workload.importance_high"] = fmt_double(workload.importance_high);
    kv["workload.importance_low"] = fmt_double(workload.importance_low);
    kv["workload.high_fraction"] = fmt_double(workload.high_fraction);
    if (!trace_path.empty())
        kv["workload.trace_file"] = trace_path;
    {
        std::string s;
        for (auto v : seeds)
            s += (s.empty() ? "" : ",") + std::to_string(v);
        kv["seeds"] = s;
    }
    {
        std::string s;
        for (int k : precision_ks)
            s += (s.empty() ? "" : ",") + std::to_string(k);
        kv["precision.ks"] = s;
    }
    kv["precision.mode"] = precision_mode == PrecisionMode::Paper ? "paper" : "conventional";
    kv["sweep.toggle_split"] = sweep_toggle_split ? "on" : "off";
    kv["oracle.instances"] = std::to_string(oracle_instances);
    kv["oracle.flows"] = std::to_string(oracle_flows);
    for (const auto& [k, v] : kv)
        os << k << " = " << v << '\n';
}

} // namespace impflow
