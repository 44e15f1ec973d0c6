#include "impflow/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "impflow/textio.hpp"

namespace impflow {

namespace fs = std::filesystem;

std::vector<Flow> build_workload(const ScenarioConfig& cfg, const Topology& topo,
                                 std::uint64_t seed, GroundTruth* truth) {
    if (!cfg.trace_path.empty()) {
        auto data = load_trace(cfg.trace_path);
        if (truth)
            *truth = data.truth;
        return data.flows;
    }
    WorkloadSpec spec = cfg.workload;
    spec.seed = seed;
    return gen_synthetic(spec, topo);
}

namespace {

void write_scenario_files(const ScenarioConfig& cfg, const ScenarioOutput& out) {
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream f(cfg.out_dir + "/effective.cfg");
        cfg.echo(f);
    }
    {
        std::ofstream f(cfg.out_dir + "/metrics.csv");
        f << "# impflow scenario report\n";
        std::ostringstream echo;
        cfg.echo(echo);
        std::istringstream lines(echo.str());
        std::string line;
        while (std::getline(lines, line))
            f << "# " << line << '\n';
        write_csv_header(f, cfg.precision_ks);
        for (const auto& run : out.runs)
            write_csv_row(f, cfg.scenario, to_string(cfg.sim.protocol),
                          cfg.sim.flow_splitting, run.seed, run.report,
                          cfg.precision_ks);
    }
    {
        std::ofstream f(cfg.out_dir + "/summary.txt");
        f << "scenario: " << cfg.scenario << "\n"
          << "protocol: " << to_string(cfg.sim.protocol) << "\n\n";
        for (const auto& run : out.runs) {
            f << "--- seed " << run.seed << " ---\n";
            write_summary(f, run.report);
            f << '\n';
        }
    }
    bool any_precision = false;
    for (const auto& run : out.runs)
        if (!run.report.precision_at_k.empty())
            any_precision = true;
    if (any_precision) {
        // plot-ready series: x = K, y = precision, one row per (seed, K)
        std::ofstream f(cfg.out_dir + "/precision_series.csv");
        f << "seed,k,precision\n";
        for (const auto& run : out.runs)
            for (const auto& [k, p] : run.report.precision_at_k)
                f << run.seed << ',' << k << ',' << fmt_fixed(p, 6) << '\n';
    }
    if (cfg.emit_trace) {
        for (const auto& run : out.runs) {
            std::ofstream f(cfg.out_dir + "/trace_" + std::to_string(run.seed) + ".txt");
            for (const auto& line : run.result.trace)
                f << line << '\n';
        }
    }
}

} // namespace

ScenarioOutput run_scenario(const ScenarioConfig& cfg, bool write_files) {
    cfg.validate();
    ScenarioOutput out;
    out.config = cfg;
    Topology topo = Topology::bcube(cfg.sim.bcube_n, cfg.sim.bcube_k,
                                    cfg.sim.link_capacity, cfg.sim.link_prop_delay);
    for (std::uint64_t seed : cfg.seeds) {
        GroundTruth truth;
        auto workload = build_workload(cfg, topo, seed, &truth);
        SimConfig sim = cfg.sim;
        sim.seed = seed;
        SeedRun run;
        run.seed = seed;
        run.result = run_simulation(sim, topo, workload);
        run.report = build_report(run.result, truth, cfg.precision_ks, cfg.precision_mode);
        out.runs.push_back(std::move(run));
    }
    if (write_files)
        write_scenario_files(cfg, out);
    return out;
}

void write_sweep_csv(std::ostream& os, const ScenarioConfig& base,
                     const std::vector<SweepRow>& rows) {
    os << "# impflow sweep report\n";
    std::ostringstream echo;
    base.echo(echo);
    std::istringstream lines(echo.str());
    std::string line;
    while (std::getline(lines, line))
        os << "# " << line << '\n';
    os << "load,deadline_ms,protocol,split,seed,flows,flows_met,goodput_bytes,"
          "aggregated_importance,deadline_ratio,deadline_ratio_important,"
          "deadline_ratio_regular,audit_violations\n";
    for (const auto& r : rows) {
        os << to_string(r.load) << ',' << r.deadline_mean / kMillisecond << ','
           << to_string(r.protocol) << ',' << (r.split ? "on" : "off") << ',' << r.seed
           << ',' << r.report.flows_total << ',' << r.report.flows_met << ','
           << r.report.goodput_bytes << ',' << fmt_double(r.report.aggregated_importance)
           << ',' << fmt_fixed(r.report.deadline_ratio_overall, 6) << ',';
        if (r.report.deadline_ratio_important >= 0.0)
            os << fmt_fixed(r.report.deadline_ratio_important, 6);
        os << ',';
        if (r.report.deadline_ratio_regular >= 0.0)
            os << fmt_fixed(r.report.deadline_ratio_regular, 6);
        os << ',' << r.report.audit_violations << '\n';
    }
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, bool write_files) {
    base.validate();
    const LoadRegime loads[] = {LoadRegime::Light, LoadRegime::Medium, LoadRegime::Heavy};
    const TimeNs deadlines[] = {20 * kMillisecond, 30 * kMillisecond, 40 * kMillisecond};
    const ProtocolKind protocols[] = {ProtocolKind::Importance, ProtocolKind::FcfsDeadline,
                                      ProtocolKind::Fairshare};
    std::vector<bool> splits;
    if (base.sweep_toggle_split) {
        splits = {true, false};
    } else {
        splits = {base.sim.flow_splitting};
    }

    Topology topo = Topology::bcube(base.sim.bcube_n, base.sim.bcube_k,
                                    base.sim.link_capacity, base.sim.link_prop_delay);
    std::vector<SweepRow> rows;
    for (LoadRegime load : loads)
        for (TimeNs deadline : deadlines)
            for (ProtocolKind proto : protocols)
                for (bool split : splits)
                    for (std::uint64_t seed : base.seeds) {
                        WorkloadSpec spec = base.workload;
                        spec.load = load;
                        spec.deadline_mean = deadline;
                        spec.seed = seed;
                        auto workload = gen_synthetic(spec, topo);
                        SimConfig sim = base.sim;
                        sim.protocol = proto;
                        sim.flow_splitting = split;
                        sim.seed = seed;
                        auto result = run_simulation(sim, topo, workload);
                        SweepRow row;
                        row.load = load;
                        row.deadline_mean = deadline;
                        row.protocol = proto;
                        row.split = split;
                        row.seed = seed;
                        row.report = build_report(result);
                        rows.push_back(std::move(row));
                    }
    if (write_files) {
        fs::create_directories(base.out_dir);
        std::ofstream f(base.out_dir + "/sweep.csv");
        write_sweep_csv(f, base, rows);
    }
    return rows;
}

TinyScenario gen_tiny_scenario(const Topology& topo, std::uint64_t seed, int num_flows,
                               Bps link_capacity, bool same_pair) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<NodeIndex> server(0, topo.num_servers() - 1);
    std::uniform_real_distribution<double> weight(1.0, 10.0);
    std::uniform_int_distribution<int> divisor_pick(0, 1);
    const int divisor = divisor_pick(rng) == 0 ? 2 : 4;
    // equal demands an integer fraction of the capacity, with slack for the
    // admission-time delay allowance
    const Bps demand = link_capacity / divisor * 0.98;
    const TimeNs deadline = 100 * kMillisecond;

    NodeIndex shared_src = server(rng);
    NodeIndex shared_dst = shared_src;
    while (shared_dst == shared_src)
        shared_dst = server(rng);

    TinyScenario out;
    out.instance.topo = &topo;
    for (int i = 0; i < num_flows; ++i) {
        NodeIndex src = shared_src, dst = shared_dst;
        if (!same_pair) {
            src = server(rng);
            dst = src;
            while (dst == src)
                dst = server(rng);
        }
        Flow f;
        f.id = i;
        f.src = src;
        f.dst = dst;
        f.begin = same_pair ? static_cast<TimeNs>(i) * 200 * kMicrosecond : 0;
        f.deadline = deadline;
        ResponseUnit u;
        u.importance = weight(rng);
        u.size_bytes = static_cast<std::int64_t>(demand * ns_to_s(deadline - f.begin) / 8.0);
        f.units.push_back(u);
        out.flows.push_back(f);
    }
    if (same_pair) {
        // descending importance arrival: FIC-sorted greedy needs no preemption
        std::sort(out.flows.begin(), out.flows.end(), [](const Flow& a, const Flow& b) {
            return a.units[0].importance > b.units[0].importance;
        });
        for (size_t i = 0; i < out.flows.size(); ++i) {
            out.flows[i].id = static_cast<FlowId>(i);
            out.flows[i].begin = static_cast<TimeNs>(i) * 200 * kMicrosecond;
            out.flows[i].units[0].size_bytes = static_cast<std::int64_t>(
                demand * ns_to_s(deadline - out.flows[i].begin) / 8.0);
        }
    }
    for (const auto& f : out.flows) {
        TinyFlow t;
        t.id = f.id;
        t.src = f.src;
        t.dst = f.dst;
        t.demand = minimal_rate(f, f.begin);
        t.weight = f.units[0].importance;
        out.instance.flows.push_back(t);
    }
    return out;
}

void write_oracle_csv(std::ostream& os, const std::vector<OracleRow>& rows) {
    os << "instance_id,oracle,importance_proto,fcfs,fairshare,gap_ratio\n";
    for (const auto& r : rows)
        os << r.instance << ',' << fmt_double(r.oracle) << ','
           << fmt_double(r.importance_proto) << ',' << fmt_double(r.fcfs) << ','
           << fmt_double(r.fairshare) << ',' << fmt_fixed(r.gap_ratio, 6) << '\n';
}

std::vector<OracleRow> run_oracle_compare(const ScenarioConfig& base, bool write_files) {
    base.validate();
    if (base.oracle_flows > kOracleMaxFlows)
        throw SimError("oracle comparison: " + std::to_string(base.oracle_flows) +
                       " flows exceed the exhaustive-search guard of " +
                       std::to_string(kOracleMaxFlows) + "; use a smaller instance");
    if (base.sim.bcube_k + 1 > kOracleMaxPaths)
        throw SimError("oracle comparison: BCube k=" + std::to_string(base.sim.bcube_k) +
                       " yields too many candidate paths; use a smaller topology");

    Topology topo = Topology::bcube(base.sim.bcube_n, base.sim.bcube_k,
                                    base.sim.link_capacity, base.sim.link_prop_delay);
    std::vector<OracleRow> rows;
    for (int i = 0; i < base.oracle_instances; ++i) {
        std::uint64_t seed = base.seeds[0] + static_cast<std::uint64_t>(i);
        auto tiny = gen_tiny_scenario(topo, seed, base.oracle_flows,
                                      base.sim.link_capacity, false);
        OracleRow row;
        row.instance = i;
        row.oracle = solve_global(tiny.instance).objective;
        for (ProtocolKind proto : {ProtocolKind::Importance, ProtocolKind::FcfsDeadline,
                                   ProtocolKind::Fairshare}) {
            SimConfig sim = base.sim;
            sim.protocol = proto;
            sim.seed = seed;
            auto result = run_simulation(sim, topo, tiny.flows);
            double objective = achieved_objective(tiny.instance, result);
            if (proto == ProtocolKind::Importance)
                row.importance_proto = objective;
            else if (proto == ProtocolKind::FcfsDeadline)
                row.fcfs = objective;
            else
                row.fairshare = objective;
        }
        row.gap_ratio = row.oracle > 0.0 ? row.importance_proto / row.oracle : 1.0;
        rows.push_back(row);
    }
    if (write_files) {
        fs::create_directories(base.out_dir);
        std::ofstream f(base.out_dir + "/oracle.csv");
        write_oracle_csv(f, rows);
    }
    return rows;
}

} // namespace impflow
