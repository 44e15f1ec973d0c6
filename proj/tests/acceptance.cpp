// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria pin the worked rate-split numbers, the ranked-unit
// bottleneck scenario, the sweep-wide capacity audit, oracle dominance,
// protocol ordering at heavy load, workload demand calibration, deadline
// ratio separation, precision@K ordering, byte determinism, and exact 1-D
// clustering.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "impflow/metrics.hpp"
#include "impflow/oracle.hpp"
#include "impflow/protocol.hpp"
#include "impflow/runner.hpp"
#include "impflow/textio.hpp"

using namespace impflow;

namespace {

struct Check {
    bool ok = true;
    std::string detail;
    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty())
                detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty())
            detail += "; ";
        detail += what;
    }
};

Flow ranked_flow(FlowId id, NodeIndex src, NodeIndex dst, TimeNs begin, TimeNs deadline,
                 const std::vector<int>& ranks) {
    Flow f;
    f.id = id;
    f.src = src;
    f.dst = dst;
    f.begin = begin;
    f.deadline = deadline;
    for (int r : ranks)
        f.units.push_back({20.0 - r, 1000, "r" + std::to_string(r)});
    return f;
}

std::set<int> delivered_ranks(const SimResult& result) {
    std::set<int> out;
    for (const auto& o : result.outcomes) {
        if (!o.met_deadline)
            continue;
        for (const auto& u : o.flow.units)
            if (!u.rank_id.empty())
                out.insert(std::stoi(u.rank_id.substr(1)));
    }
    return out;
}

// --- criterion 1 ---
Check worked_example() {
    Check c;
    auto req = proportional_requests(120e3, {180e3, 220e3});
    c.expect(req.size() == 2 && req[0] == 54e3 && req[1] == 66e3,
             "initial requests != {54,66} kbps");
    auto fin = final_rates(120e3, {60e3, 90e3});
    c.expect(fin.size() == 2 && fin[0] == 48e3 && fin[1] == 72e3,
             "final rates != {48,72} kbps");
    c.expect(req[0] + req[1] == 120e3, "requests do not sum to the demand");
    c.expect(fin[0] + fin[1] == 120e3, "final rates do not sum to the demand");
    return c;
}

// --- criterion 2 ---
Check figure_one_scenario() {
    Check c;
    auto topo = Topology::bcube(2, 0, 10e6);
    SimConfig cfg;
    cfg.bcube_n = 2;
    cfg.bcube_k = 0;
    cfg.link_capacity = 10e6;
    cfg.flow_splitting = true;

    auto build = [&](bool top_flow_last) {
        std::vector<Flow> flows;
        TimeNs d = 10 * kMillisecond;
        TimeNs late = top_flow_last ? 50 * kMicrosecond : 0;
        flows.push_back(ranked_flow(1, 0, 1, late, d, {1, 2, 3, 4}));
        flows.push_back(ranked_flow(2, 0, 1, 0, d, {5, 6, 7, 8}));
        flows.push_back(ranked_flow(3, 0, 1, 0, d, {9, 10, 11, 12}));
        flows.push_back(ranked_flow(4, 0, 1, 0, d, {13, 14, 15, 16}));
        return flows;
    };
    std::set<int> top12;
    for (int r = 1; r <= 12; ++r)
        top12.insert(r);

    // the four flows hit the bottleneck at the same time
    cfg.protocol = ProtocolKind::Importance;
    auto result_imp = run_simulation(cfg, topo, build(false));
    auto got_imp = delivered_ranks(result_imp);
    c.expect(got_imp == top12, "importance protocol delivered set != ranks 1..12");
    c.expect(result_imp.audit_violations == 0, "audit violations");

    cfg.protocol = ProtocolKind::FcfsDeadline;
    auto result = run_simulation(cfg, topo, build(true));
    auto got = delivered_ranks(result);
    for (int r = 1; r <= 4; ++r)
        c.expect(!got.count(r), "fcfs delivered top-4 rank " + std::to_string(r));
    std::set<int> rest;
    for (int r = 5; r <= 16; ++r)
        rest.insert(r);
    c.expect(got == rest, "fcfs delivered set != ranks 5..16");
    return c;
}

// --- criterion 3 ---
Check sweep_capacity_audit() {
    Check c;
    ScenarioConfig base;
    base.seeds = {1, 2, 3, 4, 5};
    base.sim.audit = true;
    auto rows = run_sweep(base, false);
    c.expect(rows.size() == 135, "expected 135 sweep rows, got " +
                                     std::to_string(rows.size()));
    std::uint64_t violations = 0;
    for (const auto& r : rows)
        violations += r.report.audit_violations;
    c.expect(violations == 0,
             "capacity/deadline audit violations: " + std::to_string(violations));
    return c;
}

// --- criterion 4 ---
Check oracle_dominance() {
    Check c;
    auto topo = Topology::bcube(2, 1, 1e9);
    SimConfig cfg;
    cfg.bcube_n = 2;
    cfg.bcube_k = 1;
    cfg.protocol = ProtocolKind::Importance;

    int dominated = 0, matched = 0, match_checked = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto tiny = gen_tiny_scenario(topo, seed, 8, 1e9, false);
        double best = solve_global(tiny.instance).objective;
        cfg.seed = seed;
        auto result = run_simulation(cfg, topo, tiny.flows);
        double got = achieved_objective(tiny.instance, result);
        if (got <= best + 1e-9 && got >= 0.0)
            ++dominated;
        else
            c.note("seed " + std::to_string(seed) + ": protocol " + fmt_double(got) +
                   " > oracle " + fmt_double(best));
    }
    c.expect(dominated == 100, "oracle dominance failed on " +
                                   std::to_string(100 - dominated) + " instances");

    // conflict-free family: one server pair, equal demands, descending-FIC
    // arrivals; greedy equals the optimum, and the protocol must reach it
    for (std::uint64_t seed = 201; seed <= 230; ++seed) {
        auto tiny = gen_tiny_scenario(topo, seed, 6, 1e9, true);
        double best = solve_global(tiny.instance).objective;
        cfg.seed = seed;
        auto result = run_simulation(cfg, topo, tiny.flows);
        double got = achieved_objective(tiny.instance, result);
        ++match_checked;
        if (std::fabs(got - best) <= 1e-9)
            ++matched;
        else
            c.note("seed " + std::to_string(seed) + ": protocol " + fmt_double(got) +
                   " vs oracle " + fmt_double(best));
    }
    c.expect(matched == match_checked,
             "protocol missed the optimum on " +
                 std::to_string(match_checked - matched) + " conflict-free instances");
    return c;
}

struct HeavyCell {
    std::vector<MetricsReport> importance, fcfs, fairshare;
};

HeavyCell run_heavy_cell(int seeds) {
    HeavyCell cell;
    Topology topo = Topology::bcube(5, 2);
    for (int s = 1; s <= seeds; ++s) {
        WorkloadSpec spec;
        spec.load = LoadRegime::Heavy;
        spec.deadline_mean = 20 * kMillisecond;
        spec.seed = static_cast<std::uint64_t>(s);
        auto workload = gen_partition_aggregate(spec, topo);
        for (auto proto : {ProtocolKind::Importance, ProtocolKind::FcfsDeadline,
                           ProtocolKind::Fairshare}) {
            SimConfig cfg;
            cfg.protocol = proto;
            cfg.seed = static_cast<std::uint64_t>(s);
            auto result = run_simulation(cfg, topo, workload);
            auto report = build_report(result);
            if (proto == ProtocolKind::Importance)
                cell.importance.push_back(report);
            else if (proto == ProtocolKind::FcfsDeadline)
                cell.fcfs.push_back(report);
            else
                cell.fairshare.push_back(report);
        }
    }
    return cell;
}

// --- criteria 5 and 7 share the heavy-load cell ---
Check directional_ordering(const HeavyCell& cell) {
    Check c;
    auto minmax = [](const std::vector<MetricsReport>& v) {
        double lo = 1e300, hi = -1e300, sum = 0.0;
        for (const auto& r : v) {
            lo = std::min(lo, r.aggregated_importance);
            hi = std::max(hi, r.aggregated_importance);
            sum += r.aggregated_importance;
        }
        return std::tuple<double, double, double>{lo, hi, sum / v.size()};
    };
    auto [ilo, ihi, imean] = minmax(cell.importance);
    auto [flo, fhi, fmean] = minmax(cell.fcfs);
    auto [slo, shi, smean] = minmax(cell.fairshare);
    c.expect(ilo > fhi, "importance range overlaps fcfs: min " + fmt_double(ilo) +
                            " vs max " + fmt_double(fhi));
    c.expect(flo > shi, "fcfs range overlaps fairshare: min " + fmt_double(flo) +
                            " vs max " + fmt_double(shi));
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "measured importance/fcfs %.2fx, importance/fairshare %.2fx "
                  "(reference points 3.0x/4.64x/1.9x)",
                  imean / fmean, smean > 0 ? imean / smean : 0.0);
    c.note(buf);
    return c;
}

// --- criterion 6 ---
Check demand_sanity() {
    Check c;
    Topology topo = Topology::bcube(5, 2);
    double mean = 0.0;
    const int seeds = 100;
    for (int s = 1; s <= seeds; ++s) {
        WorkloadSpec spec;
        spec.load = LoadRegime::Light;
        spec.deadline_mean = 30 * kMillisecond;
        spec.seed = static_cast<std::uint64_t>(s);
        mean += aggregate_demand(gen_partition_aggregate(spec, topo), spec.deadline_mean);
    }
    mean /= seeds;
    c.expect(mean > 0.86e9 * 0.95 && mean < 0.86e9 * 1.05,
             "mean aggregate demand " + fmt_double(mean / 1e9) + " Gbps outside 0.86 +/- 5%");
    c.note("mean demand " + fmt_fixed(mean / 1e9, 4) + " Gbps");
    return c;
}

// --- criterion 7 ---
Check deadline_ratio_separation(const HeavyCell& cell) {
    Check c;
    auto mean_ratio = [](const std::vector<MetricsReport>& v, bool important) {
        double sum = 0.0;
        for (const auto& r : v)
            sum += important ? r.deadline_ratio_important : r.deadline_ratio_regular;
        return sum / v.size();
    };
    double imp_i = mean_ratio(cell.importance, true);
    double imp_r = mean_ratio(cell.importance, false);
    double fcfs_i = mean_ratio(cell.fcfs, true);
    double fair_i = mean_ratio(cell.fairshare, true);
    c.expect(imp_i > imp_r, "important-children ratio not above regular-children ratio");
    c.expect(imp_i > fcfs_i, "importance protocol not above fcfs for important children");
    c.expect(imp_i > fair_i, "importance protocol not above fairshare for important children");
    c.note("important ratio " + fmt_fixed(imp_i, 3) + " vs regular " + fmt_fixed(imp_r, 3) +
           ", fcfs " + fmt_fixed(fcfs_i, 3) + ", fairshare " + fmt_fixed(fair_i, 3));
    return c;
}

// --- criterion 8 ---
Check precision_ordering() {
    Check c;
    // 120 globally ranked units across twelve flows into one aggregator; the
    // fabric can carry only the top flow's two children by the deadline, so
    // an importance-aware schedule delivers a subset of every tested top-K
    const int kUnits = 120;
    TraceData data;
    int rank = 1;
    FlowId id = 0;
    for (int batch = 0; batch < 4; ++batch)
        for (NodeIndex src = 1; src <= 3; ++src) {
            Flow f;
            f.id = id++;
            f.src = src;
            f.dst = 0;
            f.begin = 0;
            f.deadline = 20 * kMillisecond;
            for (int u = 0; u < kUnits / 12; ++u) {
                // importance decays with global rank
                double imp = (kUnits - rank + 1) / 12.0;
                f.units.push_back({imp, 1000, "r" + std::to_string(rank)});
                ++rank;
            }
            data.flows.push_back(std::move(f));
        }
    std::vector<std::string> top;
    for (int r = 1; r <= kUnits; ++r)
        top.push_back("r" + std::to_string(r));
    data.truth.queries["q"] = top;

    auto dir = std::filesystem::temp_directory_path() / "impflow_acceptance";
    std::filesystem::create_directories(dir);
    auto path = dir / "precision_trace.txt";
    {
        std::ofstream f(path);
        save_trace(f, data);
    }
    auto loaded = load_trace(path.string());

    auto topo = Topology::bcube(2, 1, 2.4e6);
    std::map<ProtocolKind, std::map<int, double>> precision;
    for (auto proto : {ProtocolKind::Importance, ProtocolKind::FcfsDeadline,
                       ProtocolKind::Fairshare}) {
        SimConfig cfg;
        cfg.bcube_n = 2;
        cfg.bcube_k = 1;
        cfg.link_capacity = 2.4e6;
        cfg.protocol = proto;
        cfg.seed = 3;
        auto result = run_simulation(cfg, topo, loaded.flows);
        auto received = received_rank_ids(result);
        for (int k : {10, 50, 100})
            precision[proto][k] = precision_at_k(received, loaded.truth, k);
    }
    for (int k : {10, 50, 100}) {
        double imp = precision[ProtocolKind::Importance][k];
        double fcfs = precision[ProtocolKind::FcfsDeadline][k];
        double fair = precision[ProtocolKind::Fairshare][k];
        c.expect(imp >= fcfs && imp >= fair,
                 "importance not ahead at K=" + std::to_string(k) + " (" +
                     fmt_fixed(imp, 3) + " vs " + fmt_fixed(fcfs, 3) + "/" +
                     fmt_fixed(fair, 3) + ")");
        for (double v : {imp, fcfs, fair})
            c.expect(v >= 0.0 && v <= 1.0, "precision outside [0,1]");
        if (k == 100)
            c.note("p@100: importance " + fmt_fixed(imp, 3) + ", fcfs " +
                   fmt_fixed(fcfs, 3) + ", fairshare " + fmt_fixed(fair, 3));
    }
    return c;
}

// --- criterion 9 ---
Check determinism() {
    Check c;
    auto dir = std::filesystem::temp_directory_path() / "impflow_acceptance";
    std::filesystem::create_directories(dir);
    auto read_file = [](const std::filesystem::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    ScenarioConfig cfg;
    cfg.scenario = "determinism";
    cfg.sim.bcube_n = 2;
    cfg.sim.bcube_k = 1;
    cfg.workload.load = LoadRegime::Light;
    cfg.workload.num_flows = 12;
    cfg.workload.pattern = TrafficPattern::RandomPairs;
    cfg.seeds = {42};
    cfg.emit_trace = true;

    ScenarioConfig a = cfg, b = cfg;
    a.out_dir = (dir / "runA").string();
    b.out_dir = (dir / "runB").string();
    run_scenario(a, true);
    run_scenario(b, true);
    for (const char* name : {"metrics.csv", "summary.txt", "effective.cfg", "trace_42.txt"}) {
        auto fa = read_file(dir / "runA" / name);
        auto fb = read_file(dir / "runB" / name);
        c.expect(!fa.empty(), std::string(name) + " missing or empty");
        c.expect(fa == fb, std::string(name) + " differs between identical runs");
    }
    // re-running from the echoed effective config reproduces the outputs
    ScenarioConfig echoed = load_config((dir / "runA" / "effective.cfg").string());
    echoed.emit_trace = true;
    echoed.out_dir = (dir / "runC").string();
    run_scenario(echoed, true);
    for (const char* name : {"metrics.csv", "summary.txt", "trace_42.txt"}) {
        auto fa = read_file(dir / "runA" / name);
        auto fc = read_file(dir / "runC" / name);
        c.expect(fa == fc, std::string(name) + " differs when rerun from the echo");
    }
    return c;
}

// --- criterion 10 ---
Check kmeans_exactness() {
    Check c;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(2, 150);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    int matched = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        int n = count(rng);
        Flow f;
        f.id = 1;
        f.src = 0;
        f.dst = 1;
        f.begin = 0;
        f.deadline = kMillisecond;
        std::vector<double> values;
        for (int i = 0; i < n; ++i) {
            double v = coin(rng) < 0.5 ? 10.0 : 1.0;
            values.push_back(v);
            f.units.push_back({v, 1000, {}});
        }
        auto children = split_flow(f, 2);

        // independent threshold scan over the sorted values
        std::vector<double> sorted = values;
        std::stable_sort(sorted.begin(), sorted.end());
        auto sse_of = [&](size_t from, size_t to) {
            double mean = 0.0;
            for (size_t i = from; i < to; ++i)
                mean += sorted[i];
            mean /= static_cast<double>(to - from);
            double s = 0.0;
            for (size_t i = from; i < to; ++i)
                s += (sorted[i] - mean) * (sorted[i] - mean);
            return s;
        };
        double best = 1e300;
        size_t best_t = 1;
        auto balance = [&](size_t t2) {
            return std::llabs(static_cast<long long>(n) - 2 * static_cast<long long>(t2));
        };
        for (size_t t2 = 1; t2 < static_cast<size_t>(n); ++t2) {
            double cost = sse_of(0, t2) + sse_of(t2, static_cast<size_t>(n));
            if (cost < best - 1e-12 ||
                (cost < best + 1e-12 && balance(t2) < balance(best_t))) {
                best = std::min(best, cost);
                best_t = t2;
            }
        }
        std::multiset<double> oracle_low(sorted.begin(), sorted.begin() + best_t);
        std::multiset<double> oracle_high(sorted.begin() + best_t, sorted.end());
        std::multiset<double> got_first, got_second;
        for (const auto& u : children[0].units)
            got_first.insert(u.importance);
        for (const auto& u : children[1].units)
            got_second.insert(u.importance);
        bool same = (got_first == oracle_high && got_second == oracle_low) ||
                    (got_first == oracle_low && got_second == oracle_high);
        if (same)
            ++matched;
    }
    c.expect(matched == trials, std::to_string(trials - matched) + " of " +
                                    std::to_string(trials) + " splits differ");
    c.note(std::to_string(matched) + "/" + std::to_string(trials) + " exact");
    return c;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1)
        only = std::atoi(argv[1]);

    HeavyCell cell;
    bool cell_ready = false;
    auto ensure_cell = [&] {
        if (!cell_ready) {
            cell = run_heavy_cell(10);
            cell_ready = true;
        }
    };

    std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"worked rate-split example exact", worked_example},
        {"ranked-unit bottleneck scenario", figure_one_scenario},
        {"sweep-wide capacity and deadline audit", sweep_capacity_audit},
        {"oracle dominance on tiny instances", oracle_dominance},
        {"aggregated-importance ordering at heavy load",
         [&] { ensure_cell(); return directional_ordering(cell); }},
        {"partition-aggregate demand calibration", demand_sanity},
        {"deadline-ratio separation for important children",
         [&] { ensure_cell(); return deadline_ratio_separation(cell); }},
        {"precision@K ordering on a ranked trace", precision_ordering},
        {"byte-identical reruns", determinism},
        {"exact 1-D two-means splitting", kmeans_exactness},
    };

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        int number = static_cast<int>(i) + 1;
        if (only && number != only)
            continue;
        auto start = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.note(std::string("exception: ") + e.what());
        }
        auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", c.ok ? "PASS" : "FAIL",
                    number, criteria[i].first.c_str(), secs.count(),
                    c.detail.empty() ? "" : " -- ", c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok)
            ++failures;
    }
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
