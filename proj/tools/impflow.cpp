#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "impflow/runner.hpp"
#include "impflow/textio.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("IMPFLOW_LOG");
    if (!env)
        return 0;
    std::string v = env;
    if (v == "debug")
        return 2;
    if (v == "info")
        return 1;
    return 0;
}

void info(const std::string& msg) {
    if (log_level() >= 1)
        std::cerr << "impflow: " << msg << '\n';
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string protocol;
    std::string split;
    long long seed = -1;
    bool trace = false;
};

impflow::ScenarioConfig make_config(const CommonOpts& opts) {
    impflow::ScenarioConfig cfg;
    if (!opts.config_path.empty())
        cfg = impflow::load_config(opts.config_path);
    if (!opts.protocol.empty())
        impflow::apply_override(cfg, "protocol", opts.protocol);
    if (!opts.split.empty())
        impflow::apply_override(cfg, "flow_splitting", opts.split);
    if (opts.seed >= 0)
        impflow::apply_override(cfg, "seed", std::to_string(opts.seed));
    if (!opts.out_dir.empty())
        cfg.out_dir = opts.out_dir;
    if (opts.trace)
        cfg.emit_trace = true;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "scenario config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--protocol", opts.protocol,
                    "importance | fcfs_deadline | fairshare");
    cmd->add_option("--split", opts.split, "flow splitting: on | off");
    cmd->add_option("--seed", opts.seed, "single seed override");
    cmd->add_flag("--trace", opts.trace, "emit the full event trace");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"importance-aware deadline flow simulator for BCube fabrics"};
    app.require_subcommand(1);

    CommonOpts run_opts, sweep_opts, oracle_opts;
    auto* run_cmd = app.add_subcommand("run", "run one scenario over its seed list");
    add_common(run_cmd, run_opts);
    auto* sweep_cmd =
        app.add_subcommand("sweep", "full load x deadline x protocol grid");
    add_common(sweep_cmd, sweep_opts);
    auto* oracle_cmd = app.add_subcommand(
        "oracle", "exact-optimum comparison on seeded tiny instances");
    add_common(oracle_cmd, oracle_opts);

    auto* topo_cmd = app.add_subcommand("topo-dump", "adjacency list of a BCube build");
    int topo_n = 5, topo_k = 2;
    std::string topo_out;
    topo_cmd->add_option("--n", topo_n, "switch port count");
    topo_cmd->add_option("--k", topo_k, "level index (levels - 1)");
    topo_cmd->add_option("--out", topo_out, "output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            auto cfg = make_config(run_opts);
            info("running scenario '" + cfg.scenario + "'");
            auto out = impflow::run_scenario(cfg, true);
            std::uint64_t violations = 0;
            for (const auto& r : out.runs)
                violations += r.report.audit_violations;
            std::cout << "wrote " << cfg.out_dir << "/metrics.csv (" << out.runs.size()
                      << " runs)\n";
            if (violations) {
                std::cerr << "impflow: audit violations detected: " << violations << '\n';
                return 2;
            }
        } else if (sweep_cmd->parsed()) {
            auto cfg = make_config(sweep_opts);
            info("running sweep grid");
            auto rows = impflow::run_sweep(cfg, true);
            std::uint64_t violations = 0;
            for (const auto& r : rows)
                violations += r.report.audit_violations;
            std::cout << "wrote " << cfg.out_dir << "/sweep.csv (" << rows.size()
                      << " rows)\n";
            if (violations) {
                std::cerr << "impflow: audit violations detected: " << violations << '\n';
                return 2;
            }
        } else if (oracle_cmd->parsed()) {
            auto cfg = make_config(oracle_opts);
            if (oracle_opts.config_path.empty()) {
                // default desk-scale instance set
                impflow::apply_override(cfg, "topology.n", "2");
                impflow::apply_override(cfg, "topology.k", "1");
            }
            info("running oracle comparison");
            auto rows = impflow::run_oracle_compare(cfg, true);
            std::cout << "wrote " << cfg.out_dir << "/oracle.csv (" << rows.size()
                      << " instances)\n";
        } else if (topo_cmd->parsed()) {
            auto topo = impflow::Topology::bcube(topo_n, topo_k);
            if (topo_out.empty()) {
                topo.dump(std::cout);
            } else {
                std::ofstream f(topo_out);
                topo.dump(f);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "impflow: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
