#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "impflow/metrics.hpp"
#include "impflow/oracle.hpp"
#include "impflow/protocol.hpp"
#include "impflow/runner.hpp"

namespace py = pybind11;
using namespace impflow;

namespace {

ScenarioConfig config_from_kwargs(const py::dict& kwargs) {
    ScenarioConfig cfg;
    for (auto item : kwargs) {
        std::string key = py::str(item.first);
        std::string value = py::str(item.second);
        // python identifiers use '_' where the file schema uses '.'
        for (auto& ch : key)
            if (ch == '~')
                ch = '.';
        apply_override(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

py::dict report_to_dict(const MetricsReport& r) {
    py::dict d;
    d["goodput_bytes"] = r.goodput_bytes;
    d["aggregated_importance"] = r.aggregated_importance;
    d["deadline_ratio"] = r.deadline_ratio_overall;
    if (r.deadline_ratio_important >= 0.0)
        d["deadline_ratio_important"] = r.deadline_ratio_important;
    if (r.deadline_ratio_regular >= 0.0)
        d["deadline_ratio_regular"] = r.deadline_ratio_regular;
    d["flows"] = r.flows_total;
    d["flows_met"] = r.flows_met;
    d["audit_violations"] = r.audit_violations;
    py::dict p;
    for (const auto& [k, v] : r.precision_at_k)
        p[py::int_(k)] = v;
    d["precision_at_k"] = p;
    return d;
}

} // namespace

PYBIND11_MODULE(_impflow, m) {
    m.doc() = "importance-aware deadline flow simulator for BCube fabrics";

    py::register_exception<SimError>(m, "SimError");

    py::class_<Topology>(m, "Topology")
        .def_static("bcube", &Topology::bcube, py::arg("n"), py::arg("k"),
                    py::arg("link_capacity") = 1e9, py::arg("link_prop_delay") = 8750)
        .def_property_readonly("num_servers", &Topology::num_servers)
        .def_property_readonly("num_switches", &Topology::num_switches)
        .def("neighbors", &Topology::neighbors, py::arg("server"))
        .def("disjoint_paths",
             [](const Topology& t, NodeIndex src, NodeIndex dst) {
                 std::vector<std::vector<NodeIndex>> out;
                 for (const auto& p : t.disjoint_paths(src, dst))
                     out.push_back(p.nodes);
                 return out;
             },
             py::arg("src"), py::arg("dst"))
        .def("dump", [](const Topology& t) {
            std::ostringstream os;
            t.dump(os);
            return os.str();
        });

    m.def("average_importance",
          [](const std::vector<double>& importances) {
              std::vector<ResponseUnit> units;
              for (double v : importances)
                  units.push_back({v, 1, {}});
              return average_importance(units);
          },
          py::arg("importances"));

    m.def("fic", &fic, py::arg("avg_importance"), py::arg("remaining_bytes"),
          py::arg("remaining_seconds"));

    m.def("minimal_rate",
          [](std::int64_t remaining_bytes, double deadline_s, double now_s) {
              return minimal_rate(remaining_bytes, s_to_ns(deadline_s), s_to_ns(now_s));
          },
          py::arg("remaining_bytes"), py::arg("deadline_s"), py::arg("now_s") = 0.0);

    m.def("split_importances",
          [](const std::vector<double>& importances, int clusters) {
              return cluster_by_importance(importances, clusters);
          },
          py::arg("importances"), py::arg("clusters") = 2,
          "cluster indices per child, most important cluster first");

    m.def("proportional_requests", &proportional_requests, py::arg("demand"),
          py::arg("estimates"));
    m.def("final_rates", &final_rates, py::arg("demand"), py::arg("grants"));

    m.def("run",
          [](const py::kwargs& kwargs) {
              auto cfg = config_from_kwargs(kwargs);
              auto out = run_scenario(cfg, false);
              py::list rows;
              for (const auto& run : out.runs) {
                  py::dict d = report_to_dict(run.report);
                  d["seed"] = run.seed;
                  rows.append(d);
              }
              return rows;
          },
          "run a scenario; keyword keys mirror the config file schema with "
          "'~' in place of '.' (e.g. workload~load='heavy')");

    m.def("run_config",
          [](const std::string& path) {
              auto cfg = load_config(path);
              cfg.validate();
              auto out = run_scenario(cfg, false);
              py::list rows;
              for (const auto& run : out.runs) {
                  py::dict d = report_to_dict(run.report);
                  d["seed"] = run.seed;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("path"));

    m.def("oracle_gap",
          [](int instances, int flows, std::uint64_t seed) {
              ScenarioConfig cfg;
              cfg.sim.bcube_n = 2;
              cfg.sim.bcube_k = 1;
              cfg.oracle_instances = instances;
              cfg.oracle_flows = flows;
              cfg.seeds = {seed};
              auto rows = run_oracle_compare(cfg, false);
              py::list out;
              for (const auto& r : rows) {
                  py::dict d;
                  d["instance"] = r.instance;
                  d["oracle"] = r.oracle;
                  d["importance"] = r.importance_proto;
                  d["fcfs"] = r.fcfs;
                  d["fairshare"] = r.fairshare;
                  d["gap_ratio"] = r.gap_ratio;
                  out.append(d);
              }
              return out;
          },
          py::arg("instances") = 10, py::arg("flows") = 6, py::arg("seed") = 1);

    m.def("precision_at_k",
          [](const std::vector<std::string>& received,
             const std::map<std::string, std::vector<std::string>>& truth, int k,
             const std::string& mode) {
              GroundTruth gt;
              gt.queries = truth;
              std::set<std::string> rec(received.begin(), received.end());
              return precision_at_k(rec, gt, k,
                                    mode == "conventional" ? PrecisionMode::Conventional
                                                           : PrecisionMode::Paper);
          },
          py::arg("received"), py::arg("truth"), py::arg("k"), py::arg("mode") = "paper");
}
