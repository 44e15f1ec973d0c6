#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "impflow/engine.hpp"
#include "impflow/workload.hpp"

namespace impflow {

enum class FlowClass { All, Important, Regular };
enum class PrecisionMode { Paper, Conventional };

struct MetricsReport {
    std::int64_t goodput_bytes = 0;
    double aggregated_importance = 0.0;
    double deadline_ratio_overall = 0.0;
    double deadline_ratio_important = -1.0; // -1 when the class is empty
    double deadline_ratio_regular = -1.0;
    std::map<int, double> precision_at_k;
    int flows_total = 0;
    int flows_met = 0;
    std::uint64_t audit_violations = 0;
};

std::int64_t goodput(const SimResult& result);
double aggregated_importance(const SimResult& result);

// meeting count / class size; classes come from the k-means split labels
double deadline_ratio(const SimResult& result, FlowClass cls);

// Paper mode: |top-K truth ∩ received| / |received| per query (0 when nothing
// was received), macro-averaged. Conventional mode divides by K instead.
double precision_at_k(const std::set<std::string>& received_ranks,
                      const GroundTruth& truth, int k,
                      PrecisionMode mode = PrecisionMode::Paper);

// rank ids of units belonging to flows delivered by their deadline
std::set<std::string> received_rank_ids(const SimResult& result);

MetricsReport build_report(const SimResult& result, const GroundTruth& truth,
                           const std::vector<int>& ks,
                           PrecisionMode mode = PrecisionMode::Paper);
MetricsReport build_report(const SimResult& result);

void write_csv_header(std::ostream& os, const std::vector<int>& ks);
void write_csv_row(std::ostream& os, const std::string& scenario,
                   const std::string& protocol, bool split, std::uint64_t seed,
                   const MetricsReport& report, const std::vector<int>& ks);
void write_summary(std::ostream& os, const MetricsReport& report);

} // namespace impflow
