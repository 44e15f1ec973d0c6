#include "impflow/metrics.hpp"

#include <algorithm>
#include <ostream>

#include "impflow/textio.hpp"

namespace impflow {

std::int64_t goodput(const SimResult& result) {
    std::int64_t total = 0;
    for (const auto& o : result.outcomes)
        if (o.met_deadline)
            total += o.flow.size_bytes();
    return total;
}

double aggregated_importance(const SimResult& result) {
    double total = 0.0;
    for (const auto& o : result.outcomes)
        if (o.met_deadline)
            total += o.flow.total_importance();
    return total;
}

double deadline_ratio(const SimResult& result, FlowClass cls) {
    int total = 0, met = 0;
    for (const auto& o : result.outcomes) {
        if (cls == FlowClass::Important && o.flow.split_class != 0)
            continue;
        if (cls == FlowClass::Regular && o.flow.split_class != 1)
            continue;
        ++total;
        if (o.met_deadline)
            ++met;
    }
    if (total == 0)
        throw SimError("deadline_ratio: empty flow class");
    return static_cast<double>(met) / static_cast<double>(total);
}

double precision_at_k(const std::set<std::string>& received_ranks,
                      const GroundTruth& truth, int k, PrecisionMode mode) {
    if (k < 1)
        throw SimError("precision_at_k: K must be >= 1");
    if (truth.queries.empty())
        throw SimError("precision_at_k: no ground-truth queries");
    double sum = 0.0;
    for (const auto& [query, ranks] : truth.queries) {
        if (static_cast<size_t>(k) > ranks.size())
            throw SimError("precision_at_k: K=" + std::to_string(k) +
                           " exceeds truth list of query '" + query + "'");
        int hits = 0;
        for (int i = 0; i < k; ++i)
            if (received_ranks.count(ranks[static_cast<size_t>(i)]))
                ++hits;
        double denom = mode == PrecisionMode::Paper
                           ? static_cast<double>(received_ranks.size())
                           : static_cast<double>(k);
        sum += denom > 0.0 ? static_cast<double>(hits) / denom : 0.0;
    }
    return sum / static_cast<double>(truth.queries.size());
}

std::set<std::string> received_rank_ids(const SimResult& result) {
    std::set<std::string> out;
    for (const auto& o : result.outcomes) {
        if (!o.met_deadline)
            continue;
        for (const auto& u : o.flow.units)
            if (!u.rank_id.empty())
                out.insert(u.rank_id);
    }
    return out;
}

MetricsReport build_report(const SimResult& result, const GroundTruth& truth,
                           const std::vector<int>& ks, PrecisionMode mode) {
    MetricsReport r;
    r.goodput_bytes = goodput(result);
    r.aggregated_importance = aggregated_importance(result);
    r.audit_violations = result.audit_violations;
    int important = 0, regular = 0;
    for (const auto& o : result.outcomes) {
        ++r.flows_total;
        if (o.met_deadline)
            ++r.flows_met;
        if (o.flow.split_class == 0)
            ++important;
        else if (o.flow.split_class == 1)
            ++regular;
    }
    r.deadline_ratio_overall =
        r.flows_total ? static_cast<double>(r.flows_met) / r.flows_total : 0.0;
    if (important > 0)
        r.deadline_ratio_important = deadline_ratio(result, FlowClass::Important);
    if (regular > 0)
        r.deadline_ratio_regular = deadline_ratio(result, FlowClass::Regular);
    if (!truth.queries.empty()) {
        auto received = received_rank_ids(result);
        for (int k : ks)
            r.precision_at_k[k] = precision_at_k(received, truth, k, mode);
    }
    return r;
}

MetricsReport build_report(const SimResult& result) {
    return build_report(result, GroundTruth{}, {});
}

void write_csv_header(std::ostream& os, const std::vector<int>& ks) {
    os << "scenario,protocol,split,seed,flows,flows_met,goodput_bytes,"
          "aggregated_importance,deadline_ratio,deadline_ratio_important,"
          "deadline_ratio_regular,audit_violations";
    for (int k : ks)
        os << ",p_at_" << k;
    os << '\n';
}

void write_csv_row(std::ostream& os, const std::string& scenario,
                   const std::string& protocol, bool split, std::uint64_t seed,
                   const MetricsReport& r, const std::vector<int>& ks) {
    os << scenario << ',' << protocol << ',' << (split ? "on" : "off") << ',' << seed
       << ',' << r.flows_total << ',' << r.flows_met << ',' << r.goodput_bytes << ','
       << fmt_double(r.aggregated_importance) << ','
       << fmt_fixed(r.deadline_ratio_overall, 6) << ',';
    if (r.deadline_ratio_important >= 0.0)
        os << fmt_fixed(r.deadline_ratio_important, 6);
    os << ',';
    if (r.deadline_ratio_regular >= 0.0)
        os << fmt_fixed(r.deadline_ratio_regular, 6);
    os << ',' << r.audit_violations;
    for (int k : ks) {
        os << ',';
        auto it = r.precision_at_k.find(k);
        if (it != r.precision_at_k.end())
            os << fmt_fixed(it->second, 6);
    }
    os << '\n';
}

void write_summary(std::ostream& os, const MetricsReport& r) {
    os << "flows:                  " << r.flows_total << "\n"
       << "met deadline:           " << r.flows_met << "\n"
       << "goodput (bytes):        " << r.goodput_bytes << "\n"
       << "aggregated importance:  " << fmt_double(r.aggregated_importance) << "\n"
       << "deadline ratio:         " << fmt_fixed(r.deadline_ratio_overall, 4) << "\n";
    if (r.deadline_ratio_important >= 0.0)
        os << "  important children:   " << fmt_fixed(r.deadline_ratio_important, 4)
           << "\n";
    if (r.deadline_ratio_regular >= 0.0)
        os << "  regular children:     " << fmt_fixed(r.deadline_ratio_regular, 4)
           << "\n";
    for (const auto& [k, p] : r.precision_at_k)
        os << "precision@" << k << ":           " << fmt_fixed(p, 4) << "\n";
    os << "audit violations:       " << r.audit_violations << "\n";
}

} // namespace impflow
