#pragma once

#include <map>
#include <set>
#include <vector>

#include "impflow/engine.hpp"

namespace impflow {

// --- allocation arithmetic, exact on the worked-example rationals ---

// Splits a demand across paths in proportion to estimated residuals; equal
// split when no estimate is positive.
std::vector<Bps> proportional_requests(Bps demand, const std::vector<Bps>& estimates);

// Final per-path rates in proportion to reported bottleneck grants.
std::vector<Bps> final_rates(Bps demand, const std::vector<Bps>& grants);

// Preemption is worthwhile only when the request's FIC exceeds the displaced
// FIC mass.
bool admission_check(double new_fic, const std::vector<double>& victim_fics);

// --- Algorithm "rate allocation on each node", one link at a time ---

struct ExistingFlow {
    FlowId id = -1;
    double fic = 0.0;
    Bps rate_on_link = 0.0; // preemptable committed rate, net of pending sheds
    Bps shed_excess = 0.0;  // reclaimable above the flow's feasibility floor
    TimeNs deadline = 0;
    int victim_path = 0; // the victim's path crossing the inspected link
};

struct LinkAllocInput {
    Bps free = 0.0;                  // publicly available capacity
    double competing_fic_sum = 0.0;  // FIC mass already committed on the link
    std::vector<ExistingFlow> flows; // candidate victims, any order
};

struct LinkAllocPlan {
    Bps grant = 0.0;
    std::vector<ShedHold> sheds;
    std::vector<FlowId> victims; // committed flows to suspend
    double fic_spent = 0.0;
    Bps backing = 0.0; // grant share funded by sheds and suspensions
};

// If free capacity covers the desired rate the grant also reports a
// FIC-proportional share of the spare. Otherwise existing flows shed their
// excess first and are then preempted in ascending FIC order while the
// request's FIC budget lasts.
LinkAllocPlan allocate_rate_on_link(const LinkAllocInput& in, Bps desired,
                                    double fic_budget);

// One round of FIC-proportional spare division before per-flow caps.
std::vector<Bps> fic_proportional_shares(Bps spare, const std::vector<double>& fics);

struct SuspensionRecord {
    FlowId flow = -1;
    NodeIndex suspending_node = kNoNode;
    NodeIndex source = kNoNode;
    TimeNs deadline = 0;
    double fic_at_suspension = 0.0;
    double remaining_bytes = 0.0;
};

// Schedules capacity-freed notifications to the servers on the flow's paths
// and their switch neighborhoods, staggered by control-hop distance.
void schedule_capacity_wave(Simulator& sim, const FlowRuntime& rt);

// The importance-aware delivery protocol: multipath initiation with
// FIC-budgeted preemption, suspension witnesses, recovery on completions,
// and FIC-proportional spare distribution.
class ImportanceScheduler : public Scheduler {
public:
    explicit ImportanceScheduler(Simulator& sim) : Scheduler(sim) {}
    void on_arrival(FlowId flow) override;
    void on_ctrl(const CtrlMsg& msg) override;
    void on_released(FlowId flow, bool completed) override;
    void on_expired(FlowId flow) override;

private:
    using VictimPath = std::pair<FlowId, int>; // victim flow, its path index

    struct Attempt {
        int id = 0;
        TimeNs t0 = 0;
        Bps demand = 0.0;
        std::vector<Bps> desired;
        std::vector<double> budgets;
        std::vector<Bps> grants;
        size_t responses = 0;
        std::set<FlowId> planned_victims; // shared across the attempt's paths
        std::vector<std::pair<FlowId, NodeIndex>> victim_order; // with witness
        // planned per-path rate reductions of other flows; cutting a victim's
        // path rate frees every link of that path at once, so plans are keyed
        // by (victim, victim path), not by link
        std::map<VictimPath, Bps> planned_sheds;
        // per-link grant share funded by victims; shields spare capacity from
        // claims until the attempt settles
        std::map<LinkIndex, Bps> backing;
    };

    void initiate(FlowId flow);
    void handle_request(CtrlMsg msg);
    void handle_response(const CtrlMsg& msg);
    void decide(FlowId flow, Attempt& a);
    void revoke_attempt(FlowId owner);
    void release_attempt(FlowId flow, const Attempt& a, bool execute);
    void execute_suspension(FlowId victim, NodeIndex witness);
    void handle_capacity_notify(const CtrlMsg& msg);
    void redistribute_at(NodeIndex node);
    // spare capacity minus the backing pending attempts still count on
    Bps claimable(LinkIndex link) const;
    LinkAllocInput snapshot(LinkIndex link, FlowId requester, const Attempt& a) const;
    TimeNs response_time(TimeNs t0, int hops) const;
    TimeNs decision_time(TimeNs t0, const std::vector<Path>& paths) const;

    std::map<FlowId, Attempt> pending_;
    // all attempts' planned sheds, for snapshot availability accounting
    std::map<VictimPath, Bps> pending_shed_;
    // victims earmarked for suspension by any pending attempt; their whole
    // rate is spoken for on every link they cross
    std::map<FlowId, int> pending_preempt_;
    // per-link victim-funded backing of pending attempts
    std::map<LinkIndex, Bps> shield_;
    std::map<NodeIndex, std::map<FlowId, SuspensionRecord>> witnesses_;
    std::map<FlowId, NodeIndex> witness_of_;
    std::map<NodeIndex, std::vector<FlowId>> flows_by_src_;
};

} // namespace impflow
