#pragma once

#include <map>
#include <set>
#include <vector>

#include "impflow/engine.hpp"

namespace impflow {

// Max-min shares of one link's capacity among subflow demands.
std::vector<Bps> maxmin_shares(Bps capacity, const std::vector<Bps>& demands);

// Deadline-FCFS rate reservation with a seeded random disjoint-path choice.
// Rejected flows are quenched, with one retry on a completion overheard in
// the source's switch neighborhoods. Leftover capacity is shared equally
// among the admitted flows of each link.
class FcfsScheduler : public Scheduler {
public:
    explicit FcfsScheduler(Simulator& sim) : Scheduler(sim) {}
    void on_arrival(FlowId flow) override;
    void on_ctrl(const CtrlMsg& msg) override;
    void on_released(FlowId flow, bool completed) override;
    void on_expired(FlowId flow) override;

private:
    struct Attempt {
        int id = 0;
        int path = 0;
        Bps demand = 0.0;
    };

    void initiate(FlowId flow);
    void decide(FlowId flow, const CtrlMsg& msg);
    void recompute_spares(FlowId admitting = -1);
    Bps fcfs_available(LinkIndex l) const;
    void release_parked_sibling(FlowId important_child);

    std::map<FlowId, Attempt> pending_;
    std::map<FlowId, Bps> demands_;          // admitted minimal-rate grants
    std::map<FlowId, int> chosen_path_;
    std::set<FlowId> retry_used_;
    std::map<FlowId, FlowId> parked_regular_; // important child -> waiting sibling
    std::map<NodeIndex, std::vector<FlowId>> flows_by_src_;
};

// Fluid AIMD caricature of multipath TCP: one subflow per disjoint path,
// global max-min allocation each epoch, synthetic loss with an RTO stall for
// the highest-rate subflow of any link whose demand exceeds capacity.
class FairshareScheduler : public Scheduler {
public:
    explicit FairshareScheduler(Simulator& sim) : Scheduler(sim) {}
    void on_arrival(FlowId flow) override;
    void on_ctrl(const CtrlMsg& msg) override;
    void on_released(FlowId flow, bool completed) override;
    void on_expired(FlowId flow) override;
    void on_epoch() override;

private:
    struct Subflow {
        Bps demand = 0.0;
        Bps allocated = 0.0;
        TimeNs stalled_until = 0;
        bool slow_start = true;
    };

    void ensure_epoch_scheduled();
    bool any_live() const;

    std::map<FlowId, std::vector<Subflow>> subflows_;
    TimeNs next_epoch_ = kNoTime;
};

} // namespace impflow
