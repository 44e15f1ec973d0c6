#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "impflow/flowmodel.hpp"
#include "impflow/topology.hpp"
#include "impflow/types.hpp"

namespace impflow {

enum class ProtocolKind { Importance, FcfsDeadline, Fairshare };

enum class EventKind {
    FlowArrival,
    FlowCompletion,
    DeadlineExpiry,
    ControlMessage,
    RateRecompute,
};

enum class CtrlKind {
    RateRequest,
    RateResponse,
    AllocationNotify,
    SuspendNotify,
    CompleteNotify,
    RecoverHint,
    CancelRequest,
};

const char* to_string(CtrlKind k);

struct CtrlMsg {
    CtrlKind kind = CtrlKind::RateRequest;
    FlowId flow = -1;      // flow the negotiation belongs to
    int attempt = 0;
    int path = -1;         // path index within the flow's disjoint set
    int hop = -1;          // relay index along the path; -1 = origination
    NodeIndex at = kNoNode;
    FlowId about = -1;     // subject flow for suspend/complete/recover
    Bps grant = 0.0;       // running bottleneck grant in request/response
    Bps desired = 0.0;     // per-path requested rate
    Bps demand = 0.0;      // whole-flow target rate (caps reservations)
    double budget = 0.0;   // remaining FIC budget of the request
    std::uint32_t gen = 0; // staleness guard for completion events
};

struct Event {
    TimeNs ts = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::FlowArrival;
    FlowId flow = -1;
    CtrlMsg ctrl{};
};

enum class FlowState { Pending, Active, Suspended, Completed, Expired };

const char* to_string(FlowState s);

struct FlowRuntime {
    Flow flow;
    FlowState state = FlowState::Pending;
    double remaining_bits = 0.0;
    TimeNs last_progress = 0;
    std::vector<Path> paths;
    std::vector<Bps> path_rates;
    bool draining = false; // transmission finished, delivery event pending
    std::uint32_t gen = 0; // bumped on every rate change
    TimeNs started_at = kNoTime;
    TimeNs delivered_at = kNoTime;
    TimeNs expected_delivery = kNoTime;
    int attempts = 0;
    TimeNs last_attempt = kNoTime;

    Bps total_rate() const;
    double remaining_bits_at(TimeNs t) const;
    // FIC with RT = deadline - now.
    double current_fic(TimeNs now) const;
    Bps demand_rate(TimeNs start, TimeNs delivery_delay) const;
};

// reservation key: (flow, attempt, path index)
using ResKey = std::tuple<FlowId, int, int>;

struct ShedHold {
    FlowId victim;
    Bps amount;
};

struct Reservation {
    Bps amount = 0.0;
    std::vector<FlowId> preempt_victims;
    NodeIndex witness = kNoNode; // node that planned the preemptions
};

struct LinkRuntime {
    LinkIndex index = -1;
    Bps capacity = 0.0;
    std::map<FlowId, Bps> committed;
    std::map<ResKey, Reservation> reserved;
    Bps committed_total = 0.0;
    Bps reserved_total = 0.0;

    // Capacity visible to new requests and to spare redistribution.
    // Reservations count in full; their private shed/preempt backing does not
    // re-enter the pool until the reservation commits.
    Bps available() const;
};

struct SimConfig {
    int bcube_n = 5;
    int bcube_k = 2;
    Bps link_capacity = 1e9;
    TimeNs link_prop_delay = 8'750; // per directed link; one server hop = 17.5us
    TimeNs processing_delay = 5'000;
    ProtocolKind protocol = ProtocolKind::Importance;
    bool flow_splitting = true;
    int split_clusters = 2;
    std::uint64_t seed = 1;
    TimeNs horizon_slack = 10 * kMillisecond;
    bool audit = true;
    TimeNs retry_spacing = 1 * kMillisecond;
    TimeNs fairshare_epoch = 1 * kMillisecond;
    TimeNs fairshare_rto = 200 * kMillisecond;
    Bps fairshare_initial_rate = 10e6;
    Bps fairshare_additive_increase = 5e6;
};

struct FlowOutcome {
    Flow flow;
    FlowState state = FlowState::Pending;
    TimeNs delivered_at = kNoTime;
    double remaining_bits = 0.0;
    bool met_deadline = false;
};

struct SimResult {
    std::vector<std::string> trace;
    std::vector<FlowOutcome> outcomes;
    std::uint64_t audit_violations = 0;
    std::uint64_t events_processed = 0;
    TimeNs end_time = 0;

    const FlowOutcome* outcome(FlowId id) const;
};

class Scheduler;

class Simulator {
public:
    Simulator(const SimConfig& config, const Topology& topo);
    ~Simulator();

    // Splits flows when configured, schedules arrivals, and drives the event
    // loop to completion. Identical inputs produce identical results.
    SimResult run(const std::vector<Flow>& workload);

    TimeNs now() const { return clock_; }
    const SimConfig& config() const { return config_; }
    const Topology& topo() const { return topo_; }
    std::mt19937_64& rng() { return rng_; }

    FlowRuntime& rt(FlowId id);
    FlowRuntime* find(FlowId id);
    LinkRuntime& link_rt(LinkIndex l) { return links_[static_cast<size_t>(l)]; }
    const std::vector<FlowId>& scheduled_flows() const { return flow_order_; }

    void schedule(Event e); // throws if e.ts < now()
    void schedule_ctrl(TimeNs ts, CtrlMsg msg);
    std::uint64_t next_seq() { return seq_++; }

    // Books `rate` for `flow` on the link, replacing any previous booking.
    // Oversubscribing the capacity is a hard fault.
    void apply_allocation(LinkIndex link, FlowId flow, Bps rate);
    void release_allocation(LinkIndex link, FlowId flow);

    // Advances delivered bytes at the current rate; schedules the delivery
    // event when the transmission finishes.
    void update_progress(FlowId flow, TimeNs to);

    // Sets the committed per-path rates, updating every link on every path
    // and rescheduling the transmission-end event.
    void set_path_rates(FlowId flow, const std::vector<Bps>& rates);

    void suspend_flow(FlowId flow, const std::string& why);
    void expire_flow(FlowId flow);
    void mark_active(FlowId flow);

    // One-way data latency of a path (sum of link propagation delays).
    TimeNs path_delay(const Path& p) const;
    TimeNs delivery_delay(const FlowRuntime& rt) const;
    // Latency of one control hop between adjacent servers, handling included.
    TimeNs ctrl_hop_latency() const;
    // Minimum server-hop distance between two servers (digit differences).
    int hop_distance(NodeIndex a, NodeIndex b) const;

    void trace(const std::string& kind, FlowId flow, const std::string& detail);

private:
    friend class ImportanceScheduler;
    void dispatch(const Event& e);
    void on_deadline(FlowId flow);
    void on_delivery(const Event& e);
    void on_tx_end(const Event& e);
    void reschedule_completion(FlowRuntime& r);
    void run_audit();

    SimConfig config_;
    const Topology& topo_;
    std::mt19937_64 rng_;
    TimeNs clock_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t audit_violations_ = 0;
    std::uint64_t events_ = 0;
    std::priority_queue<Event, std::vector<Event>, bool (*)(const Event&, const Event&)> queue_;
    std::vector<LinkRuntime> links_;
    std::map<FlowId, FlowRuntime> flows_;
    std::vector<FlowId> flow_order_;
    std::vector<std::string> trace_;
    std::unique_ptr<Scheduler> scheduler_;
};

// Protocol driver living inside the event loop.
class Scheduler {
public:
    explicit Scheduler(Simulator& sim) : sim_(sim) {}
    virtual ~Scheduler() = default;
    virtual void on_arrival(FlowId flow) = 0;
    virtual void on_ctrl(const CtrlMsg& msg) = 0;
    // Capacity owned by `flow` has been released (transmission end or expiry).
    virtual void on_released(FlowId flow, bool completed) = 0;
    virtual void on_expired(FlowId /*flow*/) {}
    virtual void on_epoch() {}

protected:
    Simulator& sim_;
};

SimResult run_simulation(const SimConfig& config, const Topology& topo,
                         const std::vector<Flow>& workload);
SimResult run_simulation(const SimConfig& config, const std::vector<Flow>& workload);

} // namespace impflow
