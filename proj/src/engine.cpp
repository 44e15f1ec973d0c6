#include "impflow/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "impflow/baselines.hpp"
#include "impflow/protocol.hpp"
#include "impflow/textio.hpp"

namespace impflow {

namespace {
constexpr double kBitsEps = 1e-6; // remaining bits below this count as done

bool event_after(const Event& a, const Event& b) {
    if (a.ts != b.ts)
        return a.ts > b.ts;
    return a.seq > b.seq;
}
} // namespace

const char* to_string(CtrlKind k) {
    switch (k) {
    case CtrlKind::RateRequest: return "RATE_REQUEST";
    case CtrlKind::RateResponse: return "RATE_RESPONSE";
    case CtrlKind::AllocationNotify: return "ALLOCATION_NOTIFY";
    case CtrlKind::SuspendNotify: return "SUSPEND_NOTIFY";
    case CtrlKind::CompleteNotify: return "COMPLETE_NOTIFY";
    case CtrlKind::RecoverHint: return "RECOVER_HINT";
    case CtrlKind::CancelRequest: return "CANCEL_REQUEST";
    }
    return "?";
}

const char* to_string(FlowState s) {
    switch (s) {
    case FlowState::Pending: return "pending";
    case FlowState::Active: return "active";
    case FlowState::Suspended: return "suspended";
    case FlowState::Completed: return "completed";
    case FlowState::Expired: return "expired";
    }
    return "?";
}

Bps FlowRuntime::total_rate() const {
    Bps total = 0.0;
    for (Bps r : path_rates)
        total += r;
    return total;
}

double FlowRuntime::remaining_bits_at(TimeNs t) const {
    if (state != FlowState::Active || draining || t <= last_progress)
        return remaining_bits;
    double sent = total_rate() * ns_to_s(t - last_progress);
    return std::max(0.0, remaining_bits - sent);
}

double FlowRuntime::current_fic(TimeNs now) const {
    double rs_bytes = remaining_bits_at(now) / 8.0;
    double rt_s = ns_to_s(flow.deadline - now);
    if (rs_bytes <= 0.0 || rt_s <= 0.0)
        return 0.0;
    return fic(flow.avg_importance(), rs_bytes, rt_s);
}

Bps FlowRuntime::demand_rate(TimeNs start, TimeNs delivery) const {
    TimeNs budget = flow.deadline - start - delivery;
    if (budget <= 0)
        return -1.0;
    return remaining_bits / ns_to_s(budget);
}

Bps LinkRuntime::available() const {
    return std::max(0.0, capacity - committed_total - reserved_total);
}

const FlowOutcome* SimResult::outcome(FlowId id) const {
    for (const auto& o : outcomes)
        if (o.flow.id == id)
            return &o;
    return nullptr;
}

Simulator::Simulator(const SimConfig& config, const Topology& topo)
    : config_(config), topo_(topo), rng_(config.seed), queue_(event_after) {
    links_.resize(topo.num_links());
    for (size_t l = 0; l < links_.size(); ++l) {
        links_[l].index = static_cast<LinkIndex>(l);
        links_[l].capacity = topo.link(static_cast<LinkIndex>(l)).capacity;
    }
    switch (config.protocol) {
    case ProtocolKind::Importance:
        scheduler_ = std::make_unique<ImportanceScheduler>(*this);
        break;
    case ProtocolKind::FcfsDeadline:
        scheduler_ = std::make_unique<FcfsScheduler>(*this);
        break;
    case ProtocolKind::Fairshare:
        scheduler_ = std::make_unique<FairshareScheduler>(*this);
        break;
    }
}

Simulator::~Simulator() = default;

FlowRuntime& Simulator::rt(FlowId id) {
    auto it = flows_.find(id);
    if (it == flows_.end())
        throw SimError("unknown flow " + std::to_string(id));
    return it->second;
}

FlowRuntime* Simulator::find(FlowId id) {
    auto it = flows_.find(id);
    return it == flows_.end() ? nullptr : &it->second;
}

void Simulator::schedule(Event e) {
    if (e.ts < clock_)
        throw SimError("schedule: event timestamp " + std::to_string(e.ts) +
                       " is in the past (clock " + std::to_string(clock_) + ")");
    e.seq = next_seq();
    queue_.push(e);
}

void Simulator::schedule_ctrl(TimeNs ts, CtrlMsg msg) {
    Event e;
    e.ts = ts;
    e.kind = EventKind::ControlMessage;
    e.flow = msg.flow;
    e.ctrl = msg;
    schedule(e);
}

void Simulator::apply_allocation(LinkIndex link, FlowId flow, Bps rate) {
    if (rate < 0.0)
        throw SimError("apply_allocation: negative rate");
    auto& l = link_rt(link);
    Bps old = 0.0;
    auto it = l.committed.find(flow);
    if (it != l.committed.end())
        old = it->second;
    Bps new_total = l.committed_total - old + rate;
    if (new_total > l.capacity + kRateEps) {
        throw SimError("apply_allocation: link " + std::to_string(link) +
                       " oversubscribed: " + fmt_rate(new_total) + " > " +
                       fmt_rate(l.capacity));
    }
    if (rate <= 0.0) {
        if (it != l.committed.end())
            l.committed.erase(it);
    } else if (it != l.committed.end()) {
        it->second = rate;
    } else {
        l.committed.emplace(flow, rate);
    }
    l.committed_total = new_total;
}

void Simulator::release_allocation(LinkIndex link, FlowId flow) {
    auto& l = link_rt(link);
    auto it = l.committed.find(flow);
    if (it == l.committed.end())
        return;
    l.committed_total -= it->second;
    if (l.committed_total < 0.0)
        l.committed_total = 0.0;
    l.committed.erase(it);
}

void Simulator::update_progress(FlowId flow, TimeNs to) {
    auto& r = rt(flow);
    if (to < r.last_progress)
        throw SimError("update_progress: negative time step");
    if (r.state == FlowState::Active && !r.draining) {
        double sent = r.total_rate() * ns_to_s(to - r.last_progress);
        r.remaining_bits = std::max(0.0, r.remaining_bits - sent);
        if (r.remaining_bits < kBitsEps)
            r.remaining_bits = 0.0;
    }
    r.last_progress = to;
}

void Simulator::set_path_rates(FlowId flow, const std::vector<Bps>& rates) {
    auto& r = rt(flow);
    if (rates.size() != r.paths.size())
        throw SimError("set_path_rates: rate vector size mismatch");
    update_progress(flow, clock_);
    bool changed = false;
    for (size_t p = 0; p < rates.size(); ++p) {
        if (std::fabs(rates[p] - r.path_rates[p]) <= 1e-9)
            continue;
        changed = true;
        for (LinkIndex l : r.paths[p].links) {
            if (rates[p] <= 0.0)
                release_allocation(l, flow);
            else
                apply_allocation(l, flow, rates[p]);
        }
        r.path_rates[p] = rates[p];
    }
    if (!changed)
        return;
    ++r.gen;
    std::string detail = "total=" + fmt_rate(r.total_rate()) + " paths=";
    for (size_t p = 0; p < rates.size(); ++p)
        detail += (p ? "," : "") + fmt_rate(rates[p]);
    trace("rate", flow, detail);
    if (r.state == FlowState::Active && !r.draining)
        reschedule_completion(r);
}

TimeNs Simulator::path_delay(const Path& p) const {
    TimeNs d = 0;
    for (LinkIndex l : p.links)
        d += topo_.link(l).prop_delay;
    return d;
}

TimeNs Simulator::delivery_delay(const FlowRuntime& r) const {
    TimeNs used = 0, any = 0;
    for (size_t p = 0; p < r.paths.size(); ++p) {
        TimeNs d = path_delay(r.paths[p]);
        any = std::max(any, d);
        if (r.path_rates[p] > kRateEps)
            used = std::max(used, d);
    }
    return used > 0 ? used : any;
}

TimeNs Simulator::ctrl_hop_latency() const {
    return 2 * config_.link_prop_delay + config_.processing_delay;
}

int Simulator::hop_distance(NodeIndex a, NodeIndex b) const {
    auto da = topo_.server_digits(a);
    auto db = topo_.server_digits(b);
    int hops = 0;
    for (size_t i = 0; i < da.size(); ++i)
        if (da[i] != db[i])
            ++hops;
    return hops;
}

void Simulator::reschedule_completion(FlowRuntime& r) {
    Bps total = r.total_rate();
    if (r.remaining_bits <= kBitsEps || total > kRateEps) {
        TimeNs tx_end =
            r.remaining_bits <= kBitsEps
                ? clock_
                : clock_ + static_cast<TimeNs>(std::ceil(r.remaining_bits / total * 1e9));
        CtrlMsg m;
        m.kind = CtrlKind::CompleteNotify;
        m.flow = r.flow.id;
        m.at = r.flow.src;
        m.hop = -1; // origination: transmission end at the source
        m.gen = r.gen;
        schedule_ctrl(tx_end, m);
        r.expected_delivery = tx_end + delivery_delay(r);
    } else {
        r.expected_delivery = kNoTime;
    }
}

void Simulator::mark_active(FlowId flow) {
    auto& r = rt(flow);
    r.state = FlowState::Active;
    r.draining = false;
    r.last_progress = clock_;
    if (r.started_at == kNoTime) {
        r.started_at = clock_;
        trace("start", flow, "rate=" + fmt_rate(r.total_rate()));
    } else {
        trace("resume", flow, "rate=" + fmt_rate(r.total_rate()));
    }
    reschedule_completion(r);
}

void Simulator::suspend_flow(FlowId flow, const std::string& why) {
    auto& r = rt(flow);
    update_progress(flow, clock_);
    for (size_t p = 0; p < r.paths.size(); ++p) {
        if (r.path_rates[p] <= 0.0)
            continue;
        for (LinkIndex l : r.paths[p].links)
            release_allocation(l, flow);
        r.path_rates[p] = 0.0;
    }
    ++r.gen;
    r.state = FlowState::Suspended;
    r.draining = false;
    r.expected_delivery = kNoTime;
    trace("suspend", flow, why);
}

void Simulator::expire_flow(FlowId flow) {
    auto& r = rt(flow);
    update_progress(flow, clock_);
    bool held_capacity = r.total_rate() > kRateEps;
    for (size_t p = 0; p < r.paths.size(); ++p) {
        if (r.path_rates[p] <= 0.0)
            continue;
        for (LinkIndex l : r.paths[p].links)
            release_allocation(l, flow);
        r.path_rates[p] = 0.0;
    }
    ++r.gen;
    r.state = FlowState::Expired;
    r.draining = false;
    r.expected_delivery = kNoTime;
    trace("expire", flow, "remaining_bits=" + fmt_double(r.remaining_bits));
    scheduler_->on_expired(flow);
    if (held_capacity)
        scheduler_->on_released(flow, false);
}

void Simulator::on_tx_end(const Event& e) {
    auto* r = find(e.flow);
    if (!r || r->state != FlowState::Active || r->draining || e.ctrl.gen != r->gen)
        return;
    update_progress(e.flow, clock_);
    if (r->remaining_bits > kBitsEps)
        return; // rates changed under us; a fresh event exists
    r->remaining_bits = 0.0;
    TimeNs delay = delivery_delay(*r);
    for (size_t p = 0; p < r->paths.size(); ++p) {
        if (r->path_rates[p] <= 0.0)
            continue;
        for (LinkIndex l : r->paths[p].links)
            release_allocation(l, e.flow);
        r->path_rates[p] = 0.0;
    }
    ++r->gen;
    r->draining = true;
    trace("txend", e.flow, "");
    Event done;
    done.ts = clock_ + delay;
    done.kind = EventKind::FlowCompletion;
    done.flow = e.flow;
    done.ctrl.gen = r->gen;
    r->expected_delivery = done.ts;
    schedule(done);
    scheduler_->on_released(e.flow, true);
}

void Simulator::on_delivery(const Event& e) {
    auto* r = find(e.flow);
    if (!r || r->state != FlowState::Active || !r->draining || e.ctrl.gen != r->gen)
        return;
    r->state = FlowState::Completed;
    r->draining = false;
    r->delivered_at = clock_;
    trace("complete", e.flow,
          std::string("met=") + (clock_ <= r->flow.deadline ? "1" : "0"));
}

void Simulator::on_deadline(FlowId flow) {
    auto& r = rt(flow);
    if (r.state == FlowState::Completed || r.state == FlowState::Expired)
        return;
    // A delivery landing exactly on the deadline still counts.
    if (r.state == FlowState::Active && r.expected_delivery != kNoTime &&
        r.expected_delivery <= r.flow.deadline)
        return;
    expire_flow(flow);
}

void Simulator::dispatch(const Event& e) {
    switch (e.kind) {
    case EventKind::FlowArrival:
        trace("arrive", e.flow, "");
        scheduler_->on_arrival(e.flow);
        break;
    case EventKind::FlowCompletion:
        on_delivery(e);
        break;
    case EventKind::DeadlineExpiry:
        on_deadline(e.flow);
        break;
    case EventKind::ControlMessage:
        if (e.ctrl.kind == CtrlKind::CompleteNotify && e.ctrl.hop == -1)
            on_tx_end(e);
        else
            scheduler_->on_ctrl(e.ctrl);
        break;
    case EventKind::RateRecompute:
        scheduler_->on_epoch();
        break;
    }
}

void Simulator::run_audit() {
    for (const auto& l : links_) {
        if (l.committed.empty())
            continue;
        Bps sum = 0.0;
        for (const auto& [f, r] : l.committed)
            sum += r;
        if (sum > l.capacity + kRateEps) {
            ++audit_violations_;
            trace("audit", -1,
                  "link=" + std::to_string(l.index) + " over=" + fmt_rate(sum));
        }
    }
    for (const auto& [id, r] : flows_) {
        if (r.state != FlowState::Active || r.draining)
            continue;
        if (clock_ > r.flow.deadline && r.total_rate() > kRateEps) {
            ++audit_violations_;
            trace("audit", id, "past-deadline-transmission");
        }
        for (size_t p = 0; p < r.paths.size(); ++p) {
            if (r.path_rates[p] <= kRateEps)
                continue;
            for (LinkIndex l : r.paths[p].links) {
                auto it = links_[static_cast<size_t>(l)].committed.find(id);
                Bps booked = it == links_[static_cast<size_t>(l)].committed.end()
                                 ? 0.0
                                 : it->second;
                if (std::fabs(booked - r.path_rates[p]) > kRateEps) {
                    ++audit_violations_;
                    trace("audit", id,
                          "conservation link=" + std::to_string(l) +
                              " booked=" + fmt_rate(booked) +
                              " path=" + fmt_rate(r.path_rates[p]));
                }
            }
        }
    }
}

void Simulator::trace(const std::string& kind, FlowId flow, const std::string& detail) {
    std::string line = std::to_string(clock_) + " " + kind + " " + std::to_string(flow);
    if (!detail.empty())
        line += " " + detail;
    trace_.push_back(std::move(line));
}

SimResult Simulator::run(const std::vector<Flow>& workload) {
    std::vector<Flow> scheduled;
    for (const auto& f : workload) {
        if (f.units.empty())
            throw SimError("flow " + std::to_string(f.id) + " has no units");
        if (config_.flow_splitting &&
            f.units.size() >= static_cast<size_t>(config_.split_clusters)) {
            for (auto& child : split_flow(f, config_.split_clusters))
                scheduled.push_back(std::move(child));
        } else {
            scheduled.push_back(f);
        }
    }

    TimeNs horizon = 0;
    for (const auto& f : scheduled) {
        FlowRuntime r;
        r.flow = f;
        r.remaining_bits = static_cast<double>(f.size_bytes()) * 8.0;
        r.last_progress = f.begin;
        r.paths = topo_.disjoint_paths(f.src, f.dst);
        r.path_rates.assign(r.paths.size(), 0.0);
        if (flows_.count(f.id))
            throw SimError("duplicate flow id " + std::to_string(f.id));
        flows_.emplace(f.id, std::move(r));
        flow_order_.push_back(f.id);
        horizon = std::max(horizon, f.deadline);

        Event arrival;
        arrival.ts = f.begin;
        arrival.kind = EventKind::FlowArrival;
        arrival.flow = f.id;
        schedule(arrival);
        Event expiry;
        expiry.ts = std::max(f.deadline, f.begin);
        expiry.kind = EventKind::DeadlineExpiry;
        expiry.flow = f.id;
        schedule(expiry);
    }
    horizon += config_.horizon_slack;

    while (!queue_.empty()) {
        Event e = queue_.top();
        if (e.ts > horizon)
            break;
        queue_.pop();
        clock_ = e.ts;
        ++events_;
        dispatch(e);
        if (config_.audit)
            run_audit();
    }

    SimResult result;
    result.trace = std::move(trace_);
    result.audit_violations = audit_violations_;
    result.events_processed = events_;
    result.end_time = clock_;
    for (FlowId id : flow_order_) {
        const auto& r = flows_.at(id);
        FlowOutcome o;
        o.flow = r.flow;
        o.state = r.state;
        o.delivered_at = r.delivered_at;
        o.remaining_bits = r.remaining_bits;
        o.met_deadline = r.state == FlowState::Completed && r.delivered_at != kNoTime &&
                         r.delivered_at <= r.flow.deadline;
        result.outcomes.push_back(std::move(o));
    }
    return result;
}

SimResult run_simulation(const SimConfig& config, const Topology& topo,
                         const std::vector<Flow>& workload) {
    Simulator sim(config, topo);
    return sim.run(workload);
}

SimResult run_simulation(const SimConfig& config, const std::vector<Flow>& workload) {
    Topology topo = Topology::bcube(config.bcube_n, config.bcube_k,
                                    config.link_capacity, config.link_prop_delay);
    Simulator sim(config, topo);
    return sim.run(workload);
}

} // namespace impflow
