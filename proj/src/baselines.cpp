#include "impflow/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "impflow/protocol.hpp"
#include "impflow/textio.hpp"

namespace impflow {

namespace {
constexpr double kTinyRate = 1e-6;
constexpr Bps kHugeRate = 1e30;
} // namespace

std::vector<Bps> maxmin_shares(Bps capacity, const std::vector<Bps>& demands) {
    std::vector<Bps> alloc(demands.size(), 0.0);
    std::vector<bool> frozen(demands.size(), false);
    Bps residual = capacity;
    size_t open = demands.size();
    while (open > 0 && residual > kTinyRate) {
        Bps level = residual / static_cast<double>(open);
        Bps step = level;
        for (size_t i = 0; i < demands.size(); ++i)
            if (!frozen[i])
                step = std::min(step, demands[i] - alloc[i]);
        bool any = false;
        for (size_t i = 0; i < demands.size(); ++i) {
            if (frozen[i])
                continue;
            alloc[i] += step;
            residual -= step;
            if (alloc[i] + kTinyRate >= demands[i]) {
                frozen[i] = true;
                --open;
                any = true;
            }
        }
        if (!any && step + kTinyRate >= level)
            break; // link saturated with equal shares
    }
    return alloc;
}

// --- FCFS (deadline-reservation baseline) ---

Bps FcfsScheduler::fcfs_available(LinkIndex l) const {
    const auto& lr = sim_.link_rt(l);
    Bps demand_total = 0.0;
    for (const auto& [fid, d] : demands_) {
        auto it = chosen_path_.find(fid);
        if (it == chosen_path_.end())
            continue;
        auto* fr = sim_.find(fid);
        if (!fr || fr->state != FlowState::Active || fr->draining)
            continue;
        const auto& links = fr->paths[static_cast<size_t>(it->second)].links;
        if (std::find(links.begin(), links.end(), l) != links.end())
            demand_total += d;
    }
    return std::max(0.0, lr.capacity - demand_total - lr.reserved_total);
}

void FcfsScheduler::on_arrival(FlowId flow) {
    auto& r = sim_.rt(flow);
    flows_by_src_[r.flow.src].push_back(flow);
    if (r.flow.split_class == 1) {
        // the regular child queues behind its important sibling's admission
        FlowId sibling = r.flow.id - 1;
        auto* sr = sim_.find(sibling);
        if (sr && sr->flow.parent == r.flow.parent &&
            sr->state == FlowState::Pending) {
            parked_regular_[sibling] = flow;
            return;
        }
    }
    initiate(flow);
}

void FcfsScheduler::initiate(FlowId flow) {
    auto& r = sim_.rt(flow);
    if (r.state == FlowState::Active || r.state == FlowState::Completed ||
        r.state == FlowState::Expired || pending_.count(flow))
        return;
    TimeNs now = sim_.now();
    if (now >= r.flow.deadline || r.remaining_bits <= 0.0)
        return;
    r.attempts += 1;
    r.last_attempt = now;

    std::uniform_int_distribution<size_t> pick(0, r.paths.size() - 1);
    int path = static_cast<int>(pick(sim_.rng()));
    const Path& p = r.paths[static_cast<size_t>(path)];

    const auto& c = sim_.config();
    TimeNs hop_travel = 2 * c.link_prop_delay;
    TimeNs t_dec = now + c.processing_delay +
                   static_cast<TimeNs>(p.hop_count - 1) * sim_.ctrl_hop_latency() +
                   static_cast<TimeNs>(p.hop_count - 1) * hop_travel + c.processing_delay;
    TimeNs budget = r.flow.deadline - t_dec - sim_.path_delay(p);
    if (budget <= 0) {
        sim_.trace("reject", flow, "deadline-too-close");
        if (r.state == FlowState::Pending)
            sim_.suspend_flow(flow, "deadline-too-close");
        release_parked_sibling(flow);
        return;
    }
    Bps demand = r.remaining_bits / ns_to_s(budget);
    pending_[flow] = Attempt{r.attempts, path, demand};

    CtrlMsg m;
    m.kind = CtrlKind::RateRequest;
    m.flow = flow;
    m.attempt = r.attempts;
    m.path = path;
    m.hop = 0;
    m.at = r.flow.src;
    m.grant = kHugeRate;
    m.desired = demand;
    m.demand = demand;
    sim_.schedule_ctrl(now + c.processing_delay, m);
}

void FcfsScheduler::on_ctrl(const CtrlMsg& msg) {
    std::string detail = std::string(to_string(msg.kind)) + " at=" + std::to_string(msg.at);
    if (msg.about >= 0)
        detail += " about=" + std::to_string(msg.about);
    sim_.trace("ctrl", msg.flow, detail);

    switch (msg.kind) {
    case CtrlKind::RateRequest: {
        auto it = pending_.find(msg.flow);
        if (it == pending_.end() || it->second.id != msg.attempt)
            return;
        auto& r = sim_.rt(msg.flow);
        const Path& p = r.paths[static_cast<size_t>(msg.path)];
        CtrlMsg fwd = msg;
        Bps node_grant = kHugeRate;
        for (int side = 0; side < 2; ++side) {
            LinkIndex l = p.links[static_cast<size_t>(2 * msg.hop + side)];
            Bps grant = std::min(msg.desired, fcfs_available(l));
            auto& lr = sim_.link_rt(l);
            ResKey key{msg.flow, msg.attempt, msg.path};
            Reservation res;
            res.amount = std::max(0.0, grant);
            lr.reserved[key] = res;
            lr.reserved_total += res.amount;
            node_grant = std::min(node_grant, grant);
        }
        fwd.grant = std::min(fwd.grant, node_grant);
        if (msg.hop + 1 < p.hop_count) {
            fwd.hop = msg.hop + 1;
            fwd.at = p.nodes[static_cast<size_t>(2 * (msg.hop + 1))];
            sim_.schedule_ctrl(sim_.now() + sim_.ctrl_hop_latency(), fwd);
        } else {
            CtrlMsg resp;
            resp.kind = CtrlKind::RateResponse;
            resp.flow = msg.flow;
            resp.attempt = msg.attempt;
            resp.path = msg.path;
            resp.at = r.flow.src;
            resp.grant = fwd.grant;
            TimeNs travel = static_cast<TimeNs>(p.hop_count - 1) * 2 *
                            sim_.config().link_prop_delay;
            sim_.schedule_ctrl(sim_.now() + travel + sim_.config().processing_delay, resp);
        }
        break;
    }
    case CtrlKind::RateResponse:
        decide(msg.flow, msg);
        break;
    case CtrlKind::CompleteNotify: {
        auto by_src = flows_by_src_.find(msg.at);
        if (by_src == flows_by_src_.end())
            break;
        for (FlowId f : by_src->second) {
            auto& r = sim_.rt(f);
            if (r.state != FlowState::Suspended || retry_used_.count(f) ||
                pending_.count(f) || sim_.now() >= r.flow.deadline)
                continue;
            retry_used_.insert(f);
            initiate(f);
        }
        break;
    }
    default:
        break;
    }
}

void FcfsScheduler::decide(FlowId flow, const CtrlMsg& msg) {
    auto it = pending_.find(flow);
    if (it == pending_.end() || it->second.id != msg.attempt)
        return;
    Attempt a = it->second;
    pending_.erase(it);
    auto& r = sim_.rt(flow);
    const Path& p = r.paths[static_cast<size_t>(a.path)];
    ResKey key{flow, a.id, a.path};
    for (LinkIndex l : p.links) {
        auto& lr = sim_.link_rt(l);
        auto res = lr.reserved.find(key);
        if (res != lr.reserved.end()) {
            lr.reserved_total -= res->second.amount;
            lr.reserved.erase(res);
        }
    }
    if (msg.grant + kTinyRate < a.demand || sim_.now() >= r.flow.deadline) {
        sim_.trace("reject", flow,
                   "demand=" + fmt_rate(a.demand) + " granted=" + fmt_rate(msg.grant));
        if (r.state == FlowState::Pending || r.state == FlowState::Suspended)
            sim_.suspend_flow(flow, "quenched");
        release_parked_sibling(flow);
        return;
    }
    demands_[flow] = a.demand;
    chosen_path_[flow] = a.path;
    recompute_spares(flow); // incumbents shed spare before the new booking
    sim_.mark_active(flow);
    release_parked_sibling(flow);
}

void FcfsScheduler::release_parked_sibling(FlowId important_child) {
    auto it = parked_regular_.find(important_child);
    if (it == parked_regular_.end())
        return;
    FlowId regular = it->second;
    parked_regular_.erase(it);
    initiate(regular);
}

void FcfsScheduler::recompute_spares(FlowId admitting) {
    // equal-share spare on each link, bounded by the flow's whole path
    std::map<LinkIndex, std::pair<Bps, int>> load; // demand sum, flow count
    std::vector<FlowId> active;
    for (const auto& [fid, demand] : demands_) {
        auto* fr = sim_.find(fid);
        bool usable = fr && ((fr->state == FlowState::Active && !fr->draining) ||
                             fid == admitting);
        if (!usable)
            continue;
        active.push_back(fid);
        const auto& links = fr->paths[static_cast<size_t>(chosen_path_.at(fid))].links;
        for (LinkIndex l : links) {
            auto& e = load[l];
            e.first += demand;
            e.second += 1;
        }
    }
    std::vector<std::pair<FlowId, Bps>> targets;
    for (FlowId fid : active) {
        auto& fr = sim_.rt(fid);
        int path = chosen_path_.at(fid);
        Bps extra = kHugeRate;
        for (LinkIndex l : fr.paths[static_cast<size_t>(path)].links) {
            const auto& lr = sim_.link_rt(l);
            const auto& e = load.at(l);
            Bps spare = std::max(0.0, lr.capacity - e.first - lr.reserved_total);
            extra = std::min(extra, spare / static_cast<double>(e.second));
        }
        if (extra >= kHugeRate)
            extra = 0.0;
        targets.push_back({fid, demands_.at(fid) + extra});
    }
    // shrink before growing so no link is transiently oversubscribed
    for (int phase = 0; phase < 2; ++phase)
        for (const auto& [fid, target] : targets) {
            auto& fr = sim_.rt(fid);
            size_t path = static_cast<size_t>(chosen_path_.at(fid));
            bool shrink = target < fr.path_rates[path];
            if ((phase == 0) != shrink)
                continue;
            std::vector<Bps> rates(fr.paths.size(), 0.0);
            rates[path] = target;
            sim_.set_path_rates(fid, rates);
        }
}

void FcfsScheduler::on_released(FlowId flow, bool) {
    demands_.erase(flow);
    chosen_path_.erase(flow);
    recompute_spares();
    schedule_capacity_wave(sim_, sim_.rt(flow));
}

void FcfsScheduler::on_expired(FlowId flow) {
    auto it = pending_.find(flow);
    if (it != pending_.end()) {
        auto& r = sim_.rt(flow);
        ResKey key{flow, it->second.id, it->second.path};
        for (LinkIndex l : r.paths[static_cast<size_t>(it->second.path)].links) {
            auto& lr = sim_.link_rt(l);
            auto res = lr.reserved.find(key);
            if (res != lr.reserved.end()) {
                lr.reserved_total -= res->second.amount;
                lr.reserved.erase(res);
            }
        }
        pending_.erase(it);
    }
    release_parked_sibling(flow);
    if (demands_.erase(flow)) {
        chosen_path_.erase(flow);
        recompute_spares();
    }
}

// --- Fairshare (multipath TCP caricature) ---

void FairshareScheduler::ensure_epoch_scheduled() {
    TimeNs now = sim_.now();
    if (next_epoch_ != kNoTime && next_epoch_ >= now)
        return;
    Event e;
    e.ts = now;
    e.kind = EventKind::RateRecompute;
    sim_.schedule(e);
    next_epoch_ = now;
}

bool FairshareScheduler::any_live() const {
    for (const auto& [fid, subs] : subflows_) {
        auto* fr = sim_.find(fid);
        if (fr && (fr->state == FlowState::Active || fr->state == FlowState::Pending) &&
            !fr->draining)
            return true;
    }
    return false;
}

void FairshareScheduler::on_arrival(FlowId flow) {
    auto& r = sim_.rt(flow);
    std::vector<Subflow> subs(r.paths.size());
    for (auto& s : subs)
        s.demand = sim_.config().fairshare_initial_rate;
    subflows_[flow] = std::move(subs);
    sim_.mark_active(flow);
    ensure_epoch_scheduled();
}

void FairshareScheduler::on_ctrl(const CtrlMsg& msg) {
    sim_.trace("ctrl", msg.flow,
               std::string(to_string(msg.kind)) + " at=" + std::to_string(msg.at));
}

void FairshareScheduler::on_released(FlowId flow, bool) { subflows_.erase(flow); }

void FairshareScheduler::on_expired(FlowId flow) { subflows_.erase(flow); }

void FairshareScheduler::on_epoch() {
    TimeNs now = sim_.now();

    struct Sub {
        FlowId flow;
        size_t path;
        Subflow* state;
        const std::vector<LinkIndex>* links;
    };
    std::vector<Sub> subs;
    for (auto& [fid, states] : subflows_) {
        auto* fr = sim_.find(fid);
        if (!fr || fr->state != FlowState::Active || fr->draining)
            continue;
        for (size_t p = 0; p < states.size(); ++p) {
            if (states[p].stalled_until > now)
                continue;
            subs.push_back({fid, p, &states[p], &fr->paths[p].links});
        }
    }

    // synthetic loss: any link whose aggregate demand exceeds capacity stalls
    // its highest-rate subflow for one RTO
    std::map<LinkIndex, std::vector<size_t>> by_link;
    for (size_t i = 0; i < subs.size(); ++i)
        for (LinkIndex l : *subs[i].links)
            by_link[l].push_back(i);
    std::set<size_t> stalled;
    for (const auto& [l, members] : by_link) {
        Bps demand = 0.0;
        for (size_t i : members)
            if (!stalled.count(i))
                demand += subs[i].state->demand;
        if (demand <= sim_.link_rt(l).capacity + kTinyRate)
            continue;
        // highest-rate subflow loses; ties drawn at random so the baseline
        // stays blind to the ordering of children
        std::vector<size_t> candidates;
        Bps best = -1.0;
        for (size_t i : members) {
            if (stalled.count(i))
                continue;
            Bps key = subs[i].state->allocated > kTinyRate ? subs[i].state->allocated
                                                           : subs[i].state->demand;
            if (key > best + kTinyRate) {
                best = key;
                candidates.assign(1, i);
            } else if (key > best - kTinyRate) {
                candidates.push_back(i);
            }
        }
        if (candidates.empty())
            continue;
        size_t victim = candidates.front();
        if (candidates.size() > 1) {
            std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
            victim = candidates[pick(sim_.rng())];
        }
        auto& v = *subs[victim].state;
        v.stalled_until = now + sim_.config().fairshare_rto;
        v.demand = std::max(v.demand / 2.0, 1e5);
        v.slow_start = false;
        v.allocated = 0.0;
        stalled.insert(victim);
        sim_.trace("ctrl", subs[victim].flow,
                   "RTO_STALL path=" + std::to_string(subs[victim].path) +
                       " link=" + std::to_string(l));
    }

    // progressive-fill max-min over the surviving subflows
    std::vector<size_t> open;
    for (size_t i = 0; i < subs.size(); ++i) {
        subs[i].state->allocated = 0.0;
        if (!stalled.count(i))
            open.push_back(i);
    }
    std::map<LinkIndex, Bps> residual;
    for (const auto& [l, members] : by_link)
        residual[l] = sim_.link_rt(l).capacity;
    std::vector<bool> frozen(subs.size(), false);
    for (size_t i : stalled)
        frozen[i] = true;
    while (true) {
        std::map<LinkIndex, int> open_count;
        size_t unfrozen = 0;
        for (size_t i = 0; i < subs.size(); ++i) {
            if (frozen[i])
                continue;
            ++unfrozen;
            for (LinkIndex l : *subs[i].links)
                open_count[l] += 1;
        }
        if (unfrozen == 0)
            break;
        Bps step = kHugeRate;
        for (const auto& [l, n] : open_count)
            step = std::min(step, residual[l] / static_cast<double>(n));
        for (size_t i = 0; i < subs.size(); ++i)
            if (!frozen[i])
                step = std::min(step, subs[i].state->demand - subs[i].state->allocated);
        if (step < 0.0)
            step = 0.0;
        for (size_t i = 0; i < subs.size(); ++i) {
            if (frozen[i])
                continue;
            subs[i].state->allocated += step;
            for (LinkIndex l : *subs[i].links)
                residual[l] -= step;
        }
        bool froze = false;
        for (size_t i = 0; i < subs.size(); ++i) {
            if (frozen[i])
                continue;
            if (subs[i].state->allocated + kTinyRate >= subs[i].state->demand) {
                frozen[i] = true;
                froze = true;
            }
        }
        for (const auto& [l, n] : open_count) {
            if (residual[l] > kTinyRate)
                continue;
            for (size_t i = 0; i < subs.size(); ++i) {
                if (frozen[i])
                    continue;
                if (std::find(subs[i].links->begin(), subs[i].links->end(), l) !=
                    subs[i].links->end()) {
                    frozen[i] = true;
                    froze = true;
                }
            }
        }
        if (!froze)
            break;
    }

    // apply rates, decreases first so no link transiently oversubscribes
    std::map<FlowId, std::vector<Bps>> rates;
    for (auto& [fid, states] : subflows_) {
        auto* fr = sim_.find(fid);
        if (!fr || fr->state != FlowState::Active || fr->draining)
            continue;
        rates[fid] = std::vector<Bps>(states.size(), 0.0);
    }
    for (const auto& s : subs)
        rates[s.flow][s.path] = s.state->allocated;
    for (auto& [fid, vec] : rates) {
        auto& fr = sim_.rt(fid);
        auto low = vec;
        for (size_t p = 0; p < low.size(); ++p)
            low[p] = std::min(low[p], fr.path_rates[p]);
        sim_.set_path_rates(fid, low);
    }
    for (auto& [fid, vec] : rates)
        sim_.set_path_rates(fid, vec);

    Bps cap = sim_.config().link_capacity;
    for (auto& [fid, states] : subflows_)
        for (auto& s : states) {
            if (s.stalled_until > now)
                continue;
            s.demand = s.slow_start
                           ? std::min(cap, s.demand * 2.0)
                           : std::min(cap, s.demand +
                                               sim_.config().fairshare_additive_increase);
        }

    if (any_live()) {
        Event e;
        e.ts = now + sim_.config().fairshare_epoch;
        e.kind = EventKind::RateRecompute;
        sim_.schedule(e);
        next_epoch_ = e.ts;
    } else {
        next_epoch_ = kNoTime;
    }
}

} // namespace impflow
