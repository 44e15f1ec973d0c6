#include "impflow/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "impflow/textio.hpp"

namespace impflow {

namespace {
constexpr Bps kHugeRate = 1e30;
constexpr double kTinyRate = 1e-6;
} // namespace

std::vector<Bps> proportional_requests(Bps demand, const std::vector<Bps>& estimates) {
    if (estimates.empty())
        throw SimError("proportional_requests: no paths");
    Bps total = 0.0;
    for (Bps e : estimates)
        total += std::max(0.0, e);
    std::vector<Bps> out(estimates.size(), 0.0);
    if (total <= 0.0) {
        for (auto& v : out)
            v = demand / static_cast<double>(estimates.size());
        return out;
    }
    for (size_t i = 0; i < estimates.size(); ++i)
        out[i] = demand * std::max(0.0, estimates[i]) / total;
    return out;
}

std::vector<Bps> final_rates(Bps demand, const std::vector<Bps>& grants) {
    if (grants.empty())
        throw SimError("final_rates: no paths");
    Bps total = 0.0;
    for (Bps g : grants)
        total += std::max(0.0, g);
    if (total <= 0.0)
        throw SimError("final_rates: no granted capacity");
    std::vector<Bps> out(grants.size(), 0.0);
    for (size_t i = 0; i < grants.size(); ++i)
        out[i] = demand * std::max(0.0, grants[i]) / total;
    return out;
}

bool admission_check(double new_fic, const std::vector<double>& victim_fics) {
    double sum = 0.0;
    for (double f : victim_fics)
        sum += f;
    return new_fic > sum;
}

LinkAllocPlan allocate_rate_on_link(const LinkAllocInput& in, Bps desired,
                                    double fic_budget) {
    LinkAllocPlan plan;
    if (desired < 0.0)
        throw SimError("allocate_rate_on_link: negative desired rate");
    if (in.free + kTinyRate >= desired) {
        Bps spare = std::max(0.0, in.free - desired);
        Bps share = 0.0;
        if (spare > 0.0 && fic_budget > 0.0)
            share = spare * fic_budget / (fic_budget + in.competing_fic_sum);
        plan.grant = desired + share;
        return plan;
    }

    auto order = in.flows;
    std::sort(order.begin(), order.end(), [](const ExistingFlow& a, const ExistingFlow& b) {
        if (a.fic != b.fic)
            return a.fic < b.fic; // least important victims first
        if (a.deadline != b.deadline)
            return a.deadline > b.deadline; // earlier deadlines survive longer
        return a.id > b.id;
    });

    Bps freed = in.free;
    std::map<FlowId, Bps> my_shed;
    for (const auto& f : order) {
        if (freed + kTinyRate >= desired)
            break;
        if (f.shed_excess <= kTinyRate)
            continue;
        Bps amt = std::min(f.shed_excess, desired - freed);
        plan.sheds.push_back({f.id, amt});
        my_shed[f.id] = amt;
        plan.backing += amt;
        freed += amt;
    }
    double budget = fic_budget;
    for (const auto& f : order) {
        if (freed + kTinyRate >= desired)
            break;
        Bps preemptable = f.rate_on_link;
        auto it = my_shed.find(f.id);
        if (it != my_shed.end())
            preemptable -= it->second;
        if (preemptable <= kTinyRate)
            continue;
        if (budget < f.fic)
            break; // EXTRACT-MIN-FIC exhausted the request's budget
        plan.victims.push_back(f.id);
        plan.backing += preemptable;
        plan.fic_spent += f.fic;
        budget -= f.fic;
        freed += preemptable;
    }
    plan.grant = std::min(desired, std::max(0.0, freed));
    return plan;
}

std::vector<Bps> fic_proportional_shares(Bps spare, const std::vector<double>& fics) {
    std::vector<Bps> out(fics.size(), 0.0);
    double total = 0.0;
    for (double f : fics)
        total += std::max(0.0, f);
    if (spare <= 0.0 || total <= 0.0)
        return out;
    for (size_t i = 0; i < fics.size(); ++i)
        out[i] = spare * std::max(0.0, fics[i]) / total;
    return out;
}

void schedule_capacity_wave(Simulator& sim, const FlowRuntime& rt) {
    std::map<NodeIndex, int> dist;
    for (const auto& path : rt.paths)
        for (size_t i = 0; i < path.nodes.size(); i += 2) {
            NodeIndex node = path.nodes[i];
            int d = static_cast<int>(i / 2);
            auto it = dist.find(node);
            if (it == dist.end() || it->second > d)
                dist[node] = d;
        }
    std::vector<std::pair<NodeIndex, int>> relays(dist.begin(), dist.end());
    for (const auto& [node, d] : relays)
        for (NodeIndex nb : sim.topo().neighbors(node)) {
            auto it = dist.find(nb);
            if (it == dist.end() || it->second > d + 1)
                dist[nb] = d + 1;
        }
    for (const auto& [node, d] : dist) {
        CtrlMsg m;
        m.kind = CtrlKind::CompleteNotify;
        m.flow = rt.flow.id;
        m.about = rt.flow.id;
        m.at = node;
        m.hop = d;
        sim.schedule_ctrl(sim.now() + d * sim.ctrl_hop_latency() +
                              sim.config().processing_delay,
                          m);
    }
}

// --- ImportanceScheduler ---

TimeNs ImportanceScheduler::response_time(TimeNs t0, int hops) const {
    const auto& c = sim_.config();
    TimeNs hop_travel = 2 * c.link_prop_delay;
    TimeNs last_request = t0 + c.processing_delay +
                          static_cast<TimeNs>(hops - 1) * sim_.ctrl_hop_latency();
    return last_request + static_cast<TimeNs>(hops - 1) * hop_travel + c.processing_delay;
}

TimeNs ImportanceScheduler::decision_time(TimeNs t0, const std::vector<Path>& paths) const {
    TimeNs t = t0;
    for (const auto& p : paths)
        t = std::max(t, response_time(t0, p.hop_count));
    return t;
}

void ImportanceScheduler::on_arrival(FlowId flow) {
    auto& r = sim_.rt(flow);
    flows_by_src_[r.flow.src].push_back(flow);
    initiate(flow);
}

void ImportanceScheduler::initiate(FlowId flow) {
    auto& r = sim_.rt(flow);
    if (r.state == FlowState::Active || r.state == FlowState::Completed ||
        r.state == FlowState::Expired)
        return;
    if (pending_.count(flow))
        return;
    TimeNs now = sim_.now();
    if (now >= r.flow.deadline || r.remaining_bits <= 0.0)
        return;
    r.attempts += 1;
    r.last_attempt = now;

    TimeNs t_dec = decision_time(now, r.paths);
    TimeNs delta = 0;
    for (const auto& p : r.paths)
        delta = std::max(delta, sim_.path_delay(p));
    TimeNs budget_ns = r.flow.deadline - t_dec - delta;
    if (budget_ns <= 0) {
        sim_.trace("reject", flow, "deadline-too-close");
        if (r.state == FlowState::Pending)
            sim_.suspend_flow(flow, "deadline-too-close");
        return;
    }
    Bps demand = r.remaining_bits / ns_to_s(budget_ns);

    std::vector<Bps> estimates;
    estimates.reserve(r.paths.size());
    for (const auto& p : r.paths) {
        Bps est = std::min(claimable(p.links[0]), claimable(p.links[1]));
        estimates.push_back(est);
    }
    Attempt a;
    a.id = r.attempts;
    a.t0 = now;
    a.demand = demand;
    a.desired = proportional_requests(demand, estimates);
    // every path's request carries the flow's own FIC as its preemption
    // budget; consumed victims decrement it hop by hop
    double fic_now = r.current_fic(now);
    a.budgets.assign(r.paths.size(), fic_now);
    a.grants.assign(r.paths.size(), 0.0);
    pending_[flow] = a;

    for (size_t p = 0; p < r.paths.size(); ++p) {
        CtrlMsg m;
        m.kind = CtrlKind::RateRequest;
        m.flow = flow;
        m.attempt = a.id;
        m.path = static_cast<int>(p);
        m.hop = 0;
        m.at = r.flow.src;
        m.grant = kHugeRate;
        m.desired = a.desired[p];
        m.demand = demand;
        m.budget = a.budgets[p];
        sim_.schedule_ctrl(now + sim_.config().processing_delay, m);
    }
}

Bps ImportanceScheduler::claimable(LinkIndex link) const {
    Bps shield = 0.0;
    if (auto it = shield_.find(link); it != shield_.end())
        shield = it->second;
    return std::max(0.0, sim_.link_rt(link).available() - shield);
}

LinkAllocInput ImportanceScheduler::snapshot(LinkIndex link, FlowId requester,
                                             const Attempt& a) const {
    const auto& lr = sim_.link_rt(link);
    LinkAllocInput in;
    in.free = claimable(link);
    TimeNs now = sim_.now();
    for (const auto& [fid, rate] : lr.committed) {
        if (fid == requester)
            continue;
        auto* vr = sim_.find(fid);
        if (!vr || vr->state != FlowState::Active || vr->draining)
            continue;
        int vp = -1;
        for (size_t p = 0; p < vr->paths.size(); ++p) {
            const auto& links = vr->paths[p].links;
            if (std::find(links.begin(), links.end(), link) != links.end()) {
                vp = static_cast<int>(p);
                break;
            }
        }
        if (vp < 0)
            continue;
        Bps pending_here = 0.0, pending_total = 0.0;
        for (const auto& [key, amt] : pending_shed_) {
            if (key.first != fid)
                continue;
            pending_total += amt;
            if (key.second == vp)
                pending_here += amt;
        }
        Bps mine_here = 0.0;
        if (auto it = a.planned_sheds.find({fid, vp}); it != a.planned_sheds.end())
            mine_here = it->second;

        if (a.planned_victims.count(fid)) {
            // claimed by a sibling path of this attempt: its whole rate frees
            // at our commit, less what other pending attempts will shed first
            in.free += std::max(0.0, rate - (pending_here - mine_here));
            continue;
        }
        // cuts this attempt already planned on the victim's path free
        // capacity on this link too
        in.free += mine_here;
        if (pending_preempt_.count(fid))
            continue; // spoken for by another pending attempt
        ExistingFlow ef;
        ef.id = fid;
        ef.fic = vr->current_fic(now);
        ef.victim_path = vp;
        ef.rate_on_link = std::max(0.0, rate - pending_here);
        TimeNs budget = vr->flow.deadline - now - sim_.delivery_delay(*vr);
        double floor = budget > 0 ? vr->remaining_bits_at(now) / ns_to_s(budget)
                                  : kHugeRate;
        Bps excess = std::max(0.0, vr->total_rate() - floor - pending_total);
        ef.shed_excess = std::max(0.0, std::min(ef.rate_on_link, excess));
        ef.deadline = vr->flow.deadline;
        in.competing_fic_sum += ef.fic;
        in.flows.push_back(ef);
    }
    return in;
}

void ImportanceScheduler::handle_request(CtrlMsg msg) {
    auto it = pending_.find(msg.flow);
    if (it == pending_.end() || it->second.id != msg.attempt)
        return; // stale: the attempt was decided or cancelled
    auto& a = it->second;
    auto& r = sim_.rt(msg.flow);
    const Path& path = r.paths[static_cast<size_t>(msg.path)];
    const int hop = msg.hop;
    NodeIndex relay = path.nodes[static_cast<size_t>(2 * hop)];

    TimeNs now = sim_.now();
    Bps node_grant = kHugeRate;
    for (int side = 0; side < 2; ++side) {
        LinkIndex l = path.links[static_cast<size_t>(2 * hop + side)];
        auto& lr = sim_.link_rt(l);

        // A short grant may be blocked by cheaper pending bookings rather
        // than by running flows: displace the cheapest one within the FIC
        // budget and replan against the refreshed state.
        LinkAllocInput in;
        LinkAllocPlan plan;
        for (;;) {
            in = snapshot(l, msg.flow, a);
            plan = allocate_rate_on_link(in, msg.desired, msg.budget);
            if (plan.grant + kTinyRate >= msg.desired)
                break;
            FlowId cheapest = -1;
            double cheapest_fic = 0.0;
            for (const auto& [key, res] : lr.reserved) {
                FlowId owner = std::get<0>(key);
                if (owner == msg.flow || res.amount <= kTinyRate)
                    continue;
                auto pit = pending_.find(owner);
                if (pit == pending_.end() || pit->second.id != std::get<1>(key))
                    continue;
                auto* vr = sim_.find(owner);
                if (!vr)
                    continue;
                double fic = vr->current_fic(now);
                if (cheapest < 0 || fic < cheapest_fic) {
                    cheapest = owner;
                    cheapest_fic = fic;
                }
            }
            if (cheapest < 0 || msg.budget - plan.fic_spent < cheapest_fic)
                break;
            msg.budget -= cheapest_fic;
            revoke_attempt(cheapest);
        }
        msg.budget -= plan.fic_spent;

        Reservation res;
        res.amount = std::min(plan.grant, msg.demand);
        res.preempt_victims = plan.victims;
        res.witness = relay;
        ResKey key{msg.flow, msg.attempt, msg.path};
        lr.reserved[key] = res;
        lr.reserved_total += res.amount;
        for (FlowId v : plan.victims)
            if (a.planned_victims.insert(v).second) {
                a.victim_order.push_back({v, relay});
                pending_preempt_[v] += 1;
            }
        for (const auto& shed : plan.sheds) {
            int vp = 0;
            for (const auto& ef : in.flows)
                if (ef.id == shed.victim) {
                    vp = ef.victim_path;
                    break;
                }
            VictimPath key2{shed.victim, vp};
            a.planned_sheds[key2] += shed.amount;
            pending_shed_[key2] += shed.amount;
        }
        if (plan.backing > 0.0) {
            a.backing[l] += plan.backing;
            shield_[l] += plan.backing;
        }
        node_grant = std::min(node_grant, plan.grant);
    }
    msg.grant = std::min(msg.grant, node_grant);

    if (hop + 1 < path.hop_count) {
        CtrlMsg fwd = msg;
        fwd.hop = hop + 1;
        fwd.at = path.nodes[static_cast<size_t>(2 * (hop + 1))];
        sim_.schedule_ctrl(sim_.now() + sim_.ctrl_hop_latency(), fwd);
    } else {
        CtrlMsg resp;
        resp.kind = CtrlKind::RateResponse;
        resp.flow = msg.flow;
        resp.attempt = msg.attempt;
        resp.path = msg.path;
        resp.at = r.flow.src;
        resp.grant = msg.grant;
        TimeNs travel = static_cast<TimeNs>(path.hop_count - 1) * 2 *
                        sim_.config().link_prop_delay;
        sim_.schedule_ctrl(sim_.now() + travel + sim_.config().processing_delay, resp);
    }
}

void ImportanceScheduler::handle_response(const CtrlMsg& msg) {
    auto it = pending_.find(msg.flow);
    if (it == pending_.end() || it->second.id != msg.attempt)
        return;
    auto& a = it->second;
    a.grants[static_cast<size_t>(msg.path)] = msg.grant;
    a.responses += 1;
    if (a.responses == a.grants.size())
        decide(msg.flow, a);
}

void ImportanceScheduler::revoke_attempt(FlowId owner) {
    auto it = pending_.find(owner);
    if (it == pending_.end())
        return;
    release_attempt(owner, it->second, false);
    pending_.erase(it);
    sim_.trace("reject", owner, "displaced");
    auto& r = sim_.rt(owner);
    if (r.state == FlowState::Pending || r.state == FlowState::Suspended)
        sim_.suspend_flow(owner, "displaced");
}

// Drops the attempt's reservations and shed bookkeeping; when `execute` is
// set, carries out the planned rate releases first (all of them: sibling
// paths counted on each other's victims).
void ImportanceScheduler::release_attempt(FlowId flow, const Attempt& a, bool execute) {
    auto& r = sim_.rt(flow);
    for (size_t p = 0; p < r.paths.size(); ++p) {
        ResKey key{flow, a.id, static_cast<int>(p)};
        for (LinkIndex l : r.paths[p].links) {
            auto& lr = sim_.link_rt(l);
            auto it = lr.reserved.find(key);
            if (it != lr.reserved.end()) {
                lr.reserved_total -= it->second.amount;
                lr.reserved.erase(it);
            }
        }
    }
    for (const auto& [key, amt] : a.planned_sheds) {
        auto it = pending_shed_.find(key);
        if (it != pending_shed_.end()) {
            it->second -= amt;
            if (it->second <= kTinyRate)
                pending_shed_.erase(it);
        }
    }
    for (FlowId v : a.planned_victims) {
        auto it = pending_preempt_.find(v);
        if (it != pending_preempt_.end() && --it->second <= 0)
            pending_preempt_.erase(it);
    }
    for (const auto& [l, amt] : a.backing) {
        auto it = shield_.find(l);
        if (it != shield_.end()) {
            it->second -= amt;
            if (it->second <= kTinyRate)
                shield_.erase(it);
        }
    }
    if (!execute)
        return;
    for (const auto& [key, amt] : a.planned_sheds) {
        auto* vr = sim_.find(key.first);
        if (!vr || vr->state != FlowState::Active || vr->draining)
            continue;
        size_t vp = static_cast<size_t>(key.second);
        Bps cur = vr->path_rates[vp];
        Bps actual = std::min(amt, cur);
        if (actual <= kTinyRate)
            continue;
        auto rates = vr->path_rates;
        rates[vp] = cur - actual;
        sim_.set_path_rates(key.first, rates);
    }
    for (const auto& [victim, witness] : a.victim_order)
        execute_suspension(victim, witness);
}

void ImportanceScheduler::execute_suspension(FlowId victim, NodeIndex witness) {
    auto* vr = sim_.find(victim);
    if (!vr || vr->state != FlowState::Active || vr->draining)
        return;
    TimeNs now = sim_.now();
    SuspensionRecord rec;
    rec.flow = victim;
    rec.suspending_node = witness;
    rec.source = vr->flow.src;
    rec.deadline = vr->flow.deadline;
    rec.fic_at_suspension = vr->current_fic(now);
    rec.remaining_bytes = vr->remaining_bits_at(now) / 8.0;
    sim_.suspend_flow(victim, "preempted");
    witnesses_[witness][victim] = rec;
    witness_of_[victim] = witness;

    CtrlMsg m;
    m.kind = CtrlKind::SuspendNotify;
    m.flow = victim;
    m.about = victim;
    m.at = vr->flow.src;
    TimeNs d = witness == vr->flow.src
                   ? sim_.config().processing_delay
                   : sim_.hop_distance(witness, vr->flow.src) * sim_.ctrl_hop_latency() +
                         sim_.config().processing_delay;
    sim_.schedule_ctrl(now + d, m);
}

void ImportanceScheduler::decide(FlowId flow, Attempt& a) {
    auto& r = sim_.rt(flow);
    TimeNs now = sim_.now();
    Bps total_grant = 0.0;
    for (Bps g : a.grants)
        total_grant += g;

    if (total_grant + kTinyRate < a.demand || now >= r.flow.deadline) {
        release_attempt(flow, a, false);
        std::string detail = "demand=" + fmt_rate(a.demand) + " granted=" + fmt_rate(total_grant);
        pending_.erase(flow);
        sim_.trace("reject", flow, detail);
        if (r.state == FlowState::Pending || r.state == FlowState::Suspended)
            sim_.suspend_flow(flow, "insufficient-grant");
        return;
    }

    auto finals = final_rates(a.demand, a.grants);
    Attempt done = a;
    pending_.erase(flow);
    release_attempt(flow, done, true);

    sim_.set_path_rates(flow, finals);
    sim_.mark_active(flow);

    // The requester claims its FIC share of whatever is still free on its
    // paths; everyone else gets theirs at the next completion.
    double fic_now = r.current_fic(now);
    bool extra_any = false;
    auto boosted = finals;
    for (size_t p = 0; p < r.paths.size(); ++p) {
        if (finals[p] <= kTinyRate && done.grants[p] <= kTinyRate)
            continue;
        Bps extra = kHugeRate;
        for (LinkIndex l : r.paths[p].links) {
            const auto& lr = sim_.link_rt(l);
            double competing = 0.0;
            for (const auto& [fid, rate] : lr.committed) {
                if (fid == flow)
                    continue;
                auto* o = sim_.find(fid);
                if (o && o->state == FlowState::Active && !o->draining)
                    competing += o->current_fic(now);
            }
            Bps share = fic_now > 0.0
                            ? claimable(l) * fic_now / (fic_now + competing)
                            : 0.0;
            extra = std::min(extra, share);
        }
        if (extra > kTinyRate && extra < kHugeRate) {
            boosted[p] += extra;
            extra_any = true;
        }
    }
    if (extra_any)
        sim_.set_path_rates(flow, boosted);

    for (size_t p = 0; p < r.paths.size(); ++p) {
        if (boosted[p] <= kTinyRate)
            continue;
        const auto& path = r.paths[p];
        for (int j = 1; j <= path.hop_count; ++j) {
            CtrlMsg m;
            m.kind = CtrlKind::AllocationNotify;
            m.flow = flow;
            m.about = flow;
            m.at = path.nodes[static_cast<size_t>(2 * j)];
            sim_.schedule_ctrl(now + j * sim_.ctrl_hop_latency(), m);
        }
    }
}

// FIC-proportional spare distribution over the links this server can see,
// capped per flow by the residual along the rest of its path.
void ImportanceScheduler::redistribute_at(NodeIndex node) {
    TimeNs now = sim_.now();
    const auto& topo = sim_.topo();
    std::vector<LinkIndex> local;
    for (int level = 0; level < topo.levels(); ++level) {
        NodeIndex sw = topo.attached_switch(node, level);
        for (NodeIndex s : topo.servers_on_switch(sw)) {
            local.push_back(topo.link_between(s, sw));
            local.push_back(topo.link_between(sw, s));
        }
    }
    std::sort(local.begin(), local.end());

    for (LinkIndex l : local) {
        auto& lr = sim_.link_rt(l);
        for (int round = 0; round < 32; ++round) {
            Bps free = claimable(l);
            if (free <= kTinyRate)
                break;
            std::vector<FlowId> ids;
            std::vector<double> fics;
            for (const auto& [fid, rate] : lr.committed) {
                auto* fr = sim_.find(fid);
                if (!fr || fr->state != FlowState::Active || fr->draining)
                    continue;
                ids.push_back(fid);
                fics.push_back(fr->current_fic(now));
            }
            if (ids.empty())
                break;
            auto shares = fic_proportional_shares(free, fics);
            bool progress = false;
            for (size_t i = 0; i < ids.size(); ++i) {
                if (shares[i] <= kTinyRate)
                    continue;
                auto& fr = sim_.rt(ids[i]);
                size_t vp = 0;
                for (; vp < fr.paths.size(); ++vp) {
                    const auto& links = fr.paths[vp].links;
                    if (std::find(links.begin(), links.end(), l) != links.end())
                        break;
                }
                if (vp == fr.paths.size())
                    continue;
                Bps headroom = free;
                for (LinkIndex l2 : fr.paths[vp].links)
                    headroom = std::min(headroom, claimable(l2));
                Bps bump = std::min(shares[i], headroom);
                if (bump <= kTinyRate)
                    continue;
                auto rates = fr.path_rates;
                rates[vp] += bump;
                sim_.set_path_rates(ids[i], rates);
                progress = true;
            }
            if (!progress)
                break;
        }
    }
}

void ImportanceScheduler::handle_capacity_notify(const CtrlMsg& msg) {
    NodeIndex node = msg.at;
    TimeNs now = sim_.now();

    auto wit = witnesses_.find(node);
    if (wit != witnesses_.end() && !wit->second.empty()) {
        std::vector<SuspensionRecord> recs;
        recs.reserve(wit->second.size());
        for (const auto& [fid, rec] : wit->second)
            recs.push_back(rec);
        std::sort(recs.begin(), recs.end(),
                  [](const SuspensionRecord& a, const SuspensionRecord& b) {
                      if (a.fic_at_suspension != b.fic_at_suspension)
                          return a.fic_at_suspension > b.fic_at_suspension;
                      if (a.deadline != b.deadline)
                          return a.deadline < b.deadline;
                      return a.flow < b.flow;
                  });
        for (const auto& rec : recs) {
            wit->second.erase(rec.flow);
            witness_of_.erase(rec.flow);
            auto* vr = sim_.find(rec.flow);
            if (!vr || vr->state != FlowState::Suspended || now >= rec.deadline)
                continue;
            CtrlMsg m;
            m.kind = CtrlKind::RecoverHint;
            m.flow = rec.flow;
            m.about = rec.flow;
            m.at = rec.source;
            TimeNs d = node == rec.source
                           ? sim_.config().processing_delay
                           : sim_.hop_distance(node, rec.source) * sim_.ctrl_hop_latency() +
                                 sim_.config().processing_delay;
            sim_.schedule_ctrl(now + d, m);
        }
    }

    auto by_src = flows_by_src_.find(node);
    if (by_src != flows_by_src_.end()) {
        for (FlowId f : by_src->second) {
            auto& r = sim_.rt(f);
            if (r.state != FlowState::Suspended || witness_of_.count(f) ||
                pending_.count(f))
                continue;
            if (now >= r.flow.deadline)
                continue;
            if (r.last_attempt != kNoTime &&
                now - r.last_attempt < sim_.config().retry_spacing)
                continue;
            initiate(f);
        }
    }

    redistribute_at(node);
}

void ImportanceScheduler::on_ctrl(const CtrlMsg& msg) {
    std::string detail = std::string(to_string(msg.kind)) + " at=" + std::to_string(msg.at);
    if (msg.about >= 0)
        detail += " about=" + std::to_string(msg.about);
    sim_.trace("ctrl", msg.flow, detail);
    switch (msg.kind) {
    case CtrlKind::RateRequest:
        handle_request(msg);
        break;
    case CtrlKind::RateResponse:
        handle_response(msg);
        break;
    case CtrlKind::CompleteNotify:
        handle_capacity_notify(msg);
        break;
    case CtrlKind::RecoverHint: {
        auto* r = sim_.find(msg.about);
        if (r && r->state == FlowState::Suspended && sim_.now() < r->flow.deadline &&
            !pending_.count(msg.about))
            initiate(msg.about);
        break;
    }
    case CtrlKind::AllocationNotify:
    case CtrlKind::SuspendNotify:
    case CtrlKind::CancelRequest:
        break; // bookkeeping visibility only
    }
}

void ImportanceScheduler::on_released(FlowId flow, bool) {
    schedule_capacity_wave(sim_, sim_.rt(flow));
}

void ImportanceScheduler::on_expired(FlowId flow) {
    auto it = pending_.find(flow);
    if (it != pending_.end()) {
        release_attempt(flow, it->second, false);
        pending_.erase(it);
    }
}

} // namespace impflow
