#include "impflow/topology.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

namespace impflow {

Topology Topology::bcube(int n, int k, Bps cap, TimeNs delay) {
    if (n < 2)
        throw SimError("bcube: port count n must be >= 2, got " + std::to_string(n));
    if (k < 0)
        throw SimError("bcube: level index k must be >= 0, got " + std::to_string(k));
    return bcube_mixed(std::vector<int>(static_cast<size_t>(k) + 1, n), cap, delay);
}

Topology Topology::bcube_mixed(const std::vector<int>& radices, Bps cap, TimeNs delay) {
    if (radices.empty())
        throw SimError("bcube: at least one level required");
    for (int r : radices)
        if (r < 2)
            throw SimError("bcube: every level radix must be >= 2");
    if (cap <= 0)
        throw SimError("bcube: link capacity must be positive");
    Topology t;
    t.radices_ = radices;
    t.build(cap, delay);
    return t;
}

void Topology::build(Bps capacity, TimeNs delay) {
    const int levels = static_cast<int>(radices_.size());
    level_weight_.assign(levels, 1);
    num_servers_ = 1;
    for (int l = 0; l < levels; ++l) {
        level_weight_[l] = num_servers_;
        num_servers_ *= radices_[l];
    }
    switch_base_.assign(levels, 0);
    num_switches_ = 0;
    for (int l = 0; l < levels; ++l) {
        switch_base_[l] = num_switches_;
        num_switches_ += num_servers_ / radices_[l];
    }

    adjacency_.assign(static_cast<size_t>(num_nodes()), {});
    links_.reserve(static_cast<size_t>(num_servers_) * levels * 2);
    for (NodeIndex s = 0; s < num_servers_; ++s) {
        const auto digits = server_digits(s);
        for (int l = 0; l < levels; ++l) {
            NodeIndex sw = switch_at(l, switch_index_for(digits, l));
            LinkIndex up = static_cast<LinkIndex>(links_.size());
            links_.push_back({s, sw, capacity, delay});
            LinkIndex down = static_cast<LinkIndex>(links_.size());
            links_.push_back({sw, s, capacity, delay});
            adjacency_[s].push_back({sw, up});
            adjacency_[sw].push_back({s, down});
        }
    }
    for (auto& adj : adjacency_)
        std::sort(adj.begin(), adj.end());
}

NodeKind Topology::kind(NodeIndex v) const {
    if (v < 0 || v >= num_nodes())
        throw SimError("unknown node " + std::to_string(v));
    return v < num_servers_ ? NodeKind::Server : NodeKind::Switch;
}

NodeId Topology::node_id(NodeIndex v) const {
    if (kind(v) == NodeKind::Server)
        return {NodeKind::Server, server_digits(v)};
    int sw = v - num_servers_;
    int level = 0;
    while (level + 1 < levels() && sw >= switch_base_[level + 1])
        ++level;
    return {NodeKind::Switch, {level, sw - switch_base_[level]}};
}

NodeIndex Topology::server_at(const std::vector<int>& digits) const {
    if (static_cast<int>(digits.size()) != levels())
        throw SimError("server_at: wrong digit count");
    int id = 0;
    for (int l = 0; l < levels(); ++l) {
        if (digits[l] < 0 || digits[l] >= radices_[l])
            throw SimError("server_at: digit out of range");
        id += digits[l] * level_weight_[l];
    }
    return id;
}

NodeIndex Topology::switch_at(int level, int index) const {
    return num_servers_ + switch_base_[level] + index;
}

std::vector<int> Topology::server_digits(NodeIndex server) const {
    std::vector<int> digits(levels(), 0);
    int rem = server;
    for (int l = levels() - 1; l >= 0; --l) {
        digits[l] = rem / level_weight_[l];
        rem %= level_weight_[l];
    }
    return digits;
}

int Topology::switch_index_for(const std::vector<int>& digits, int level) const {
    int idx = 0, weight = 1;
    for (int l = 0; l < levels(); ++l) {
        if (l == level)
            continue;
        idx += digits[l] * weight;
        weight *= radices_[l];
    }
    return idx;
}

LinkIndex Topology::link_between(NodeIndex a, NodeIndex b) const {
    for (const auto& [peer, link] : adjacency_[a])
        if (peer == b)
            return link;
    throw SimError("no link between nodes " + std::to_string(a) + " and " +
                   std::to_string(b));
}

std::vector<NodeIndex> Topology::neighbors(NodeIndex s) const {
    if (kind(s) != NodeKind::Server)
        throw SimError("neighbors: node " + std::to_string(s) + " is not a server");
    auto digits = server_digits(s);
    std::vector<NodeIndex> out;
    for (int l = 0; l < levels(); ++l) {
        const int own = digits[l];
        for (int d = 0; d < radices_[l]; ++d) {
            if (d == own)
                continue;
            digits[l] = d;
            out.push_back(server_at(digits));
        }
        digits[l] = own;
    }
    std::sort(out.begin(), out.end());
    return out;
}

NodeIndex Topology::attached_switch(NodeIndex server, int level) const {
    if (kind(server) != NodeKind::Server)
        throw SimError("attached_switch: not a server");
    return switch_at(level, switch_index_for(server_digits(server), level));
}

std::vector<NodeIndex> Topology::servers_on_switch(NodeIndex sw) const {
    if (kind(sw) != NodeKind::Switch)
        throw SimError("servers_on_switch: not a switch");
    std::vector<NodeIndex> out;
    for (const auto& [peer, link] : adjacency_[sw])
        out.push_back(peer);
    std::sort(out.begin(), out.end());
    return out;
}

// Digit-correction route: fix differing digits one per hop, starting at
// start_level and walking the levels cyclically downward.
std::vector<NodeIndex> Topology::correction_route(NodeIndex src, NodeIndex dst,
                                                  int start_level) const {
    const auto dst_digits = server_digits(dst);
    auto cur = server_digits(src);
    std::vector<NodeIndex> servers{src};
    const int n_levels = levels();
    for (int step = 0; step < n_levels; ++step) {
        int level = (start_level - step % n_levels + n_levels) % n_levels;
        if (cur[level] == dst_digits[level])
            continue;
        cur[level] = dst_digits[level];
        servers.push_back(server_at(cur));
    }
    return servers;
}

Path Topology::make_path(const std::vector<NodeIndex>& servers) const {
    Path p;
    p.nodes.push_back(servers.front());
    for (size_t i = 0; i + 1 < servers.size(); ++i) {
        NodeIndex a = servers[i], b = servers[i + 1];
        const auto da = server_digits(a);
        const auto db = server_digits(b);
        int level = -1;
        for (int l = 0; l < levels(); ++l)
            if (da[l] != db[l])
                level = l;
        NodeIndex sw = switch_at(level, switch_index_for(da, level));
        p.links.push_back(link_between(a, sw));
        p.links.push_back(link_between(sw, b));
        p.nodes.push_back(sw);
        p.nodes.push_back(b);
    }
    p.hop_count = static_cast<int>(p.links.size() / 2);
    return p;
}

std::vector<Path> Topology::disjoint_paths(NodeIndex src, NodeIndex dst) const {
    if (src == dst)
        throw SimError("disjoint_paths: src and dst must differ");
    if (kind(src) != NodeKind::Server || kind(dst) != NodeKind::Server)
        throw SimError("disjoint_paths: endpoints must be servers");

    const auto src_digits = server_digits(src);
    const auto dst_digits = server_digits(dst);
    std::vector<Path> paths;
    for (int level = levels() - 1; level >= 0; --level) {
        if (src_digits[level] != dst_digits[level]) {
            paths.push_back(make_path(correction_route(src, dst, level)));
        } else {
            // Detour through a neighbor differing only at this level, then
            // correct back, finishing at this level next to dst.
            auto detour = src_digits;
            detour[level] = (detour[level] + 1) % radices_[level];
            NodeIndex via = server_at(detour);
            auto route = correction_route(via, dst, (level - 1 + levels()) % levels());
            route.insert(route.begin(), src);
            paths.push_back(make_path(route));
        }
    }
    std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
        if (a.hop_count != b.hop_count)
            return a.hop_count < b.hop_count;
        return a.nodes < b.nodes;
    });
    return paths;
}

void Topology::set_link_capacity(NodeIndex a, NodeIndex b, Bps capacity) {
    if (capacity <= 0)
        throw SimError("set_link_capacity: capacity must be positive");
    links_[link_between(a, b)].capacity = capacity;
}

void Topology::dump(std::ostream& os) const {
    for (NodeIndex v = 0; v < num_nodes(); ++v) {
        os << v << ' ' << (is_server(v) ? "server" : "switch");
        for (const auto& [peer, link] : adjacency_[v])
            os << ' ' << peer;
        os << '\n';
    }
}

} // namespace impflow
