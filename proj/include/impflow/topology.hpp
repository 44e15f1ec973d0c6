#pragma once

#include <iosfwd>
#include <vector>

#include "impflow/types.hpp"

namespace impflow {

enum class NodeKind { Server, Switch };

// BCube addressing: a server is identified by one digit per level, a switch
// by (level, index) where index enumerates the digits of the attached servers
// at all other levels.
struct NodeId {
    NodeKind kind;
    std::vector<int> coords; // servers: digit per level; switches: {level, index}
};

struct Link {
    NodeIndex from;
    NodeIndex to;
    Bps capacity;
    TimeNs prop_delay;
};

// Alternating server/switch node sequence from src server to dst server.
struct Path {
    std::vector<NodeIndex> nodes;
    std::vector<LinkIndex> links;
    int hop_count = 0; // server-to-server hops (= links.size()/2)
};

class Topology {
public:
    // Uniform BCube(n, k): n^(k+1) servers, (k+1)*n^k switches, each server
    // attached to k+1 switches.
    static Topology bcube(int n, int k, Bps link_capacity = 1e9,
                          TimeNs link_prop_delay = 8'750);

    // Per-level radix variant; radices[l] is the digit range of level l.
    // Used for reduced topologies that are not uniform in every dimension.
    static Topology bcube_mixed(const std::vector<int>& radices,
                                Bps link_capacity = 1e9,
                                TimeNs link_prop_delay = 8'750);

    int levels() const { return static_cast<int>(radices_.size()); }
    int num_servers() const { return num_servers_; }
    int num_switches() const { return num_switches_; }
    int num_nodes() const { return num_servers_ + num_switches_; }
    size_t num_links() const { return links_.size(); }

    NodeKind kind(NodeIndex v) const;
    bool is_server(NodeIndex v) const { return kind(v) == NodeKind::Server; }
    NodeId node_id(NodeIndex v) const;

    NodeIndex server_at(const std::vector<int>& digits) const;
    NodeIndex switch_at(int level, int index) const;
    std::vector<int> server_digits(NodeIndex server) const;

    const Link& link(LinkIndex l) const { return links_[l]; }
    // Directed link a->b; throws if the nodes are not adjacent.
    LinkIndex link_between(NodeIndex a, NodeIndex b) const;

    // All servers sharing at least one switch with s, excluding s.
    std::vector<NodeIndex> neighbors(NodeIndex s) const;

    // The switch a server attaches to at the given level.
    NodeIndex attached_switch(NodeIndex server, int level) const;
    // The n servers on a switch, ascending.
    std::vector<NodeIndex> servers_on_switch(NodeIndex sw) const;

    // k+1 pairwise link-disjoint paths, shortest first, ties broken by
    // lexicographic node sequence.
    std::vector<Path> disjoint_paths(NodeIndex src, NodeIndex dst) const;

    // Test/fixture hook: override capacity of the directed link a->b.
    void set_link_capacity(NodeIndex a, NodeIndex b, Bps capacity);

    // Line-oriented adjacency dump: `node_id kind neighbor_ids...`.
    void dump(std::ostream& os) const;

private:
    Topology() = default;
    void build(Bps capacity, TimeNs delay);
    int switch_index_for(const std::vector<int>& digits, int level) const;
    Path make_path(const std::vector<NodeIndex>& servers) const;
    std::vector<NodeIndex> correction_route(NodeIndex src, NodeIndex dst,
                                            int start_level) const;

    std::vector<int> radices_;
    int num_servers_ = 0;
    int num_switches_ = 0;
    std::vector<int> level_weight_;   // digit weight per level in server index
    std::vector<int> switch_base_;    // first switch index per level
    std::vector<Link> links_;
    // adjacency_[node] = sorted list of (peer, out-link index)
    std::vector<std::vector<std::pair<NodeIndex, LinkIndex>>> adjacency_;
};

} // namespace impflow
