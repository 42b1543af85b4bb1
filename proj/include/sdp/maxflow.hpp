#pragma once

#include <deque>
#include <vector>

namespace sdp {

/// s-t min-cut / max-flow on a directed graph with real capacities, using
/// the Boykov-Kolmogorov search-tree algorithm (augmenting paths with tree
/// reuse). Terminal links are folded into one signed residual per node.
///
/// After maxflow(), in_sink_segment(i) tells which side of a minimum cut
/// node i falls on; nodes unreachable from either terminal are reported on
/// the source side.
class MaxFlowGraph {
public:
    explicit MaxFlowGraph(int node_count, int edge_hint = 0);

    int node_count() const noexcept { return static_cast<int>(nodes_.size()); }

    /// Adds capacity from the source to i and from i to the sink.
    void add_tweights(int i, double cap_source, double cap_sink);

    /// Adds arc i->j with capacity cap and j->i with capacity rev_cap.
    void add_edge(int i, int j, double cap, double rev_cap);

    double maxflow();

    bool in_sink_segment(int i) const;

private:
    static constexpr int kNone = -1;
    static constexpr int kTerminal = -2;
    static constexpr int kOrphan = -3;

    struct Node {
        int first = kNone;   // first outgoing arc
        int parent = kNone;  // arc to the parent, or kTerminal / kOrphan / kNone
        bool is_sink = false;
        bool active = false;
        long ts = 0;
        int dist = 0;
        double tr_cap = 0.0;  // > 0: residual from source, < 0: residual to sink
    };
    struct Arc {
        int head = 0;
        int next = kNone;
        double r_cap = 0.0;
    };

    static int sister(int a) noexcept { return a ^ 1; }

    void set_active(int i);
    int next_active();
    void augment(int middle);
    void process_source_orphan(int i);
    void process_sink_orphan(int i);

    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::deque<int> active_;
    std::deque<int> orphans_;
    double flow_ = 0.0;
    long time_ = 0;
};

}  // namespace sdp
