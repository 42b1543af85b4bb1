#include "sdp/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "sdp/error.hpp"

namespace sdp {

MaxFlowGraph::MaxFlowGraph(int node_count, int edge_hint) {
    if (node_count < 0) throw ValidationError("node count must be non-negative");
    nodes_.resize(node_count);
    arcs_.reserve(static_cast<std::size_t>(std::max(edge_hint, 0)) * 2);
}

void MaxFlowGraph::add_tweights(int i, double cap_source, double cap_sink) {
    if (i < 0 || i >= node_count()) throw ValidationError("node index out of range");
    if (cap_source < 0.0 || cap_sink < 0.0) throw ValidationError("terminal capacities must be non-negative");
    double delta = nodes_[i].tr_cap;
    if (delta > 0.0) cap_source += delta;
    else cap_sink -= delta;
    flow_ += std::min(cap_source, cap_sink);
    nodes_[i].tr_cap = cap_source - cap_sink;
}

void MaxFlowGraph::add_edge(int i, int j, double cap, double rev_cap) {
    if (i < 0 || j < 0 || i >= node_count() || j >= node_count()) throw ValidationError("node index out of range");
    if (cap < 0.0 || rev_cap < 0.0) throw ValidationError("edge capacities must be non-negative");
    if (i == j) return;
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back({j, nodes_[i].first, cap});
    arcs_.push_back({i, nodes_[j].first, rev_cap});
    nodes_[i].first = a;
    nodes_[j].first = a + 1;
}

void MaxFlowGraph::set_active(int i) {
    if (nodes_[i].active) return;
    nodes_[i].active = true;
    active_.push_back(i);
}

int MaxFlowGraph::next_active() {
    while (!active_.empty()) {
        const int i = active_.front();
        active_.pop_front();
        nodes_[i].active = false;
        if (nodes_[i].parent != kNone) return i;
    }
    return kNone;
}

void MaxFlowGraph::augment(int middle) {
    // middle runs from a source-tree node to a sink-tree node.
    double bottleneck = arcs_[middle].r_cap;
    int i = arcs_[sister(middle)].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[sister(a)].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, nodes_[i].tr_cap);
    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[a].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

    arcs_[sister(middle)].r_cap += bottleneck;
    arcs_[middle].r_cap -= bottleneck;

    i = arcs_[sister(middle)].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        arcs_[a].r_cap += bottleneck;
        arcs_[sister(a)].r_cap -= bottleneck;
        if (arcs_[sister(a)].r_cap <= 0.0) {
            nodes_[i].parent = kOrphan;
            orphans_.push_front(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr_cap -= bottleneck;
    if (nodes_[i].tr_cap <= 0.0) {
        nodes_[i].parent = kOrphan;
        orphans_.push_front(i);
    }

    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) break;
        arcs_[sister(a)].r_cap += bottleneck;
        arcs_[a].r_cap -= bottleneck;
        if (arcs_[a].r_cap <= 0.0) {
            nodes_[i].parent = kOrphan;
            orphans_.push_front(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr_cap += bottleneck;
    if (nodes_[i].tr_cap >= 0.0) {
        nodes_[i].parent = kOrphan;
        orphans_.push_front(i);
    }

    flow_ += bottleneck;
}

void MaxFlowGraph::process_source_orphan(int i) {
    constexpr int kInf = std::numeric_limits<int>::max();
    int a0_min = kNone;
    int d_min = kInf;
    for (int a0 = nodes_[i].first; a0 != kNone; a0 = arcs_[a0].next) {
        if (arcs_[sister(a0)].r_cap <= 0.0) continue;
        int j = arcs_[a0].head;
        if (nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
        // Walk toward the root to make sure j still hangs off the source.
        int d = 0;
        for (;;) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInf;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInf) {
            if (d < d_min) {
                a0_min = a0;
                d_min = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }

    nodes_[i].parent = a0_min;
    if (a0_min != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = d_min + 1;
        return;
    }
    // No valid parent: i becomes free; neighbors may need to re-grow or re-parent.
    for (int a0 = nodes_[i].first; a0 != kNone; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (nodes_[j].is_sink || a == kNone) continue;
        if (arcs_[sister(a0)].r_cap > 0.0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

void MaxFlowGraph::process_sink_orphan(int i) {
    constexpr int kInf = std::numeric_limits<int>::max();
    int a0_min = kNone;
    int d_min = kInf;
    for (int a0 = nodes_[i].first; a0 != kNone; a0 = arcs_[a0].next) {
        if (arcs_[a0].r_cap <= 0.0) continue;
        int j = arcs_[a0].head;
        if (!nodes_[j].is_sink || nodes_[j].parent == kNone) continue;
        int d = 0;
        for (;;) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInf;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInf) {
            if (d < d_min) {
                a0_min = a0;
                d_min = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }

    nodes_[i].parent = a0_min;
    if (a0_min != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = d_min + 1;
        return;
    }
    for (int a0 = nodes_[i].first; a0 != kNone; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (!nodes_[j].is_sink || a == kNone) continue;
        if (arcs_[a0].r_cap > 0.0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

double MaxFlowGraph::maxflow() {
    active_.clear();
    orphans_.clear();
    for (int i = 0; i < node_count(); ++i) {
        Node& n = nodes_[i];
        n.active = false;
        n.ts = 0;
        if (n.tr_cap > 0.0) {
            n.is_sink = false;
            n.parent = kTerminal;
            n.dist = 1;
            set_active(i);
        } else if (n.tr_cap < 0.0) {
            n.is_sink = true;
            n.parent = kTerminal;
            n.dist = 1;
            set_active(i);
        } else {
            n.parent = kNone;
        }
    }
    time_ = 0;

    int current = kNone;
    for (;;) {
        int i = current;
        if (i != kNone && nodes_[i].parent == kNone) i = kNone;
        if (i == kNone) {
            i = next_active();
            if (i == kNone) break;
        }

        // Grow the tree of i until it touches the other tree.
        int meet = kNone;
        if (!nodes_[i].is_sink) {
            for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
                if (arcs_[a].r_cap <= 0.0) continue;
                const int j = arcs_[a].head;
                Node& nj = nodes_[j];
                if (nj.parent == kNone) {
                    nj.is_sink = false;
                    nj.parent = sister(a);
                    nj.ts = nodes_[i].ts;
                    nj.dist = nodes_[i].dist + 1;
                    set_active(j);
                } else if (nj.is_sink) {
                    meet = a;
                    break;
                } else if (nj.ts <= nodes_[i].ts && nj.dist > nodes_[i].dist) {
                    nj.parent = sister(a);
                    nj.ts = nodes_[i].ts;
                    nj.dist = nodes_[i].dist + 1;
                }
            }
        } else {
            for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
                if (arcs_[sister(a)].r_cap <= 0.0) continue;
                const int j = arcs_[a].head;
                Node& nj = nodes_[j];
                if (nj.parent == kNone) {
                    nj.is_sink = true;
                    nj.parent = sister(a);
                    nj.ts = nodes_[i].ts;
                    nj.dist = nodes_[i].dist + 1;
                    set_active(j);
                } else if (!nj.is_sink) {
                    meet = sister(a);
                    break;
                } else if (nj.ts <= nodes_[i].ts && nj.dist > nodes_[i].dist) {
                    nj.parent = sister(a);
                    nj.ts = nodes_[i].ts;
                    nj.dist = nodes_[i].dist + 1;
                }
            }
        }

        ++time_;
        if (meet == kNone) {
            current = kNone;
            continue;
        }
        // i may still have unexplored arcs; revisit it next round.
        current = i;
        augment(meet);
        while (!orphans_.empty()) {
            const int o = orphans_.front();
            orphans_.pop_front();
            if (nodes_[o].is_sink) process_sink_orphan(o);
            else process_source_orphan(o);
        }
    }
    return flow_;
}

bool MaxFlowGraph::in_sink_segment(int i) const {
    return nodes_[i].parent != kNone && nodes_[i].is_sink;
}

}  // namespace sdp
