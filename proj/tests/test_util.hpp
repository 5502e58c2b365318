#pragma once

// Test-only helpers: brute-force graph-separation oracles (independent of
// the reachability implementations they check) and the worked fixtures
// used throughout the suite.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "lit/augmented.hpp"
#include "lit/graph.hpp"
#include "lit/mag.hpp"

namespace littest {

using lit::Dag;
using lit::NodeId;
using lit::NodeKind;

// Enumerates all simple paths u .. v in the skeleton of g and applies fn
// to each; fn returning true stops the enumeration.
template <typename Fn>
bool any_simple_path(const Dag& g, NodeId u, NodeId v, Fn&& fn) {
    std::vector<NodeId> path{u};
    std::vector<char> on_path(static_cast<size_t>(g.num_nodes()), 0);
    on_path[static_cast<size_t>(u)] = 1;

    struct Frame {
        std::vector<NodeId> nbrs;
        size_t next = 0;
    };
    auto neighbors = [&](NodeId x) {
        std::vector<NodeId> out = g.parents(x);
        out.insert(out.end(), g.children(x).begin(), g.children(x).end());
        std::sort(out.begin(), out.end());
        return out;
    };
    std::vector<Frame> stack{{neighbors(u), 0}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next >= f.nbrs.size()) {
            on_path[static_cast<size_t>(path.back())] = 0;
            path.pop_back();
            stack.pop_back();
            continue;
        }
        NodeId w = f.nbrs[f.next++];
        if (on_path[static_cast<size_t>(w)]) continue;
        if (w == v) {
            path.push_back(w);
            if (fn(path)) return true;
            path.pop_back();
            continue;
        }
        path.push_back(w);
        on_path[static_cast<size_t>(w)] = 1;
        stack.push_back({neighbors(w), 0});
    }
    return false;
}

inline bool is_collider_at(const Dag& g, const std::vector<NodeId>& path, size_t i) {
    return g.has_edge(path[i - 1], path[i]) && g.has_edge(path[i + 1], path[i]);
}

// Path-enumeration d-separation: every path between U and V must contain a
// conditioned non-collider or a collider with no descendant in W.
inline bool bf_d_separated(const Dag& g, const std::vector<NodeId>& us, const std::vector<NodeId>& vs,
                           const std::vector<NodeId>& ws) {
    std::vector<char> in_w(static_cast<size_t>(g.num_nodes()), 0);
    for (NodeId w : ws) in_w[static_cast<size_t>(w)] = 1;
    std::vector<char> opens(static_cast<size_t>(g.num_nodes()), 0);  // node or a descendant in W
    for (NodeId x = 0; x < g.num_nodes(); ++x)
        for (NodeId d : lit::descendants(g, x))
            if (in_w[static_cast<size_t>(d)]) opens[static_cast<size_t>(x)] = 1;

    for (NodeId u : us) {
        for (NodeId v : vs) {
            bool open = any_simple_path(g, u, v, [&](const std::vector<NodeId>& path) {
                for (size_t i = 1; i + 1 < path.size(); ++i) {
                    bool collider = is_collider_at(g, path, i);
                    if (!collider && in_w[static_cast<size_t>(path[i])]) return false;
                    if (collider && !opens[static_cast<size_t>(path[i])]) return false;
                }
                return true;  // unblocked path found
            });
            if (open) return false;
        }
    }
    return true;
}

// Path-enumeration inducing-path test.
inline bool bf_inducing_path(const Dag& g, NodeId a, NodeId b, const std::vector<NodeId>& hidden) {
    std::vector<char> is_hidden(static_cast<size_t>(g.num_nodes()), 0);
    for (NodeId h : hidden) is_hidden[static_cast<size_t>(h)] = 1;
    std::vector<char> anc_ab(static_cast<size_t>(g.num_nodes()), 0);
    for (NodeId x : lit::ancestors(g, a)) anc_ab[static_cast<size_t>(x)] = 1;
    for (NodeId x : lit::ancestors(g, b)) anc_ab[static_cast<size_t>(x)] = 1;

    return any_simple_path(g, a, b, [&](const std::vector<NodeId>& path) {
        for (size_t i = 1; i + 1 < path.size(); ++i) {
            bool collider = is_collider_at(g, path, i);
            if (!collider && !is_hidden[static_cast<size_t>(path[i])]) return false;
            if (collider && !anc_ab[static_cast<size_t>(path[i])]) return false;
        }
        return true;
    });
}

// m-separation on a MAG by path enumeration (directed edges give ancestry).
inline bool bf_m_separated(const lit::Mag& mag, NodeId u, NodeId v, const std::vector<NodeId>& ws) {
    // adjacency with marks
    auto edge = [&](NodeId a, NodeId b) { return mag.edge(a, b); };
    int n = 0;
    for (NodeId x : mag.nodes) n = std::max(n, x + 1);
    std::vector<char> in_w(static_cast<size_t>(n), 0);
    for (NodeId w : ws) in_w[static_cast<size_t>(w)] = 1;

    // directed ancestry in the MAG: a -> b edges (tail at a, arrow at b)
    std::vector<std::vector<char>> anc(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    for (NodeId x : mag.nodes) anc[static_cast<size_t>(x)][static_cast<size_t>(x)] = 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& e : mag.edges) {
            NodeId from = -1, to = -1;
            if (e.at_a == lit::Mark::Tail && e.at_b == lit::Mark::Arrow) from = e.a, to = e.b;
            if (e.at_b == lit::Mark::Tail && e.at_a == lit::Mark::Arrow) from = e.b, to = e.a;
            if (from < 0) continue;
            for (NodeId x : mag.nodes) {
                if (anc[static_cast<size_t>(to)][static_cast<size_t>(x)] &&
                    !anc[static_cast<size_t>(from)][static_cast<size_t>(x)]) {
                    anc[static_cast<size_t>(from)][static_cast<size_t>(x)] = 1;  // from is ancestor of x
                    changed = true;
                }
            }
        }
    }
    auto opens = [&](NodeId c) {
        if (in_w[static_cast<size_t>(c)]) return true;
        for (NodeId w : ws)
            if (anc[static_cast<size_t>(c)][static_cast<size_t>(w)]) return true;
        return false;
    };

    // enumerate simple paths in the MAG skeleton
    std::vector<NodeId> path{u};
    std::vector<char> on_path(static_cast<size_t>(n), 0);
    on_path[static_cast<size_t>(u)] = 1;
    bool found_open = false;
    std::function<void()> dfs = [&]() {
        if (found_open) return;
        NodeId x = path.back();
        if (x == v && path.size() >= 2) {
            bool open = true;
            for (size_t i = 1; i + 1 < path.size(); ++i) {
                const auto* e1 = edge(path[i - 1], path[i]);
                const auto* e2 = edge(path[i + 1], path[i]);
                auto mark_at = [&](const lit::MagEdge* e, NodeId at) { return e->a == at ? e->at_a : e->at_b; };
                bool collider = mark_at(e1, path[i]) == lit::Mark::Arrow && mark_at(e2, path[i]) == lit::Mark::Arrow;
                if (!collider && in_w[static_cast<size_t>(path[i])]) open = false;
                if (collider && !opens(path[i])) open = false;
            }
            if (open) found_open = true;
            return;
        }
        for (NodeId w : mag.nodes) {
            if (on_path[static_cast<size_t>(w)] || !mag.adjacent(x, w)) continue;
            if (w == v) {
                path.push_back(w);
                dfs();
                path.pop_back();
                if (found_open) return;
                continue;
            }
            path.push_back(w);
            on_path[static_cast<size_t>(w)] = 1;
            dfs();
            on_path[static_cast<size_t>(w)] = 0;
            path.pop_back();
            if (found_open) return;
        }
    };
    if (u != v) dfs();
    return !found_open;
}

// Random DAG over a random topological order; latent kinds are assigned to
// `latents` randomly chosen nodes (no child constraints here; tests that
// need the generator of the simulator use that one).
inline Dag random_test_dag(int n, double edge_prob, int latents, std::mt19937_64& rng) {
    std::vector<NodeId> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<NodeKind> kinds(static_cast<size_t>(n), NodeKind::Observed);
    std::vector<NodeId> ids = order;
    std::shuffle(ids.begin(), ids.end(), rng);
    for (int i = 0; i < latents; ++i) kinds[static_cast<size_t>(ids[static_cast<size_t>(i)])] = NodeKind::Latent;
    Dag g(kinds);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (unif(rng) < edge_prob) g.add_edge(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    return g;
}

// ---------------------------------------------------------------------------
// Worked fixtures. Node ids are zero-based, so X_k in the text is id k-1.

// Seven observed variables, targets {X_1, X_2, X_5}:
//   X_1 -> X_3 <- X_2, X_3 -> X_5 -> X_6 -> X_7, X_4 isolated.
inline Dag fig3_graph() {
    Dag g = Dag::observed(7);
    g.add_edge(0, 2);
    g.add_edge(1, 2);
    g.add_edge(2, 4);
    g.add_edge(4, 5);
    g.add_edge(5, 6);
    return g;
}
inline std::vector<NodeId> fig3_targets() { return {0, 1, 4}; }

// Three observed variables plus one latent confounder X_H (id 3):
//   X_H -> X_1, X_H -> X_2, X_1 -> X_2 -> X_3, targets {X_1, X_2}.
inline Dag fig2a_graph() {
    Dag g(std::vector<NodeKind>{NodeKind::Observed, NodeKind::Observed, NodeKind::Observed, NodeKind::Latent});
    g.add_edge(3, 0);
    g.add_edge(3, 1);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    return g;
}
inline std::vector<NodeId> fig2a_targets() { return {0, 1}; }

// Same skeleton, but the latent (X_H1) is itself a target: T = {X_H1, X_2}.
inline Dag fig2d_graph() { return fig2a_graph(); }
inline std::vector<NodeId> fig2d_targets() { return {1, 3}; }

}  // namespace littest
