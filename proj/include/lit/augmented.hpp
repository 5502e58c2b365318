#pragma once

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "lit/graph.hpp"
#include "lit/indicator.hpp"

namespace lit {

/// Augmented graph G_T: the causal DAG with one explicit noise node per
/// intervention target. An observed target X_i gains a parentless noise
/// node with the single edge N_i -> X_i. A latent target X_l is replaced
/// in place by its noise node: the node keeps X_l's outgoing edges, drops
/// all incoming edges, and its kind becomes Noise.
struct AugmentedGraph {
    Dag graph;
    std::vector<NodeId> targets;      // sorted target variable ids (original graph ids)
    std::vector<NodeId> noise_nodes;  // noise_nodes[t] is the noise node for targets[t]
    std::vector<NodeId> observed;     // observed node ids, ascending; position = observed index
    std::unordered_map<NodeId, NodeId> replaced_latents;  // latent target id -> its noise node

    int num_targets() const { return static_cast<int>(targets.size()); }

    NodeId noise_for(NodeId target) const {
        auto it = std::lower_bound(targets.begin(), targets.end(), target);
        if (it == targets.end() || *it != target)
            throw std::invalid_argument("AugmentedGraph: node " + std::to_string(target) + " is not a target");
        return noise_nodes[static_cast<size_t>(it - targets.begin())];
    }

    int observed_index(NodeId v) const {
        auto it = std::lower_bound(observed.begin(), observed.end(), v);
        if (it == observed.end() || *it != v)
            throw std::invalid_argument("AugmentedGraph: node " + std::to_string(v) + " is not observed");
        return static_cast<int>(it - observed.begin());
    }

    /// Non-target latent nodes (the set L \ T_L, hidden in MAG projections).
    std::vector<NodeId> hidden_latents() const { return graph.nodes_of_kind(NodeKind::Latent); }
};

inline AugmentedGraph build_augmented_graph(const Dag& g, std::vector<NodeId> t_set) {
    for (NodeId v : t_set) {
        g.check_node(v);
        if (g.kind(v) == NodeKind::Noise)
            throw std::invalid_argument("build_augmented_graph: input graph already contains noise nodes");
    }
    std::sort(t_set.begin(), t_set.end());
    if (std::adjacent_find(t_set.begin(), t_set.end()) != t_set.end())
        throw std::invalid_argument("build_augmented_graph: duplicate target id");

    AugmentedGraph out;
    out.targets = t_set;

    std::vector<NodeKind> kinds;
    kinds.reserve(static_cast<size_t>(g.num_nodes()));
    for (NodeId v = 0; v < g.num_nodes(); ++v) kinds.push_back(g.kind(v));

    std::vector<char> replaced(static_cast<size_t>(g.num_nodes()), 0);
    for (NodeId v : t_set) {
        if (g.kind(v) == NodeKind::Latent) {
            kinds[static_cast<size_t>(v)] = NodeKind::Noise;
            replaced[static_cast<size_t>(v)] = 1;
        }
    }

    Dag aug(kinds);
    for (auto [a, b] : g.edges()) {
        if (replaced[static_cast<size_t>(b)]) continue;  // replaced latents lose incoming edges
        aug.add_edge(a, b);
    }
    for (NodeId v : t_set) {
        if (g.kind(v) == NodeKind::Latent) {
            out.noise_nodes.push_back(v);
            out.replaced_latents[v] = v;
        } else {
            NodeId nv = aug.add_node(NodeKind::Noise);
            aug.add_edge(nv, v);
            out.noise_nodes.push_back(nv);
        }
    }
    out.graph = std::move(aug);
    out.observed = out.graph.nodes_of_kind(NodeKind::Observed);
    return out;
}

/// Ground-truth indicator sets I_0: for each observed variable, the noise
/// nodes of G_T that are its ancestors. Positions follow the augmented
/// graph's observed index / target order.
inline IndicatorSets oracle_indicator_sets(const AugmentedGraph& g) {
    const int k = g.num_targets();
    if (k > 64) throw std::invalid_argument("oracle_indicator_sets: more than 64 targets unsupported");
    std::vector<NoiseMask> reach(static_cast<size_t>(g.graph.num_nodes()), 0);
    for (int t = 0; t < k; ++t) {
        for (NodeId v : descendants(g.graph, g.noise_nodes[static_cast<size_t>(t)]))
            reach[static_cast<size_t>(v)] |= NoiseMask{1} << t;
    }
    std::vector<NoiseMask> sets;
    sets.reserve(g.observed.size());
    for (NodeId v : g.observed) sets.push_back(reach[static_cast<size_t>(v)]);
    return IndicatorSets::build(std::move(sets), k);
}

/// I_0 for every node of the augmented graph (used by the auxiliary-graph
/// construction, where latent nodes also need noise-ancestor sets).
inline std::vector<NoiseMask> noise_ancestor_masks(const AugmentedGraph& g) {
    std::vector<NoiseMask> reach(static_cast<size_t>(g.graph.num_nodes()), 0);
    for (int t = 0; t < g.num_targets(); ++t) {
        for (NodeId v : descendants(g.graph, g.noise_nodes[static_cast<size_t>(t)]))
            reach[static_cast<size_t>(v)] |= NoiseMask{1} << t;
    }
    return reach;
}

}  // namespace lit
