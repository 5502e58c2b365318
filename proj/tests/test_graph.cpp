#include "lit/graph.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lit/augmented.hpp"
#include "test_util.hpp"

using namespace lit;
using namespace littest;

TEST(Dag, RejectsCyclesSelfLoopsDuplicates) {
    Dag g = Dag::observed(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    EXPECT_THROW(g.add_edge(2, 0), std::invalid_argument);
    EXPECT_THROW(g.add_edge(1, 1), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 1), std::invalid_argument);
    EXPECT_THROW(g.add_edge(0, 7), std::invalid_argument);
    EXPECT_EQ(g.num_edges(), 2);
}

TEST(Dag, TopologicalOrderRespectsEdges) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        Dag g = random_test_dag(8, 0.4, 0, rng);
        auto order = g.topological_order();
        std::vector<int> pos(8);
        for (int i = 0; i < 8; ++i) pos[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;
        for (auto [a, b] : g.edges()) EXPECT_LT(pos[static_cast<size_t>(a)], pos[static_cast<size_t>(b)]);
    }
}

TEST(Ancestors, ChainAndIsolated) {
    Dag g = Dag::observed(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    EXPECT_EQ(ancestors(g, 2), (std::vector<NodeId>{0, 1, 2}));
    Dag iso = Dag::observed(1);
    EXPECT_EQ(ancestors(iso, 0), (std::vector<NodeId>{0}));  // every node is its own ancestor
    EXPECT_THROW(ancestors(g, 9), std::invalid_argument);
}

TEST(Ancestors, Fig3UpstreamTargets) {
    Dag g = fig3_graph();
    auto anc = ancestors(g, 6);
    for (NodeId v : {0, 1, 4}) EXPECT_TRUE(std::count(anc.begin(), anc.end(), v)) << v;
}

TEST(DSeparation, ColliderBasics) {
    Dag g = Dag::observed(3);
    g.add_edge(0, 2);
    g.add_edge(1, 2);
    EXPECT_TRUE(d_separated(g, {0}, {1}, {}));
    EXPECT_FALSE(d_separated(g, {0}, {1}, {2}));
    EXPECT_THROW(d_separated(g, {0}, {0}, {}), std::invalid_argument);
}

TEST(DSeparation, Example1AugmentedGraph) {
    auto aug = build_augmented_graph(fig2a_graph(), fig2a_targets());
    NodeId n2 = aug.noise_for(1);
    EXPECT_TRUE(d_separated(aug.graph, {n2}, {2}, {0, 1}));
    // N_2 never separated from X_2 by observed sets
    for (std::vector<NodeId> s : std::vector<std::vector<NodeId>>{{}, {0}, {2}, {0, 2}})
        EXPECT_FALSE(d_separated(aug.graph, {n2}, {1}, s));
}

TEST(DSeparation, AgreesWithPathEnumeration) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> n_dist(3, 7);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        int n = n_dist(rng);
        Dag g = random_test_dag(n, 0.45, 0, rng);
        // random disjoint singleton/pair queries
        std::vector<NodeId> perm(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<NodeId> u{perm[0]}, v{perm[1]}, w;
        std::uniform_int_distribution<int> w_size(0, n - 2);
        int ws = w_size(rng);
        for (int i = 0; i < ws && 2 + i < n; ++i) w.push_back(perm[static_cast<size_t>(2 + i)]);
        EXPECT_EQ(d_separated(g, u, v, w), bf_d_separated(g, u, v, w))
            << graph_to_string(g) << "u=" << u[0] << " v=" << v[0] << " |w|=" << w.size();
        ++checked;
    }
    EXPECT_EQ(checked, 400);
}

TEST(DSeparation, NoiseConnectedIffDescendant) {
    // A noise node is d-connected to an observed variable given the empty
    // set exactly when the variable descends from the noise's child.
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Dag g = random_test_dag(6, 0.4, 2, rng);
        std::vector<NodeId> pool;
        for (NodeId v = 0; v < 6; ++v) pool.push_back(v);
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<NodeId> t(pool.begin(), pool.begin() + 3);
        auto aug = build_augmented_graph(g, t);
        for (NodeId noise : aug.noise_nodes) {
            auto des = descendants(aug.graph, noise);
            for (NodeId x : aug.observed) {
                bool is_desc = std::count(des.begin(), des.end(), x) > 0;
                EXPECT_EQ(d_connected(aug.graph, {noise}, {x}, {}), is_desc);
            }
        }
    }
}

TEST(AugmentedGraph, EmptyTargetsIsIdentity) {
    Dag g = fig3_graph();
    auto aug = build_augmented_graph(g, {});
    EXPECT_EQ(aug.graph.num_nodes(), g.num_nodes());
    EXPECT_EQ(aug.graph.edges(), g.edges());
    EXPECT_TRUE(aug.noise_nodes.empty());
}

TEST(AugmentedGraph, Fig3AddsOneNoisePerTarget) {
    auto aug = build_augmented_graph(fig3_graph(), fig3_targets());
    ASSERT_EQ(aug.noise_nodes.size(), 3u);
    for (size_t t = 0; t < 3; ++t) {
        NodeId noise = aug.noise_nodes[t];
        EXPECT_EQ(aug.graph.kind(noise), NodeKind::Noise);
        EXPECT_TRUE(aug.graph.parents(noise).empty());
        ASSERT_EQ(aug.graph.children(noise).size(), 1u);
        EXPECT_EQ(aug.graph.children(noise)[0], aug.targets[t]);
    }
}

TEST(AugmentedGraph, Fig2dReplacesLatentTarget) {
    auto aug = build_augmented_graph(fig2d_graph(), fig2d_targets());
    // the latent target keeps its id but becomes a parentless noise node
    EXPECT_EQ(aug.graph.kind(3), NodeKind::Noise);
    EXPECT_TRUE(aug.graph.parents(3).empty());
    EXPECT_EQ(aug.noise_for(3), 3);
    // outgoing edges inherited
    EXPECT_TRUE(aug.graph.has_edge(3, 0));
    EXPECT_TRUE(aug.graph.has_edge(3, 1));
    // the observed target gained a fresh noise parent
    NodeId n2 = aug.noise_for(1);
    EXPECT_EQ(aug.graph.kind(n2), NodeKind::Noise);
    EXPECT_TRUE(aug.graph.has_edge(n2, 1));
    EXPECT_THROW(build_augmented_graph(fig2d_graph(), {0, 99}), std::invalid_argument);
}

TEST(AugmentedGraph, LatentTargetDropsIncomingEdges) {
    Dag g(std::vector<NodeKind>{NodeKind::Observed, NodeKind::Latent, NodeKind::Observed});
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    auto aug = build_augmented_graph(g, {1});
    EXPECT_TRUE(aug.graph.parents(1).empty());
    EXPECT_TRUE(aug.graph.has_edge(1, 2));
    EXPECT_FALSE(aug.graph.has_edge(0, 1));
}

TEST(OracleIndicators, Fig3Sets) {
    auto aug = build_augmented_graph(fig3_graph(), fig3_targets());
    auto ind = oracle_indicator_sets(aug);
    ASSERT_EQ(ind.num_vars, 7);
    ASSERT_EQ(ind.num_noises, 3);
    EXPECT_EQ(ind.sets[0], 0b001u);  // I_1 = {N_1}
    EXPECT_EQ(ind.sets[1], 0b010u);  // I_2 = {N_2}
    EXPECT_EQ(ind.sets[2], 0b011u);  // I_3 = {N_1, N_2}
    EXPECT_EQ(ind.sets[3], 0b000u);  // I_4 = {}
    for (int i : {4, 5, 6}) EXPECT_EQ(ind.sets[static_cast<size_t>(i)], 0b111u);
    // residual sets from the same example
    EXPECT_EQ(ind.residual[0], 0b001u);
    EXPECT_EQ(ind.residual[2], 0b000u);
    EXPECT_EQ(ind.residual[4], 0b100u);
    EXPECT_EQ(ind.possible_parents[4], (std::vector<int>{0, 1, 2, 3}));
}

TEST(OracleIndicators, EmptyTargetsAllEmpty) {
    auto aug = build_augmented_graph(fig3_graph(), {});
    auto ind = oracle_indicator_sets(aug);
    for (auto m : ind.sets) EXPECT_EQ(m, 0u);
}

TEST(OracleIndicators, Fig2aSets) {
    auto aug = build_augmented_graph(fig2a_graph(), fig2a_targets());
    auto ind = oracle_indicator_sets(aug);
    ASSERT_EQ(ind.num_vars, 3);
    EXPECT_EQ(ind.sets[0], 0b01u);
    EXPECT_EQ(ind.sets[1], 0b11u);
    EXPECT_EQ(ind.sets[2], 0b11u);
}

TEST(GraphIo, RoundTrip) {
    Dag g = fig2a_graph();
    auto text = graph_to_string(g);
    Dag h = graph_from_string(text);
    EXPECT_EQ(h.num_nodes(), g.num_nodes());
    EXPECT_EQ(h.edges(), g.edges());
    EXPECT_EQ(h.kind(3), NodeKind::Latent);
    EXPECT_EQ(graph_to_string(h), text);
    EXPECT_THROW(graph_from_string("nodes x"), std::invalid_argument);
    EXPECT_THROW(graph_from_string("edge 0 1"), std::invalid_argument);
}

TEST(IndicatorSets, DerivedStructures) {
    // masks over 2 noises for variables {a, b, c}: a={0}, b={0,1}, c={0,1}
    auto ind = IndicatorSets::build({0b01, 0b11, 0b11}, 2);
    EXPECT_TRUE(ind.unique(0));
    EXPECT_FALSE(ind.unique(1));
    EXPECT_EQ(ind.possible_parents[1], (std::vector<int>{0}));
    EXPECT_EQ(ind.residual[1], 0b10u);
    EXPECT_EQ(ind.uncovered_noises(), (std::vector<int>{}));
    auto ind2 = IndicatorSets::build({0b01, 0b01}, 3);
    EXPECT_EQ(ind2.uncovered_noises(), (std::vector<int>{1, 2}));
    EXPECT_THROW(IndicatorSets::build({0b100}, 2), std::invalid_argument);
}
