#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lit {

using NodeId = int;

enum class NodeKind { Observed, Latent, Noise };

inline const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Observed: return "observed";
        case NodeKind::Latent: return "latent";
        case NodeKind::Noise: return "noise";
    }
    return "?";
}

/// Directed acyclic graph over densely numbered nodes 0..n-1.
/// Each node carries a kind (observed / latent / noise). Edges are
/// validated on insertion: ids must exist, no self-loops, no duplicates,
/// and no edge may close a directed cycle.
class Dag {
public:
    Dag() = default;

    explicit Dag(std::vector<NodeKind> kinds) : kinds_(std::move(kinds)) {
        parents_.resize(kinds_.size());
        children_.resize(kinds_.size());
    }

    static Dag observed(int n) {
        return Dag(std::vector<NodeKind>(static_cast<size_t>(n), NodeKind::Observed));
    }

    int num_nodes() const { return static_cast<int>(kinds_.size()); }
    int num_edges() const { return num_edges_; }

    NodeKind kind(NodeId v) const {
        check_node(v);
        return kinds_[static_cast<size_t>(v)];
    }

    void set_kind(NodeId v, NodeKind k) {
        check_node(v);
        kinds_[static_cast<size_t>(v)] = k;
    }

    NodeId add_node(NodeKind k) {
        kinds_.push_back(k);
        parents_.emplace_back();
        children_.emplace_back();
        return num_nodes() - 1;
    }

    bool has_edge(NodeId a, NodeId b) const {
        check_node(a);
        check_node(b);
        const auto& ch = children_[static_cast<size_t>(a)];
        return std::find(ch.begin(), ch.end(), b) != ch.end();
    }

    void add_edge(NodeId a, NodeId b) {
        check_node(a);
        check_node(b);
        if (a == b) throw std::invalid_argument("Dag::add_edge: self-loop at node " + std::to_string(a));
        if (has_edge(a, b)) throw std::invalid_argument("Dag::add_edge: duplicate edge");
        if (reaches(b, a)) throw std::invalid_argument("Dag::add_edge: edge would create a directed cycle");
        children_[static_cast<size_t>(a)].push_back(b);
        parents_[static_cast<size_t>(b)].push_back(a);
        ++num_edges_;
    }

    void remove_edge(NodeId a, NodeId b) {
        check_node(a);
        check_node(b);
        auto& ch = children_[static_cast<size_t>(a)];
        auto it = std::find(ch.begin(), ch.end(), b);
        if (it == ch.end()) throw std::invalid_argument("Dag::remove_edge: no such edge");
        ch.erase(it);
        auto& pa = parents_[static_cast<size_t>(b)];
        pa.erase(std::find(pa.begin(), pa.end(), a));
        --num_edges_;
    }

    const std::vector<NodeId>& parents(NodeId v) const {
        check_node(v);
        return parents_[static_cast<size_t>(v)];
    }

    const std::vector<NodeId>& children(NodeId v) const {
        check_node(v);
        return children_[static_cast<size_t>(v)];
    }

    std::vector<NodeId> nodes_of_kind(NodeKind k) const {
        std::vector<NodeId> out;
        for (NodeId v = 0; v < num_nodes(); ++v)
            if (kinds_[static_cast<size_t>(v)] == k) out.push_back(v);
        return out;
    }

    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        out.reserve(static_cast<size_t>(num_edges_));
        for (NodeId a = 0; a < num_nodes(); ++a)
            for (NodeId b : children_[static_cast<size_t>(a)]) out.emplace_back(a, b);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Kahn topological order; always succeeds because insertion keeps the graph acyclic.
    std::vector<NodeId> topological_order() const {
        std::vector<int> indeg(static_cast<size_t>(num_nodes()), 0);
        for (NodeId v = 0; v < num_nodes(); ++v)
            indeg[static_cast<size_t>(v)] = static_cast<int>(parents_[static_cast<size_t>(v)].size());
        std::deque<NodeId> q;
        for (NodeId v = 0; v < num_nodes(); ++v)
            if (indeg[static_cast<size_t>(v)] == 0) q.push_back(v);
        std::vector<NodeId> order;
        order.reserve(static_cast<size_t>(num_nodes()));
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop_front();
            order.push_back(v);
            for (NodeId c : children_[static_cast<size_t>(v)])
                if (--indeg[static_cast<size_t>(c)] == 0) q.push_back(c);
        }
        if (static_cast<int>(order.size()) != num_nodes())
            throw std::logic_error("Dag::topological_order: cycle detected");
        return order;
    }

    void check_node(NodeId v) const {
        if (v < 0 || v >= num_nodes())
            throw std::invalid_argument("unknown node id " + std::to_string(v));
    }

private:
    bool reaches(NodeId from, NodeId to) const {
        if (from == to) return true;
        std::vector<char> seen(static_cast<size_t>(num_nodes()), 0);
        std::deque<NodeId> q{from};
        seen[static_cast<size_t>(from)] = 1;
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop_front();
            for (NodeId c : children_[static_cast<size_t>(v)]) {
                if (c == to) return true;
                if (!seen[static_cast<size_t>(c)]) {
                    seen[static_cast<size_t>(c)] = 1;
                    q.push_back(c);
                }
            }
        }
        return false;
    }

    std::vector<NodeKind> kinds_;
    std::vector<std::vector<NodeId>> parents_;
    std::vector<std::vector<NodeId>> children_;
    int num_edges_ = 0;
};

/// All u with a directed path u -> ... -> v, including v itself.
inline std::vector<NodeId> ancestors(const Dag& g, NodeId v) {
    g.check_node(v);
    std::vector<char> seen(static_cast<size_t>(g.num_nodes()), 0);
    std::deque<NodeId> q{v};
    seen[static_cast<size_t>(v)] = 1;
    while (!q.empty()) {
        NodeId w = q.front();
        q.pop_front();
        for (NodeId p : g.parents(w)) {
            if (!seen[static_cast<size_t>(p)]) {
                seen[static_cast<size_t>(p)] = 1;
                q.push_back(p);
            }
        }
    }
    std::vector<NodeId> out;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        if (seen[static_cast<size_t>(u)]) out.push_back(u);
    return out;
}

inline std::vector<NodeId> descendants(const Dag& g, NodeId v) {
    g.check_node(v);
    std::vector<char> seen(static_cast<size_t>(g.num_nodes()), 0);
    std::deque<NodeId> q{v};
    seen[static_cast<size_t>(v)] = 1;
    while (!q.empty()) {
        NodeId w = q.front();
        q.pop_front();
        for (NodeId c : g.children(w)) {
            if (!seen[static_cast<size_t>(c)]) {
                seen[static_cast<size_t>(c)] = 1;
                q.push_back(c);
            }
        }
    }
    std::vector<NodeId> out;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        if (seen[static_cast<size_t>(u)]) out.push_back(u);
    return out;
}

inline bool is_ancestor(const Dag& g, NodeId u, NodeId v) {
    auto anc = ancestors(g, v);
    return std::find(anc.begin(), anc.end(), u) != anc.end();
}

namespace detail {

inline std::vector<char> membership(const Dag& g, const std::vector<NodeId>& set) {
    std::vector<char> m(static_cast<size_t>(g.num_nodes()), 0);
    for (NodeId v : set) {
        g.check_node(v);
        m[static_cast<size_t>(v)] = 1;
    }
    return m;
}

// Nodes that are ancestors of some member of `set` (members included).
inline std::vector<char> ancestor_closure(const Dag& g, const std::vector<char>& set) {
    std::vector<char> anc(set);
    std::deque<NodeId> q;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (anc[static_cast<size_t>(v)]) q.push_back(v);
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop_front();
        for (NodeId p : g.parents(v)) {
            if (!anc[static_cast<size_t>(p)]) {
                anc[static_cast<size_t>(p)] = 1;
                q.push_back(p);
            }
        }
    }
    return anc;
}

}  // namespace detail

/// Pearl d-separation via ball-passing reachability. O(|E|) per query.
/// U, V, W must be pairwise disjoint. Returns true iff every path between
/// U and V is blocked given W.
inline bool d_separated(const Dag& g, const std::vector<NodeId>& u_set, const std::vector<NodeId>& v_set,
                        const std::vector<NodeId>& w_set) {
    auto in_u = detail::membership(g, u_set);
    auto in_v = detail::membership(g, v_set);
    auto in_w = detail::membership(g, w_set);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        int c = in_u[static_cast<size_t>(v)] + in_v[static_cast<size_t>(v)] + in_w[static_cast<size_t>(v)];
        if (c > 1) throw std::invalid_argument("d_separated: U, V, W must be pairwise disjoint");
    }
    auto anc_w = detail::ancestor_closure(g, in_w);

    // State encoding: node * 2 + dir, dir 0 = arrived from a child ("up"),
    // dir 1 = arrived from a parent ("down", arrowhead into the node).
    std::vector<char> visited(static_cast<size_t>(g.num_nodes()) * 2, 0);
    std::deque<std::pair<NodeId, int>> q;
    for (NodeId s : u_set) q.emplace_back(s, 0);
    while (!q.empty()) {
        auto [y, dir] = q.front();
        q.pop_front();
        size_t code = static_cast<size_t>(y) * 2 + static_cast<size_t>(dir);
        if (visited[code]) continue;
        visited[code] = 1;
        bool in_cond = in_w[static_cast<size_t>(y)] != 0;
        if (!in_cond && in_v[static_cast<size_t>(y)]) return false;
        if (dir == 0) {
            if (!in_cond) {
                for (NodeId p : g.parents(y)) q.emplace_back(p, 0);
                for (NodeId c : g.children(y)) q.emplace_back(c, 1);
            }
        } else {
            if (!in_cond)
                for (NodeId c : g.children(y)) q.emplace_back(c, 1);
            if (anc_w[static_cast<size_t>(y)])
                for (NodeId p : g.parents(y)) q.emplace_back(p, 0);
        }
    }
    return true;
}

inline bool d_connected(const Dag& g, const std::vector<NodeId>& u, const std::vector<NodeId>& v,
                        const std::vector<NodeId>& w) {
    return !d_separated(g, u, v, w);
}

/// Line-oriented text format:
///   nodes <n>
///   <id> <kind>        (one per node)
///   edge <a> <b>       (one per edge)
inline void write_graph(std::ostream& os, const Dag& g) {
    os << "nodes " << g.num_nodes() << "\n";
    for (NodeId v = 0; v < g.num_nodes(); ++v) os << v << " " << kind_name(g.kind(v)) << "\n";
    for (auto [a, b] : g.edges()) os << "edge " << a << " " << b << "\n";
}

inline Dag read_graph(std::istream& is) {
    std::string tok;
    if (!(is >> tok) || tok != "nodes") throw std::invalid_argument("graph format: expected 'nodes <n>' header");
    int n = 0;
    if (!(is >> n) || n < 0) throw std::invalid_argument("graph format: bad node count");
    std::vector<NodeKind> kinds(static_cast<size_t>(n), NodeKind::Observed);
    for (int i = 0; i < n; ++i) {
        int id;
        std::string kind;
        if (!(is >> id >> kind) || id != i) throw std::invalid_argument("graph format: node lines must list ids 0..n-1 in order");
        if (kind == "observed")
            kinds[static_cast<size_t>(i)] = NodeKind::Observed;
        else if (kind == "latent")
            kinds[static_cast<size_t>(i)] = NodeKind::Latent;
        else if (kind == "noise")
            kinds[static_cast<size_t>(i)] = NodeKind::Noise;
        else
            throw std::invalid_argument("graph format: unknown node kind '" + kind + "'");
    }
    Dag g(std::move(kinds));
    while (is >> tok) {
        if (tok != "edge") {
            // leave non-edge content (e.g. trailing sections of a spec file) to the caller
            for (size_t i = tok.size(); i > 0; --i) is.putback(tok[i - 1]);
            break;
        }
        int a, b;
        if (!(is >> a >> b)) throw std::invalid_argument("graph format: bad edge line");
        g.add_edge(a, b);
    }
    return g;
}

inline std::string graph_to_string(const Dag& g) {
    std::ostringstream os;
    write_graph(os, g);
    return os.str();
}

inline Dag graph_from_string(const std::string& s) {
    std::istringstream is(s);
    return read_graph(is);
}

}  // namespace lit
