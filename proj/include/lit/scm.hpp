#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "lit/graph.hpp"
#include "lit/rng.hpp"

namespace lit {

enum class NoiseFamily { Gaussian, Laplace };
enum class Mechanism { Linear, MlpAdditive };

/// One-hidden-layer perceptron for a node's structural function
/// f_i(PA_i); weights and biases drawn from [0.5, 1] keep the map
/// monotone in every input under LeakyReLU.
struct NodeMlp {
    Eigen::MatrixXd w1;  // hidden x fan_in
    Eigen::VectorXd b1;  // hidden
    Eigen::RowVectorXd w2;  // 1 x hidden
    double b2 = 0.0;
};

struct ScmSpec {
    Dag graph;
    Mechanism mechanism = Mechanism::Linear;
    Eigen::MatrixXd coef;       // coef(i, j): weight of edge X_j -> X_i (Linear)
    std::vector<NodeMlp> mlps;  // per node, unused entries for roots (MlpAdditive)
    NoiseFamily noise_family = NoiseFamily::Gaussian;
    double leaky_slope = 0.2;
};

/// Per-environment noise standard deviations. Non-target columns are
/// constant across environments; target columns change (that is the
/// definition of a target).
struct EnvironmentPlan {
    int n_envs = 0;
    Eigen::MatrixXd scale;       // n_envs x n_nodes, standard deviations
    std::vector<NodeId> targets; // sorted
    bool recovery_bound_warning = false;  // set when D < |T| + 1
};

struct MultiEnvDataset {
    Eigen::MatrixXd samples;          // rows grouped by environment
    std::vector<int> env_index;       // per row
    std::vector<NodeId> observed_ids; // column -> node id
    int n_envs = 0;

    int samples_per_env(int env) const {
        return static_cast<int>(std::count(env_index.begin(), env_index.end(), env));
    }
};

struct SimulationResult {
    MultiEnvDataset data;
    Eigen::MatrixXd target_noises;   // ground-truth noise draws for the targets
    std::vector<NodeId> target_ids;  // column -> target variable id
};

/// Order-one exponential family bookkeeping for the generated noises:
/// p(N_i | U=d) = Q_i(N_i)/Z_i(d) * exp(lambda_i(d) * qtilde_i(N_i)) with
/// qtilde Gaussian: -x^2/2 (lambda = 1/sigma^2), Laplace: -|x| (lambda =
/// sqrt(2)/sigma). Both sufficient statistics are strictly monotone in |x|.
struct ExponentialFamilySpec {
    NoiseFamily family = NoiseFamily::Gaussian;
    Eigen::MatrixXd lambda;  // n_envs x n_nodes natural parameters
};

inline ExponentialFamilySpec exponential_family_spec(const EnvironmentPlan& plan, NoiseFamily family) {
    ExponentialFamilySpec out;
    out.family = family;
    out.lambda.resize(plan.scale.rows(), plan.scale.cols());
    for (Eigen::Index d = 0; d < plan.scale.rows(); ++d) {
        for (Eigen::Index i = 0; i < plan.scale.cols(); ++i) {
            double sd = plan.scale(d, i);
            out.lambda(d, i) = family == NoiseFamily::Gaussian ? 1.0 / (sd * sd) : std::sqrt(2.0) / sd;
        }
    }
    return out;
}

/// Random DAG: nodes get a uniformly random topological order and each
/// forward pair is connected independently with `edge_prob`. When latent
/// nodes are requested, the assignment is redrawn until every latent has
/// at least two observed nodes after it in the order, and missing
/// latent->observed edges are then added so each latent has >= 2 observed
/// children.
inline Dag random_dag(int n, double edge_prob, int latent_count, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("random_dag: need at least two nodes");
    if (latent_count < 0 || latent_count > n / 2)
        throw std::invalid_argument("random_dag: latent count must be in [0, n/2]");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (int attempt = 0; attempt < 500; ++attempt) {
        std::vector<NodeId> order(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<NodeId> pick = order;
        std::shuffle(pick.begin(), pick.end(), rng);
        std::vector<char> latent(static_cast<size_t>(n), 0);
        for (int i = 0; i < latent_count; ++i) latent[static_cast<size_t>(pick[static_cast<size_t>(i)])] = 1;

        std::vector<int> pos(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pos[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;
        bool feasible = true;
        for (NodeId v = 0; v < n && feasible; ++v) {
            if (!latent[static_cast<size_t>(v)]) continue;
            int observed_after = 0;
            for (int p = pos[static_cast<size_t>(v)] + 1; p < n; ++p)
                if (!latent[static_cast<size_t>(order[static_cast<size_t>(p)])]) ++observed_after;
            if (observed_after < 2) feasible = false;
        }
        if (!feasible) continue;

        std::vector<NodeKind> kinds(static_cast<size_t>(n), NodeKind::Observed);
        for (NodeId v = 0; v < n; ++v)
            if (latent[static_cast<size_t>(v)]) kinds[static_cast<size_t>(v)] = NodeKind::Latent;
        Dag g(kinds);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (unif(rng) < edge_prob) g.add_edge(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);

        for (NodeId v = 0; v < n; ++v) {
            if (!latent[static_cast<size_t>(v)]) continue;
            auto observed_children = [&]() {
                int c = 0;
                for (NodeId ch : g.children(v))
                    if (g.kind(ch) == NodeKind::Observed) ++c;
                return c;
            };
            std::vector<NodeId> candidates;
            for (int p = pos[static_cast<size_t>(v)] + 1; p < n; ++p) {
                NodeId w = order[static_cast<size_t>(p)];
                if (g.kind(w) == NodeKind::Observed && !g.has_edge(v, w)) candidates.push_back(w);
            }
            std::shuffle(candidates.begin(), candidates.end(), rng);
            for (NodeId w : candidates) {
                if (observed_children() >= 2) break;
                g.add_edge(v, w);
            }
            if (observed_children() < 2) throw std::logic_error("random_dag: latent repair failed");
        }
        return g;
    }
    throw std::runtime_error("random_dag: could not satisfy latent constraints");
}

/// Target selection for the three experiment settings. Settings 1-2 pick
/// floor((n+1)/2) of the (all observed) nodes. Setting 3 picks floor(n/2)
/// targets with 80% of the latent nodes included, remainder observed.
inline std::vector<NodeId> sample_targets(const Dag& g, int setting, std::uint64_t seed) {
    auto rng = make_rng(seed);
    const int n = g.num_nodes();
    auto latents = g.nodes_of_kind(NodeKind::Latent);
    std::vector<NodeId> t;
    if (setting == 1 || setting == 2) {
        if (!latents.empty()) throw std::invalid_argument("sample_targets: settings 1-2 require no latent nodes");
        std::vector<NodeId> pool(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        std::shuffle(pool.begin(), pool.end(), rng);
        t.assign(pool.begin(), pool.begin() + (n + 1) / 2);
    } else if (setting == 3) {
        if (latents.empty()) throw std::invalid_argument("sample_targets: setting 3 requires latent nodes");
        int total = n / 2;
        int lat_targets = static_cast<int>(0.8 * static_cast<double>(latents.size()));
        int obs_targets = total - lat_targets;
        auto observed = g.nodes_of_kind(NodeKind::Observed);
        if (obs_targets < 0 || obs_targets > static_cast<int>(observed.size()))
            throw std::invalid_argument("sample_targets: infeasible setting-3 split");
        std::shuffle(latents.begin(), latents.end(), rng);
        std::shuffle(observed.begin(), observed.end(), rng);
        t.assign(latents.begin(), latents.begin() + lat_targets);
        t.insert(t.end(), observed.begin(), observed.begin() + obs_targets);
    } else {
        throw std::invalid_argument("sample_targets: setting must be 1, 2 or 3");
    }
    std::sort(t.begin(), t.end());
    return t;
}

/// Noise-scale plan: target variances are drawn from U[1,5] in the first
/// half of the environments and U[5,9] in the second half; non-target
/// variances come from U[1,3] once and are shared by all environments.
inline EnvironmentPlan make_environment_plan(const std::vector<NodeId>& targets, int n_nodes, int n_envs,
                                             std::uint64_t seed) {
    if (n_envs < 2) throw std::invalid_argument("make_environment_plan: need at least two environments");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> low(1.0, 5.0), high(5.0, 9.0), fixed(1.0, 3.0);
    EnvironmentPlan plan;
    plan.n_envs = n_envs;
    plan.targets = targets;
    std::sort(plan.targets.begin(), plan.targets.end());
    plan.scale.resize(n_envs, n_nodes);
    std::vector<char> is_target(static_cast<size_t>(n_nodes), 0);
    for (NodeId v : plan.targets) {
        if (v < 0 || v >= n_nodes) throw std::invalid_argument("make_environment_plan: target id out of range");
        is_target[static_cast<size_t>(v)] = 1;
    }
    const int first_half = (n_envs + 1) / 2;
    for (int i = 0; i < n_nodes; ++i) {
        if (is_target[static_cast<size_t>(i)]) {
            for (int d = 0; d < n_envs; ++d)
                plan.scale(d, i) = std::sqrt(d < first_half ? low(rng) : high(rng));
        } else {
            double sd = std::sqrt(fixed(rng));
            for (int d = 0; d < n_envs; ++d) plan.scale(d, i) = sd;
        }
    }
    plan.recovery_bound_warning = n_envs < static_cast<int>(plan.targets.size()) + 1;
    return plan;
}

namespace detail {

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

inline double mlp_eval(const NodeMlp& mlp, const Eigen::VectorXd& in, double slope) {
    Eigen::VectorXd h = mlp.w1 * in + mlp.b1;
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = leaky_relu(h(i), slope);
    return (mlp.w2 * h)(0) + mlp.b2;
}

}  // namespace detail

/// Ancestral sampling in topological order; latent columns are dropped
/// from the returned dataset but the true target-noise draws are kept for
/// evaluation. Laplace noises are scaled so their variance matches the
/// squared plan entry.
inline SimulationResult generate(const ScmSpec& spec, const EnvironmentPlan& plan, int samples_per_env,
                                 std::uint64_t seed) {
    const int n = spec.graph.num_nodes();
    if (plan.scale.cols() != n) throw std::invalid_argument("generate: plan and spec node counts differ");
    if (samples_per_env < 1) throw std::invalid_argument("generate: need at least one sample per environment");
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto draw_noise = [&](double sd) {
        if (spec.noise_family == NoiseFamily::Gaussian) return sd * gauss(rng);
        // Laplace with variance sd^2: scale parameter sd/sqrt(2), inverse-CDF sampling
        double u = unif(rng) - 0.5;
        double b = sd / std::sqrt(2.0);
        return -b * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
    };

    const auto order = spec.graph.topological_order();
    const auto observed = spec.graph.nodes_of_kind(NodeKind::Observed);
    const int total = plan.n_envs * samples_per_env;

    SimulationResult out;
    out.target_ids = plan.targets;
    out.data.observed_ids = observed;
    out.data.n_envs = plan.n_envs;
    out.data.samples.resize(total, static_cast<Eigen::Index>(observed.size()));
    out.data.env_index.resize(static_cast<size_t>(total));
    out.target_noises.resize(total, static_cast<Eigen::Index>(plan.targets.size()));

    Eigen::VectorXd x(n), noise(n);
    int row = 0;
    for (int d = 0; d < plan.n_envs; ++d) {
        for (int s = 0; s < samples_per_env; ++s, ++row) {
            for (NodeId v = 0; v < n; ++v) noise(v) = draw_noise(plan.scale(d, v));
            for (NodeId v : order) {
                const auto& parents = spec.graph.parents(v);
                if (parents.empty()) {
                    x(v) = noise(v);
                } else if (spec.mechanism == Mechanism::Linear) {
                    double acc = noise(v);
                    for (NodeId p : parents) acc += spec.coef(v, p) * x(p);
                    x(v) = acc;
                } else {
                    Eigen::VectorXd in(static_cast<Eigen::Index>(parents.size()));
                    for (size_t pi = 0; pi < parents.size(); ++pi)
                        in(static_cast<Eigen::Index>(pi)) = x(parents[pi]);
                    x(v) = detail::mlp_eval(spec.mlps[static_cast<size_t>(v)], in, spec.leaky_slope) + noise(v);
                }
            }
            for (size_t c = 0; c < observed.size(); ++c)
                out.data.samples(row, static_cast<Eigen::Index>(c)) = x(observed[c]);
            for (size_t c = 0; c < plan.targets.size(); ++c)
                out.target_noises(row, static_cast<Eigen::Index>(c)) = noise(plan.targets[c]);
            out.data.env_index[static_cast<size_t>(row)] = d;
        }
    }
    return out;
}

/// Total-effect mixing matrix of a linear spec: rows are observed
/// variables (ascending id), columns are exogenous noises ordered
/// [latent noises | observed noises], each block ascending by id.
struct MixingMatrix {
    Eigen::MatrixXd w;
    std::vector<NodeId> column_ids;  // noise owner per column
};

inline MixingMatrix analytic_mixing_matrix(const ScmSpec& spec) {
    if (spec.mechanism != Mechanism::Linear)
        throw std::invalid_argument("analytic_mixing_matrix: linear mechanism required");
    const int n = spec.graph.num_nodes();
    Eigen::MatrixXd full = Eigen::MatrixXd::Identity(n, n) - spec.coef;
    Eigen::MatrixXd inv = full.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
    const auto observed = spec.graph.nodes_of_kind(NodeKind::Observed);
    const auto latents = spec.graph.nodes_of_kind(NodeKind::Latent);
    MixingMatrix out;
    out.column_ids = latents;
    out.column_ids.insert(out.column_ids.end(), observed.begin(), observed.end());
    out.w.resize(static_cast<Eigen::Index>(observed.size()), n);
    for (size_t r = 0; r < observed.size(); ++r)
        for (size_t c = 0; c < out.column_ids.size(); ++c)
            out.w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                inv(observed[r], out.column_ids[c]);
    return out;
}

/// Columns of the analytic mixing matrix for the given targets, in the
/// targets' sorted order (the order noise indices use downstream).
inline Eigen::MatrixXd mixing_target_columns(const MixingMatrix& m, std::vector<NodeId> targets) {
    std::sort(targets.begin(), targets.end());
    Eigen::MatrixXd out(m.w.rows(), static_cast<Eigen::Index>(targets.size()));
    for (size_t t = 0; t < targets.size(); ++t) {
        auto it = std::find(m.column_ids.begin(), m.column_ids.end(), targets[t]);
        if (it == m.column_ids.end()) throw std::invalid_argument("mixing_target_columns: unknown target");
        out.col(static_cast<Eigen::Index>(t)) = m.w.col(it - m.column_ids.begin());
    }
    return out;
}

inline ScmSpec random_linear_scm(const Dag& g, std::uint64_t seed, NoiseFamily family = NoiseFamily::Gaussian,
                                 double coef_lo = 0.5, double coef_hi = 1.0) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> cdist(coef_lo, coef_hi);
    ScmSpec spec;
    spec.graph = g;
    spec.mechanism = Mechanism::Linear;
    spec.noise_family = family;
    spec.coef = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
    for (auto [a, b] : g.edges()) spec.coef(b, a) = cdist(rng);
    return spec;
}

/// MLP weights and biases from U[0.5, 1]; hidden width 2*fan_in + 2.
inline ScmSpec random_mlp_scm(const Dag& g, std::uint64_t seed, NoiseFamily family = NoiseFamily::Laplace,
                              double leaky_slope = 0.2) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> wdist(0.5, 1.0);
    ScmSpec spec;
    spec.graph = g;
    spec.mechanism = Mechanism::MlpAdditive;
    spec.noise_family = family;
    spec.leaky_slope = leaky_slope;
    spec.mlps.resize(static_cast<size_t>(g.num_nodes()));
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const int fan_in = static_cast<int>(g.parents(v).size());
        if (fan_in == 0) continue;
        const int hidden = 2 * fan_in + 2;
        NodeMlp& m = spec.mlps[static_cast<size_t>(v)];
        m.w1.resize(hidden, fan_in);
        m.b1.resize(hidden);
        m.w2.resize(hidden);
        for (int i = 0; i < hidden; ++i) {
            for (int j = 0; j < fan_in; ++j) m.w1(i, j) = wdist(rng);
            m.b1(i) = wdist(rng);
            m.w2(i) = wdist(rng);
        }
        m.b2 = wdist(rng);
    }
    return spec;
}

}  // namespace lit
