#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lit/augmented.hpp"
#include "lit/scm.hpp"

namespace lit {

/// A variable reference in a CI query: either an observed variable
/// (by observed index) or a recovered noise (by noise index).
struct VarRef {
    enum class Kind { Observed, Noise };
    Kind kind = Kind::Observed;
    int index = 0;

    static VarRef obs(int i) { return {Kind::Observed, i}; }
    static VarRef noise(int j) { return {Kind::Noise, j}; }
    bool operator==(const VarRef& o) const { return kind == o.kind && index == o.index; }
    bool operator<(const VarRef& o) const {
        if (kind != o.kind) return kind < o.kind;
        return index < o.index;
    }
};

struct CiQuery {
    VarRef x, y;
    std::vector<VarRef> cond;

    void validate() const {
        if (x == y) throw std::invalid_argument("CiQuery: x and y must differ");
        for (const auto& c : cond)
            if (c == x || c == y) throw std::invalid_argument("CiQuery: conditioning set overlaps x or y");
    }
};

/// Conditional-independence backend. Queries are counted (memoized repeats
/// included: the count reflects the tests the algorithm asks for) and
/// answers are cached; the cache is mutex-guarded so concurrent readers
/// are safe.
class CiBackend {
public:
    virtual ~CiBackend() = default;

    bool is_independent(const CiQuery& q) {
        q.validate();
        std::string key = cache_key(q);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++issued_;
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        bool ans = eval(q);
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.emplace(std::move(key), ans);
        return ans;
    }

    long long queries_issued() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return issued_;
    }

    virtual bool is_statistical() const = 0;

protected:
    virtual bool eval(const CiQuery& q) const = 0;

    void count_query() const {
        std::lock_guard<std::mutex> lock(mutex_);
        ++issued_;
    }

private:
    static std::string cache_key(const CiQuery& q) {
        auto enc = [](const VarRef& r) {
            return std::string(r.kind == VarRef::Kind::Observed ? "o" : "n") + std::to_string(r.index);
        };
        VarRef a = q.x, b = q.y;
        if (b < a) std::swap(a, b);
        std::vector<VarRef> cond = q.cond;
        std::sort(cond.begin(), cond.end());
        std::string key = enc(a) + "|" + enc(b) + "|";
        for (const auto& c : cond) key += enc(c) + ",";
        return key;
    }

    mutable std::mutex mutex_;
    mutable long long issued_ = 0;
    std::unordered_map<std::string, bool> cache_;
};

/// Exact infinite-sample backend: answers by d-separation on the augmented
/// graph, with recovered-noise indices mapped to their noise nodes. This
/// realizes the T-faithfulness semantics exactly, so it is also how the
/// Markov property of G_T enters the test suite.
class GraphOracleCi : public CiBackend {
public:
    explicit GraphOracleCi(AugmentedGraph g) : g_(std::move(g)), noise_map_(g_.noise_nodes) {}

    /// Custom noise relabeling: noise index j refers to noise_map[j].
    GraphOracleCi(AugmentedGraph g, std::vector<NodeId> noise_map) : g_(std::move(g)), noise_map_(std::move(noise_map)) {}

    bool is_statistical() const override { return false; }

    const AugmentedGraph& graph() const { return g_; }

protected:
    bool eval(const CiQuery& q) const override {
        std::vector<NodeId> u{resolve(q.x)}, v{resolve(q.y)}, w;
        w.reserve(q.cond.size());
        for (const auto& c : q.cond) w.push_back(resolve(c));
        return d_separated(g_.graph, u, v, w);
    }

private:
    NodeId resolve(const VarRef& r) const {
        if (r.kind == VarRef::Kind::Observed) {
            if (r.index < 0 || r.index >= static_cast<int>(g_.observed.size()))
                throw std::invalid_argument("GraphOracleCi: observed index out of range");
            return g_.observed[static_cast<size_t>(r.index)];
        }
        if (r.index < 0 || r.index >= static_cast<int>(noise_map_.size()))
            throw std::invalid_argument("GraphOracleCi: noise index out of range");
        return noise_map_[static_cast<size_t>(r.index)];
    }

    AugmentedGraph g_;
    std::vector<NodeId> noise_map_;
};

namespace detail {

inline double normal_cdf_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

/// Acklam's rational approximation of the standard normal quantile
/// (absolute error below 1.2e-9 on (0, 1)).
inline double inv_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("inv_normal_cdf: p must lie in (0, 1)");
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) return -inv_normal_cdf(1.0 - p);
    double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// van der Waerden scores: rank-normalize a column to a standard normal
/// shape. Strictly monotone transforms of the input leave the output
/// unchanged, which is what makes noise columns usable in partial
/// correlations despite the recovery-phase indeterminacy.
inline Eigen::VectorXd rank_normalize(const Eigen::VectorXd& col) {
    const Eigen::Index n = col.size();
    std::vector<Eigen::Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return col(a) < col(b); });
    Eigen::VectorXd out(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        double u = (static_cast<double>(r) + 0.625) / (static_cast<double>(n) + 0.25);
        out(idx[static_cast<size_t>(r)]) = inv_normal_cdf(u);
    }
    return out;
}

}  // namespace detail

struct StatisticalCiOptions {
    double alpha = 0.15;
    int max_cond = 8;
    bool rank_normalize_noises = true;
};

/// Partial-correlation backend on multi-environment data. Each query
/// residualizes the pair on the conditioning set within every environment,
/// computes per-environment Fisher z statistics and combines them with
/// Stouffer's method; variance shifts across environments therefore do not
/// masquerade as dependence.
class StatisticalCi : public CiBackend {
public:
    StatisticalCi(const MultiEnvDataset& data, const Eigen::MatrixXd& noises, StatisticalCiOptions opts = {})
        : opts_(opts), n_envs_(data.n_envs) {
        if (noises.rows() != 0 && noises.rows() != data.samples.rows())
            throw std::invalid_argument("StatisticalCi: noises must align row-wise with the dataset");
        obs_ = data.samples;
        noise_ = noises;
        if (opts_.rank_normalize_noises)
            for (Eigen::Index j = 0; j < noise_.cols(); ++j) noise_.col(j) = detail::rank_normalize(noise_.col(j));
        env_rows_.resize(static_cast<size_t>(n_envs_));
        for (Eigen::Index r = 0; r < obs_.rows(); ++r)
            env_rows_[static_cast<size_t>(data.env_index[static_cast<size_t>(r)])].push_back(r);
    }

    bool is_statistical() const override { return true; }

    /// Sum over environments of |partial correlation|; the monotone
    /// dependence-strength proxy used for group tie-breaking.
    double dependence_score(const CiQuery& q) const {
        q.validate();
        count_query();
        double score = 0.0;
        for (int d = 0; d < n_envs_; ++d) score += std::abs(env_partial_corr(q, d));
        return score;
    }

    double p_value(const CiQuery& q) const {
        q.validate();
        double z_sum = 0.0;
        for (int d = 0; d < n_envs_; ++d) {
            const auto& rows = env_rows_[static_cast<size_t>(d)];
            double m = static_cast<double>(rows.size());
            double df = m - static_cast<double>(q.cond.size()) - 3.0;
            if (df < 1.0) throw std::invalid_argument("StatisticalCi: conditioning set larger than sample support");
            double r = env_partial_corr(q, d);
            r = std::clamp(r, -0.999999, 0.999999);
            z_sum += std::atanh(r) * std::sqrt(df);
        }
        double z = z_sum / std::sqrt(static_cast<double>(n_envs_));
        return detail::normal_cdf_two_sided(z);
    }

protected:
    bool eval(const CiQuery& q) const override { return p_value(q) >= opts_.alpha; }

private:
    Eigen::VectorXd column(const VarRef& r) const {
        if (r.kind == VarRef::Kind::Observed) {
            if (r.index < 0 || r.index >= obs_.cols()) throw std::invalid_argument("StatisticalCi: observed index out of range");
            return obs_.col(r.index);
        }
        if (r.index < 0 || r.index >= noise_.cols()) throw std::invalid_argument("StatisticalCi: noise index out of range");
        return noise_.col(r.index);
    }

    double env_partial_corr(const CiQuery& q, int d) const {
        if (static_cast<int>(q.cond.size()) > opts_.max_cond)
            throw std::invalid_argument("StatisticalCi: conditioning set exceeds the size cap");
        const auto& rows = env_rows_[static_cast<size_t>(d)];
        const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
        Eigen::VectorXd x(m), y(m);
        Eigen::VectorXd xs = column(q.x), ys = column(q.y);
        for (Eigen::Index i = 0; i < m; ++i) {
            x(i) = xs(rows[static_cast<size_t>(i)]);
            y(i) = ys(rows[static_cast<size_t>(i)]);
        }
        if (!q.cond.empty()) {
            Eigen::MatrixXd c(m, static_cast<Eigen::Index>(q.cond.size()) + 1);
            c.col(0).setOnes();
            for (size_t j = 0; j < q.cond.size(); ++j) {
                Eigen::VectorXd cj = column(q.cond[j]);
                for (Eigen::Index i = 0; i < m; ++i) c(i, static_cast<Eigen::Index>(j) + 1) = cj(rows[static_cast<size_t>(i)]);
            }
            Eigen::MatrixXd gram = c.transpose() * c;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
            x -= c * ldlt.solve(c.transpose() * x);
            y -= c * ldlt.solve(c.transpose() * y);
        } else {
            x.array() -= x.mean();
            y.array() -= y.mean();
        }
        double sx = x.norm(), sy = y.norm();
        if (sx < 1e-12 || sy < 1e-12) return 0.0;
        return x.dot(y) / (sx * sy);
    }

    StatisticalCiOptions opts_;
    int n_envs_;
    Eigen::MatrixXd obs_;
    Eigen::MatrixXd noise_;
    std::vector<std::vector<Eigen::Index>> env_rows_;
};

}  // namespace lit
