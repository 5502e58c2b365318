#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lit/ci.hpp"
#include "lit/indicator.hpp"

namespace lit {

enum class MatchMode { Sufficient, Latent };

/// Raised by the oracle-backed group resolution when no (or more than one)
/// group member satisfies the separation pattern a target must produce.
struct faithfulness_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Verdict {
    Undecided,
    EmptyResidual,    // excluded: residual set empty
    ConditionA,       // excluded: every residual noise lives in a non-superset indicator set
    UniqueIndicator,  // included: unique indicator set with nonempty residual
    GroupC1Winner,    // included by the per-group separation pattern
    GroupC1Loser,     // excluded by the per-group separation pattern
    GroupC2Survivor,  // included: no conditioning scheme separates it
    GroupC2Removed,   // excluded: some conditioning scheme separates it
};

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Undecided: return "undecided";
        case Verdict::EmptyResidual: return "excluded(I)";
        case Verdict::ConditionA: return "excluded(A)";
        case Verdict::UniqueIndicator: return "included(unique)";
        case Verdict::GroupC1Winner: return "included(C1)";
        case Verdict::GroupC1Loser: return "excluded(C1)";
        case Verdict::GroupC2Survivor: return "included(C2)";
        case Verdict::GroupC2Removed: return "excluded(C2)";
    }
    return "?";
}

struct CandidateSet {
    std::vector<int> members;              // observed indices, ascending
    std::vector<Verdict> verdicts;         // per observed index
    std::vector<int> latent_only_noises;   // recovered noises in no indicator set
    bool relaxed_fallback = false;         // exhaustive (C2) cap was hit

    bool contains(int i) const { return std::binary_search(members.begin(), members.end(), i); }
};

struct MatchStats {
    long long ci_tests_phase3 = 0;    // tests spent in the group-resolution phase
    long long ci_tests_indicator = 0; // tests spent building indicator sets
};

struct MatchOptions {
    bool exhaustive_c2 = true;  // full subset enumeration in the latent group filter
    int max_group_exhaustive = 6;
    int max_parents_exhaustive = 6;
};

inline bool check_condition_I(const IndicatorSets& ind, int i) {
    ind.check_var(i);
    return ind.residual[static_cast<size_t>(i)] == 0;
}

inline bool check_condition_II(const IndicatorSets& ind, int i) {
    ind.check_var(i);
    if (ind.residual[static_cast<size_t>(i)] == 0)
        throw std::invalid_argument("check_condition_II: residual set must be nonempty");
    return ind.unique(i);
}

/// Condition (A): every noise in the residual set appears in some other
/// indicator set that is not a superset of I_i. Holding means i cannot be
/// an observed target.
inline bool check_condition_A(const IndicatorSets& ind, int i) {
    ind.check_var(i);
    NoiseMask res = ind.residual[static_cast<size_t>(i)];
    if (res == 0) throw std::invalid_argument("check_condition_A: residual set must be nonempty");
    NoiseMask own = ind.sets[static_cast<size_t>(i)];
    for (int l : mask_to_indices(res)) {
        bool found = false;
        for (int j = 0; j < ind.num_vars && !found; ++j) {
            if (j == i) continue;
            NoiseMask other = ind.sets[static_cast<size_t>(j)];
            if ((other >> l) & 1 && !mask_subset(own, other)) found = true;
        }
        if (!found) return false;
    }
    return true;
}

namespace detail {

inline std::vector<VarRef> noise_refs(NoiseMask m) {
    std::vector<VarRef> out;
    for (int j : mask_to_indices(m)) out.push_back(VarRef::noise(j));
    return out;
}

}  // namespace detail

/// Resolve a shared-indicator group under causal sufficiency. The oracle
/// route returns the unique member whose conditioning makes the residual
/// noise independent of every other member (C1); the statistical route
/// uses the smallest summed dependence score instead of thresholded tests.
inline int resolve_group_C1(const IndicatorSets& ind, const std::vector<int>& group, CiBackend& ci,
                            MatchStats* stats = nullptr) {
    if (group.size() < 2) throw std::invalid_argument("resolve_group_C1: group needs at least two members");
    const int i0 = group[0];
    NoiseMask res = ind.residual[static_cast<size_t>(i0)];
    if (res == 0) throw std::invalid_argument("resolve_group_C1: empty residual set");
    std::vector<VarRef> s_refs;
    for (int j : ind.possible_parents[static_cast<size_t>(i0)]) s_refs.push_back(VarRef::obs(j));
    auto noises = mask_to_indices(res);

    long long before = ci.queries_issued();
    int winner = -1;
    if (!ci.is_statistical()) {
        if (noises.size() != 1)
            throw faithfulness_error("resolve_group_C1: oracle residual set is not a singleton");
        int l = noises[0];
        for (int k : group) {
            bool all_sep = true;
            for (int j : group) {
                if (j == k) continue;
                CiQuery q{VarRef::noise(l), VarRef::obs(j), s_refs};
                q.cond.push_back(VarRef::obs(k));
                if (!ci.is_independent(q)) {
                    all_sep = false;
                    break;
                }
            }
            if (all_sep) {
                if (winner >= 0) throw faithfulness_error("resolve_group_C1: multiple members satisfy (C1)");
                winner = k;
            }
        }
        if (winner < 0) throw faithfulness_error("resolve_group_C1: no member satisfies (C1)");
    } else {
        auto& stat = dynamic_cast<StatisticalCi&>(ci);
        double best = std::numeric_limits<double>::infinity();
        for (int k : group) {
            double sum = 0.0;
            for (int j : group) {
                if (j == k) continue;
                for (int l : noises) {
                    CiQuery q{VarRef::noise(l), VarRef::obs(j), s_refs};
                    q.cond.push_back(VarRef::obs(k));
                    sum += stat.dependence_score(q);
                }
            }
            if (sum < best) {
                best = sum;
                winner = k;
            }
        }
    }
    if (stats) stats->ci_tests_phase3 += ci.queries_issued() - before;
    return winner;
}

/// Latent-mode group filter (C2): a member is removed when some residual
/// noise can be separated from it by conditioning on other group members,
/// a subset of the possible parents, and the remaining recovered noises.
/// `exhaustive` enumerates all subsets; otherwise only the full sets are
/// used (the relaxed test).
inline std::vector<int> filter_group_C2(const IndicatorSets& ind, const std::vector<int>& group, CiBackend& ci,
                                        const MatchOptions& opts, MatchStats* stats = nullptr,
                                        bool* relaxed_fallback = nullptr) {
    if (group.size() < 2) throw std::invalid_argument("filter_group_C2: group needs at least two members");
    const int i0 = group[0];
    NoiseMask res = ind.residual[static_cast<size_t>(i0)];
    if (res == 0) throw std::invalid_argument("filter_group_C2: empty residual set");
    NoiseMask full = ind.sets[static_cast<size_t>(i0)];
    const auto& s_all = ind.possible_parents[static_cast<size_t>(i0)];

    bool exhaustive = opts.exhaustive_c2;
    if (exhaustive && (static_cast<int>(group.size()) > opts.max_group_exhaustive ||
                       static_cast<int>(s_all.size()) > opts.max_parents_exhaustive)) {
        exhaustive = false;
        if (relaxed_fallback) *relaxed_fallback = true;
    }

    long long before = ci.queries_issued();
    auto separated = [&](int j) {
        std::vector<int> others;
        for (int k : group)
            if (k != j) others.push_back(k);
        auto try_query = [&](unsigned kmask, unsigned smask) {
            for (int l : mask_to_indices(res)) {
                CiQuery q{VarRef::noise(l), VarRef::obs(j), {}};
                for (size_t b = 0; b < others.size(); ++b)
                    if (kmask & (1u << b)) q.cond.push_back(VarRef::obs(others[b]));
                for (size_t b = 0; b < s_all.size(); ++b)
                    if (smask & (1u << b)) q.cond.push_back(VarRef::obs(s_all[b]));
                for (const auto& nr : detail::noise_refs(full & ~(NoiseMask{1} << l))) q.cond.push_back(nr);
                if (ci.is_independent(q)) return true;
            }
            return false;
        };
        if (!exhaustive)
            return try_query((1u << others.size()) - 1, (1u << s_all.size()) - 1);
        for (unsigned kmask = 0; kmask < (1u << others.size()); ++kmask)
            for (unsigned smask = 0; smask < (1u << s_all.size()); ++smask)
                if (try_query(kmask, smask)) return true;
        return false;
    };

    std::vector<int> survivors;
    for (int j : group)
        if (!separated(j)) survivors.push_back(j);
    if (stats) stats->ci_tests_phase3 += ci.queries_issued() - before;
    return survivors;
}

/// Reference matching algorithm. Sufficient mode: exclude on empty
/// residual, include unique indicator sets, then resolve each remaining
/// shared-indicator group to a single member. Latent mode: additionally
/// exclude on condition (A) and replace group resolution by the (C2)
/// filter, yielding the auxiliary-graph candidate set.
inline std::pair<CandidateSet, MatchStats> lit_match(const IndicatorSets& ind, CiBackend& ci, MatchMode mode,
                                                     const MatchOptions& opts = {}) {
    CandidateSet out;
    MatchStats stats;
    stats.ci_tests_indicator = ind.ci_tests;
    out.verdicts.assign(static_cast<size_t>(ind.num_vars), Verdict::Undecided);
    out.latent_only_noises = ind.uncovered_noises();

    std::vector<int> remaining;
    for (int i = 0; i < ind.num_vars; ++i) {
        if (check_condition_I(ind, i)) {
            out.verdicts[static_cast<size_t>(i)] = Verdict::EmptyResidual;
        } else if (mode == MatchMode::Latent && check_condition_A(ind, i)) {
            out.verdicts[static_cast<size_t>(i)] = Verdict::ConditionA;
        } else if (ind.unique(i)) {
            out.verdicts[static_cast<size_t>(i)] = Verdict::UniqueIndicator;
            out.members.push_back(i);
        } else {
            remaining.push_back(i);
        }
    }

    std::map<NoiseMask, std::vector<int>> groups;
    for (int i : remaining) groups[ind.sets[static_cast<size_t>(i)]].push_back(i);
    for (auto& [mask, group] : groups) {
        if (mode == MatchMode::Sufficient) {
            int winner = resolve_group_C1(ind, group, ci, &stats);
            for (int i : group)
                out.verdicts[static_cast<size_t>(i)] =
                    i == winner ? Verdict::GroupC1Winner : Verdict::GroupC1Loser;
            out.members.push_back(winner);
        } else {
            auto survivors = filter_group_C2(ind, group, ci, opts, &stats, &out.relaxed_fallback);
            for (int i : group)
                out.verdicts[static_cast<size_t>(i)] = Verdict::GroupC2Removed;
            for (int i : survivors) {
                out.verdicts[static_cast<size_t>(i)] = Verdict::GroupC2Survivor;
                out.members.push_back(i);
            }
        }
    }
    std::sort(out.members.begin(), out.members.end());
    return {out, stats};
}

/// Indicator-matrix formulation (the fast algorithms). Rows and columns of
/// the working matrix are retired in passes keyed by row/column support
/// counts; ties are broken deterministically by lowest variable id. The
/// output contract is equality with lit_match under the same mode and
/// backend.
inline std::pair<CandidateSet, MatchStats> lit_fast(const IndicatorSets& ind, CiBackend& ci, MatchMode mode,
                                                    const MatchOptions& opts = {}) {
    CandidateSet out;
    MatchStats stats;
    stats.ci_tests_indicator = ind.ci_tests;
    out.verdicts.assign(static_cast<size_t>(ind.num_vars), Verdict::Undecided);
    out.latent_only_noises = ind.uncovered_noises();

    const int n = ind.num_vars;
    std::vector<int> row_count(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) row_count[static_cast<size_t>(i)] = mask_size(ind.sets[static_cast<size_t>(i)]);
    std::vector<int> col_count(static_cast<size_t>(ind.num_noises), 0);
    for (int i = 0; i < n; ++i)
        for (int j : mask_to_indices(ind.sets[static_cast<size_t>(i)])) ++col_count[static_cast<size_t>(j)];

    NoiseMask active_cols = ind.num_noises == 64 ? ~NoiseMask{0} : ((NoiseMask{1} << ind.num_noises) - 1);
    std::vector<char> active(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (ind.sets[static_cast<size_t>(i)] != 0)
            active[static_cast<size_t>(i)] = 1;
        else
            out.verdicts[static_cast<size_t>(i)] = Verdict::EmptyResidual;
    }

    while (true) {
        // rows whose remaining support became empty are spent
        for (int i = 0; i < n; ++i)
            if (active[static_cast<size_t>(i)] && (ind.sets[static_cast<size_t>(i)] & active_cols) == 0) {
                active[static_cast<size_t>(i)] = 0;
                out.verdicts[static_cast<size_t>(i)] = Verdict::EmptyResidual;
            }
        int w = -1, w_rem = std::numeric_limits<int>::max();
        for (int i = 0; i < n; ++i) {
            if (!active[static_cast<size_t>(i)]) continue;
            int rem = mask_size(ind.sets[static_cast<size_t>(i)] & active_cols);
            auto better = [&](int cand_rem, int cand_i) {
                if (w < 0) return true;
                if (cand_rem != w_rem) return cand_rem < w_rem;
                if (row_count[static_cast<size_t>(cand_i)] != row_count[static_cast<size_t>(w)])
                    return row_count[static_cast<size_t>(cand_i)] < row_count[static_cast<size_t>(w)];
                return cand_i < w;
            };
            if (better(rem, i)) {
                w = i;
                w_rem = rem;
            }
        }
        if (w < 0) break;

        NoiseMask w_support = ind.sets[static_cast<size_t>(w)] & active_cols;
        std::vector<int> z_i, z_j;
        for (int i = 0; i < n; ++i) {
            if (!active[static_cast<size_t>(i)]) continue;
            if ((ind.sets[static_cast<size_t>(i)] & active_cols) != w_support) continue;
            z_i.push_back(i);
            if (row_count[static_cast<size_t>(i)] == row_count[static_cast<size_t>(w)]) z_j.push_back(i);
        }

        if (mode == MatchMode::Sufficient) {
            if (z_j.size() == 1) {
                out.verdicts[static_cast<size_t>(w)] = Verdict::UniqueIndicator;
                out.members.push_back(w);
            } else {
                int winner = resolve_group_C1(ind, z_j, ci, &stats);
                for (int i : z_j)
                    out.verdicts[static_cast<size_t>(i)] =
                        i == winner ? Verdict::GroupC1Winner : Verdict::GroupC1Loser;
                out.members.push_back(winner);
            }
        } else {
            // condition (A) as a submatrix zero test: pick the remaining
            // noise with the fewest owners and look for a variable holding
            // it whose indicator set misses part of I_w
            int n_m = -1, best_m = std::numeric_limits<int>::max();
            for (int j : mask_to_indices(w_support)) {
                if (col_count[static_cast<size_t>(j)] < best_m) {
                    best_m = col_count[static_cast<size_t>(j)];
                    n_m = j;
                }
            }
            bool zero_entry = false;
            for (int i = 0; i < n && !zero_entry; ++i) {
                if (!((ind.sets[static_cast<size_t>(i)] >> n_m) & 1)) continue;
                if (!mask_subset(ind.sets[static_cast<size_t>(w)], ind.sets[static_cast<size_t>(i)])) zero_entry = true;
            }
            if (zero_entry) {
                for (int i : z_j) out.verdicts[static_cast<size_t>(i)] = Verdict::ConditionA;
            } else if (z_j.size() == 1) {
                out.verdicts[static_cast<size_t>(w)] = Verdict::UniqueIndicator;
                out.members.push_back(w);
            } else {
                auto survivors = filter_group_C2(ind, z_j, ci, opts, &stats, &out.relaxed_fallback);
                for (int i : z_j) out.verdicts[static_cast<size_t>(i)] = Verdict::GroupC2Removed;
                for (int i : survivors) {
                    out.verdicts[static_cast<size_t>(i)] = Verdict::GroupC2Survivor;
                    out.members.push_back(i);
                }
            }
        }

        for (int i : z_i)
            if (out.verdicts[static_cast<size_t>(i)] == Verdict::Undecided)
                out.verdicts[static_cast<size_t>(i)] = Verdict::EmptyResidual;
        for (int i : z_i) active[static_cast<size_t>(i)] = 0;
        active_cols &= ~w_support;
    }

    std::sort(out.members.begin(), out.members.end());
    return {out, stats};
}

}  // namespace lit
