#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lit {

using NoiseMask = std::uint64_t;

inline int mask_size(NoiseMask m) { return std::popcount(m); }

inline bool mask_subset(NoiseMask a, NoiseMask b) { return (a & b) == a; }

inline bool mask_strict_subset(NoiseMask a, NoiseMask b) { return a != b && mask_subset(a, b); }

inline std::vector<int> mask_to_indices(NoiseMask m) {
    std::vector<int> out;
    while (m) {
        int j = std::countr_zero(m);
        out.push_back(j);
        m &= m - 1;
    }
    return out;
}

/// Indicator sets over a fixed universe: `num_vars` observed variables
/// (positions 0..num_vars-1) and `num_noises` recovered-noise indices.
/// I_i is the set of noise indices dependent on variable i. The derived
/// structures are cached at construction:
///   S_i  = variables whose indicator set is a strict subset of I_i
///   R_i  = residual: noises in I_i covered by no indicator set in S_i
struct IndicatorSets {
    int num_vars = 0;
    int num_noises = 0;
    std::vector<NoiseMask> sets;                    // I_i
    std::vector<std::vector<int>> possible_parents; // S_i
    std::vector<NoiseMask> residual;                // script-N_i
    long long ci_tests = 0;                         // tests spent building the sets

    static IndicatorSets build(std::vector<NoiseMask> indicator_sets, int num_noises) {
        if (num_noises < 0 || num_noises > 64)
            throw std::invalid_argument("IndicatorSets: noise count must be in [0, 64]");
        IndicatorSets out;
        out.num_vars = static_cast<int>(indicator_sets.size());
        out.num_noises = num_noises;
        out.sets = std::move(indicator_sets);
        NoiseMask universe = num_noises == 64 ? ~NoiseMask{0} : ((NoiseMask{1} << num_noises) - 1);
        for (auto m : out.sets)
            if ((m & ~universe) != 0) throw std::invalid_argument("IndicatorSets: noise index out of range");
        out.possible_parents.resize(out.sets.size());
        out.residual.resize(out.sets.size());
        for (int i = 0; i < out.num_vars; ++i) {
            NoiseMask covered = 0;
            for (int j = 0; j < out.num_vars; ++j) {
                if (j == i) continue;
                if (mask_strict_subset(out.sets[j], out.sets[i])) {
                    out.possible_parents[i].push_back(j);
                    covered |= out.sets[j];
                }
            }
            out.residual[i] = out.sets[i] & ~covered;
        }
        return out;
    }

    bool unique(int i) const {
        check_var(i);
        for (int j = 0; j < num_vars; ++j)
            if (j != i && sets[j] == sets[static_cast<size_t>(i)]) return false;
        return true;
    }

    /// Noise indices that appear in no indicator set (candidates for
    /// latent-only intervention targets).
    std::vector<int> uncovered_noises() const {
        NoiseMask all = 0;
        for (auto m : sets) all |= m;
        NoiseMask universe = num_noises == 64 ? ~NoiseMask{0} : ((NoiseMask{1} << num_noises) - 1);
        return mask_to_indices(universe & ~all);
    }

    void check_var(int i) const {
        if (i < 0 || i >= num_vars) throw std::invalid_argument("IndicatorSets: bad variable index " + std::to_string(i));
    }
};

}  // namespace lit
