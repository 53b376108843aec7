#pragma once

// Exhaustive check that the X positions surviving loss are a uniform sample
// of the surviving positions, for every basis plan produced by the unranker.

#include <bit>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "siqrng/squash_sample.hpp"

namespace sampling {

using Mask = std::uint32_t;

inline std::vector<Mask> all_plans(std::uint64_t N, std::uint64_t N_x) {
    std::vector<Mask> plans;
    const mpz_class total = siqrng::binomial(N, N_x);
    for (mpz_class i = 0; i < total; ++i) {
        Mask m = 0;
        for (auto p : siqrng::unrank_combination(i, N, N_x)) {
            m |= Mask{1} << p;
        }
        plans.push_back(m);
    }
    return plans;
}

/// Weighted occurrences of each surviving-X set, grouped by (survivors, n_x).
using Groups = std::map<std::pair<Mask, int>, std::map<Mask, std::uint64_t>>;

/**
 * True when, inside every group, all C(n, n_x) subsets of the survivors occur
 * with the same total weight (a chi-square statistic of exactly zero).
 */
inline bool groups_uniform(const Groups& groups) {
    for (const auto& [key, hist] : groups) {
        const auto [survivors, n_x] = key;
        const int n = std::popcount(survivors);
        const mpz_class expected_subsets = siqrng::binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(n_x));
        if (expected_subsets != static_cast<unsigned long>(hist.size())) {
            return false;
        }
        const std::uint64_t first = hist.begin()->second;
        for (const auto& [subset, weight] : hist) {
            if (weight != first) {
                return false;
            }
        }
    }
    return true;
}

/// Fixed survivor mask `alive`, independent of the basis.
inline bool uniform_under_fixed_loss(const std::vector<Mask>& plans, Mask alive) {
    Groups groups;
    for (Mask plan : plans) {
        const Mask x = plan & alive;
        ++groups[{alive, std::popcount(x)}][x];
    }
    return groups_uniform(groups);
}

/// Deterministic per-position loss that depends on the basis measured there.
inline bool uniform_under_positional_basis_loss(const std::vector<Mask>& plans, unsigned N, Mask lost_if_x,
                                                Mask lost_if_z) {
    const Mask all = (Mask{1} << N) - 1;
    Groups groups;
    for (Mask plan : plans) {
        const Mask alive = all & ~((plan & lost_if_x) | (~plan & lost_if_z));
        const Mask x = plan & alive;
        ++groups[{alive, std::popcount(x)}][x];
    }
    return groups_uniform(groups);
}

/**
 * Basis-dependent i.i.d. loss: an X-measured pulse survives with probability
 * ax/d, a Z-measured one with az/d. Weights are kept as exact integers by
 * scaling every pattern probability by d^N.
 */
inline bool uniform_under_iid_basis_loss(const std::vector<Mask>& plans, unsigned N, std::uint64_t ax,
                                         std::uint64_t az, std::uint64_t d) {
    Groups groups;
    for (Mask plan : plans) {
        for (Mask alive = 0; alive < (Mask{1} << N); ++alive) {
            std::uint64_t w = 1;
            for (unsigned i = 0; i < N; ++i) {
                const bool is_x = (plan >> i) & 1U;
                const bool lives = (alive >> i) & 1U;
                const std::uint64_t a = is_x ? ax : az;
                w *= lives ? a : d - a;
            }
            if (w == 0) {
                continue;
            }
            const Mask x = plan & alive;
            groups[{alive, std::popcount(x)}][x] += w;
        }
    }
    return groups_uniform(groups);
}

}  // namespace sampling
