#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "csa/frame_graph.hpp"
#include "csa/rng.hpp"
#include "csa/scenario.hpp"
#include "csa/stopping_set.hpp"

namespace csa::testing {

inline DegreeDistribution dist238(double p2, double p3, double p8) {
    std::map<int, double> probs;
    if (p2 > 0) probs[2] = p2;
    if (p3 > 0) probs[3] = p3;
    if (p8 > 0) probs[8] = p8;
    return DegreeDistribution::from_map(probs);
}

// Bundled reference pair with targets 1e-5 / 1e-3 (the "b3" row of the
// reproduce tool): the two-class scenario used throughout the tests.
inline std::vector<ClassSpec> reference_classes() {
    return {ClassSpec(0.2, dist238(0.0, 0.01, 0.99), 1e-5),
            ClassSpec(0.8, dist238(0.27, 0.73, 0.0), 1e-3)};
}

inline FrameGraph random_small_graph(SplitMix64& rng, int max_n = 12, int max_m = 8) {
    const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_n - 1)));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_m)));
    std::vector<std::pair<int, std::vector<std::uint32_t>>> users;
    for (int u = 0; u < m; ++u) {
        const int max_deg = std::min(4, n);
        const int deg = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_deg)));
        std::vector<std::uint32_t> slots(static_cast<std::size_t>(deg));
        sample_distinct_sorted(rng, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(deg),
                               slots.begin());
        users.emplace_back(0, std::move(slots));
    }
    return FrameGraph::build(n, users);
}

// Reference peeling with a randomized singleton-selection order; quadratic and
// independent of the queue-based implementation.
inline std::vector<std::uint32_t> peel_random_order(const FrameGraph& g, SplitMix64& rng) {
    std::vector<char> resolved(g.user_count(), 0);
    while (true) {
        std::vector<std::uint32_t> singletons;
        for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(g.n); ++s) {
            int live = 0;
            for (std::uint32_t e = g.slot_offset[s]; e < g.slot_offset[s + 1]; ++e) {
                if (!resolved[g.slot_users[e]]) ++live;
            }
            if (live == 1) singletons.push_back(s);
        }
        if (singletons.empty()) break;
        const std::uint32_t s = singletons[rng.below(singletons.size())];
        for (std::uint32_t e = g.slot_offset[s]; e < g.slot_offset[s + 1]; ++e) {
            if (!resolved[g.slot_users[e]]) {
                resolved[g.slot_users[e]] = 1;
                break;
            }
        }
    }
    std::vector<std::uint32_t> out;
    for (std::size_t u = 0; u < g.user_count(); ++u) {
        if (resolved[u]) out.push_back(static_cast<std::uint32_t>(u));
    }
    return out;
}

// Exhaustive count of labeled VN-to-slot-subset assignments on nu labeled VNs
// and mu labeled CNs whose graph is isomorphic to S. Independent oracle for
// the multiplicity c(S) = nu! mu! / |Aut|. Assignments that cannot reach slot
// degree >= 2 are pruned; every surviving assignment is checked for
// isomorphism via the canonical neighborhood-count form.
inline std::uint64_t brute_force_labeled_count(const StoppingSet& target) {
    const int nu = target.nu;
    const int mu = target.mu;
    std::vector<int> degrees;
    for (const auto& row : target.biadjacency) degrees.push_back(static_cast<int>(row.size()));
    std::sort(degrees.begin(), degrees.end());

    std::vector<std::vector<std::uint32_t>> masks_by_size(static_cast<std::size_t>(mu + 1));
    for (std::uint32_t mask = 1; mask < (1u << mu); ++mask) {
        masks_by_size[static_cast<std::size_t>(__builtin_popcount(mask))].push_back(mask);
    }

    std::vector<std::vector<int>> vn_perms;
    {
        std::vector<int> idx(static_cast<std::size_t>(nu));
        std::iota(idx.begin(), idx.end(), 0);
        do {
            vn_perms.push_back(idx);
        } while (std::next_permutation(idx.begin(), idx.end()));
    }

    std::uint64_t count = 0;
    std::vector<std::uint32_t> chosen(static_cast<std::size_t>(nu), 0);

    auto leaf_matches = [&]() {
        // neighborhood-count vector of the assignment (slot -> VN mask)
        std::vector<std::uint32_t> counts(1u << nu, 0);
        for (int s = 0; s < mu; ++s) {
            std::uint32_t vn_mask = 0;
            for (int u = 0; u < nu; ++u) {
                if (chosen[static_cast<std::size_t>(u)] & (1u << s)) vn_mask |= 1u << u;
            }
            counts[vn_mask]++;
        }
        if (counts[0] != 0) return false;  // an unused slot cannot appear
        // connectivity over VNs through shared slots
        std::vector<int> parent(static_cast<std::size_t>(nu));
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            return x;
        };
        for (std::uint32_t mask = 1; mask < counts.size(); ++mask) {
            if (!counts[mask]) continue;
            const int first = __builtin_ctz(mask);
            for (int i = first + 1; i < nu; ++i) {
                if (mask & (1u << i)) parent[static_cast<std::size_t>(find(i))] = find(first);
            }
        }
        for (int i = 1; i < nu; ++i) {
            if (find(i) != find(0)) return false;
        }
        // canonical form must match the target's
        for (const auto& perm : vn_perms) {
            bool all_equal = true;
            for (std::uint32_t mask = 0; mask < counts.size() && all_equal; ++mask) {
                std::uint32_t permuted = 0;
                for (int i = 0; i < nu; ++i) {
                    if (mask & (1u << i)) permuted |= 1u << perm[static_cast<std::size_t>(i)];
                }
                if (counts[mask] != target.neighborhood_counts[permuted]) all_equal = false;
            }
            if (all_equal) return true;
        }
        return false;
    };

    auto dfs = [&](auto&& self, int u, std::vector<int> degs_left,
                   const std::vector<int>& coverage) -> void {
        if (u == nu) {
            if (leaf_matches()) ++count;
            return;
        }
        const int remaining = nu - u;
        int deficit = 0;
        for (int s = 0; s < mu; ++s) {
            const int need = 2 - coverage[static_cast<std::size_t>(s)];
            if (need > remaining) return;  // a slot can gain at most one edge per user
            deficit += std::max(0, need);
        }
        int budget = 0;
        for (int d : degs_left) budget += d;
        if (deficit > budget) return;

        std::uint32_t mandatory = 0;
        if (remaining == 1) {
            for (int s = 0; s < mu; ++s) {
                if (coverage[static_cast<std::size_t>(s)] < 2) mandatory |= 1u << s;
            }
        }

        std::vector<int> tried;
        for (std::size_t di = 0; di < degs_left.size(); ++di) {
            const int deg = degs_left[di];
            if (std::find(tried.begin(), tried.end(), deg) != tried.end()) continue;
            tried.push_back(deg);
            std::vector<int> rest = degs_left;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(di));
            std::vector<int> next_coverage = coverage;
            for (std::uint32_t mask : masks_by_size[static_cast<std::size_t>(deg)]) {
                if ((mask & mandatory) != mandatory) continue;
                chosen[static_cast<std::size_t>(u)] = mask;
                for (int s = 0; s < mu; ++s) {
                    next_coverage[static_cast<std::size_t>(s)] =
                        coverage[static_cast<std::size_t>(s)] + ((mask >> s) & 1u);
                }
                self(self, u + 1, rest, next_coverage);
            }
        }
    };
    dfs(dfs, 0, degrees, std::vector<int>(static_cast<std::size_t>(mu), 0));
    return count;
}

}  // namespace csa::testing
