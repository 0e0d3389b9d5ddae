#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace csa {

// Connected bipartite graph in which every slot node has degree >= 2, stored
// in a canonical labeling. VNs are users (each with its full edge set), CNs
// are slots.
struct StoppingSet {
    int nu = 0;  // VN count
    int mu = 0;  // CN count
    std::vector<int> degree_histogram;        // v_j at index j-1, j = 1..max VN degree
    std::vector<std::vector<int>> biadjacency;  // per VN: sorted CN indices
    std::uint64_t aut = 0;  // order of the side-preserving automorphism group
    std::uint64_t c = 0;    // labeled realizations: nu! mu! / aut
    bool minimal = false;   // no proper VN subset is itself a stopping set

    // Canonical key: count of CNs per VN-subset mask, minimized over VN
    // permutations. Index = mask over nu bits.
    std::vector<std::uint32_t> neighborhood_counts;

    int vn_degree(int i) const { return static_cast<int>(biadjacency[static_cast<std::size_t>(i)].size()); }
    int max_vn_degree() const { return static_cast<int>(degree_histogram.size()); }
};

struct StoppingSetCatalog {
    int nu_max = 0;
    int d_max = 0;
    std::vector<StoppingSet> sets;  // canonically sorted, no two isomorphic

    std::string to_json() const;
    static StoppingSetCatalog from_json(const std::string& text);
};

// All non-isomorphic connected stopping sets with at most nu_max VNs of
// degree 2..d_max. Guarded at nu_max <= 5, d_max <= 8: beyond that the
// exhaustive canonicalization stops being the right tool.
StoppingSetCatalog enumerate_stopping_sets(int nu_max, int d_max);

// Builds the canonical StoppingSet for an explicit biadjacency (per-VN CN
// index lists). Validates CN degrees, connectivity, and VN degree bounds.
StoppingSet canonical_stopping_set(int nu, int mu,
                                   const std::vector<std::vector<int>>& biadjacency);

}  // namespace csa
