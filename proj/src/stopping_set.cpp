#include "csa/stopping_set.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace csa {

namespace {

using CountVector = std::vector<std::uint32_t>;  // index = VN-subset mask

std::vector<std::vector<int>> all_permutations(int nu) {
    std::vector<int> idx(static_cast<std::size_t>(nu));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::vector<int>> perms;
    do {
        perms.push_back(idx);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return perms;
}

std::uint32_t apply_perm(const std::vector<int>& perm, std::uint32_t mask) {
    std::uint32_t out = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (mask & (1u << i)) out |= 1u << perm[i];
    }
    return out;
}

CountVector permuted(const std::vector<int>& perm, const CountVector& counts) {
    CountVector out(counts.size(), 0);
    for (std::uint32_t m = 0; m < counts.size(); ++m) {
        if (counts[m]) out[apply_perm(perm, m)] = counts[m];
    }
    return out;
}

bool connected(int nu, const CountVector& counts) {
    std::vector<int> parent(static_cast<std::size_t>(nu));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (std::uint32_t m = 0; m < counts.size(); ++m) {
        if (!counts[m]) continue;
        const int first = std::countr_zero(m);
        for (int i = first + 1; i < nu; ++i) {
            if (m & (1u << i)) parent[static_cast<std::size_t>(find(i))] = find(first);
        }
    }
    const int root = find(0);
    for (int i = 1; i < nu; ++i) {
        if (find(i) != root) return false;
    }
    return true;
}

std::uint64_t factorial(int k) {
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

// Assembles the full record from an already-canonical count vector.
StoppingSet from_canonical_counts(int nu, const CountVector& counts,
                                  const std::vector<std::vector<int>>& perms) {
    StoppingSet s;
    s.nu = nu;
    s.neighborhood_counts = counts;

    int mu = 0;
    std::vector<int> vn_degree(static_cast<std::size_t>(nu), 0);
    for (std::uint32_t m = 0; m < counts.size(); ++m) {
        mu += static_cast<int>(counts[m]);
        for (int i = 0; i < nu; ++i) {
            if (m & (1u << i)) vn_degree[static_cast<std::size_t>(i)] += static_cast<int>(counts[m]);
        }
    }
    s.mu = mu;

    const int d = *std::max_element(vn_degree.begin(), vn_degree.end());
    s.degree_histogram.assign(static_cast<std::size_t>(d), 0);
    for (int deg : vn_degree) s.degree_histogram[static_cast<std::size_t>(deg - 1)]++;

    // CN indices in ascending neighborhood-mask order.
    s.biadjacency.assign(static_cast<std::size_t>(nu), {});
    int cn = 0;
    for (std::uint32_t m = 0; m < counts.size(); ++m) {
        for (std::uint32_t rep = 0; rep < counts[m]; ++rep, ++cn) {
            for (int i = 0; i < nu; ++i) {
                if (m & (1u << i)) s.biadjacency[static_cast<std::size_t>(i)].push_back(cn);
            }
        }
    }

    std::uint64_t fixing = 0;
    for (const auto& perm : perms) {
        if (permuted(perm, counts) == counts) ++fixing;
    }
    std::uint64_t within_types = 1;
    for (std::uint32_t m = 0; m < counts.size(); ++m) {
        within_types *= factorial(static_cast<int>(counts[m]));
    }
    s.aut = fixing * within_types;

    const unsigned __int128 labeled =
        static_cast<unsigned __int128>(factorial(nu)) * factorial(mu);
    if (labeled % s.aut != 0) {
        throw std::logic_error("StoppingSet: nu! mu! not divisible by |Aut|");
    }
    const unsigned __int128 count = labeled / s.aut;
    if (count > static_cast<unsigned __int128>(UINT64_MAX)) {
        throw std::overflow_error("StoppingSet: multiplicity exceeds 64 bits");
    }
    s.c = static_cast<std::uint64_t>(count);

    // A proper nonempty VN subset A forms a sub-stopping-set when every CN it
    // touches keeps degree >= 2 within A.
    s.minimal = true;
    for (std::uint32_t a = 1; a + 1 < (1u << nu); ++a) {
        bool sub_ok = true;
        for (std::uint32_t m = 0; m < counts.size() && sub_ok; ++m) {
            if (counts[m] && std::popcount(m & a) == 1) sub_ok = false;
        }
        if (sub_ok) {
            s.minimal = false;
            break;
        }
    }
    return s;
}

CountVector canonical_counts(const CountVector& counts,
                             const std::vector<std::vector<int>>& perms) {
    CountVector best = counts;
    for (const auto& perm : perms) {
        CountVector candidate = permuted(perm, counts);
        if (candidate < best) best = candidate;
    }
    return best;
}

}  // namespace

StoppingSet canonical_stopping_set(int nu, int mu,
                                   const std::vector<std::vector<int>>& biadjacency) {
    if (nu < 1 || nu > 5) throw std::invalid_argument("canonical_stopping_set: nu must be in 1..5");
    if (static_cast<int>(biadjacency.size()) != nu) {
        throw std::invalid_argument("canonical_stopping_set: biadjacency rows != nu");
    }
    CountVector counts(1u << nu, 0);
    std::vector<std::uint32_t> cn_mask(static_cast<std::size_t>(mu), 0);
    for (int i = 0; i < nu; ++i) {
        for (int cn : biadjacency[static_cast<std::size_t>(i)]) {
            if (cn < 0 || cn >= mu) throw std::invalid_argument("canonical_stopping_set: CN index out of range");
            if (cn_mask[static_cast<std::size_t>(cn)] & (1u << i)) {
                throw std::invalid_argument("canonical_stopping_set: duplicate edge");
            }
            cn_mask[static_cast<std::size_t>(cn)] |= 1u << i;
        }
    }
    for (std::uint32_t m : cn_mask) {
        if (std::popcount(m) < 2) {
            throw std::invalid_argument("canonical_stopping_set: every CN needs degree >= 2");
        }
        counts[m]++;
    }
    for (int i = 0; i < nu; ++i) {
        if (biadjacency[static_cast<std::size_t>(i)].size() < 2) {
            throw std::invalid_argument("canonical_stopping_set: every VN needs degree >= 2");
        }
    }
    if (!connected(nu, counts)) {
        throw std::invalid_argument("canonical_stopping_set: graph is not connected");
    }
    const auto perms = all_permutations(nu);
    return from_canonical_counts(nu, canonical_counts(counts, perms), perms);
}

StoppingSetCatalog enumerate_stopping_sets(int nu_max, int d_max) {
    if (nu_max < 1 || nu_max > 5) {
        throw std::invalid_argument("enumerate_stopping_sets: nu_max must be in 1..5");
    }
    if (d_max < 2 || d_max > 8) {
        throw std::invalid_argument("enumerate_stopping_sets: d_max must be in 2..8");
    }

    StoppingSetCatalog catalog;
    catalog.nu_max = nu_max;
    catalog.d_max = d_max;

    for (int nu = 1; nu <= nu_max; ++nu) {
        const auto perms = all_permutations(nu);
        std::vector<std::uint32_t> masks;
        for (std::uint32_t m = 0; m < (1u << nu); ++m) {
            if (std::popcount(m) >= 2) masks.push_back(m);
        }

        std::map<CountVector, StoppingSet> found;
        CountVector counts(1u << nu, 0);
        std::vector<int> degree(static_cast<std::size_t>(nu), 0);

        auto emit = [&] {
            for (int deg : degree) {
                if (deg < 2) return;
            }
            if (!connected(nu, counts)) return;
            CountVector canon = canonical_counts(counts, perms);
            if (!found.count(canon)) found.emplace(canon, from_canonical_counts(nu, canon, perms));
        };

        auto dfs = [&](auto&& self, std::size_t idx) -> void {
            if (idx == masks.size()) {
                emit();
                return;
            }
            const std::uint32_t m = masks[idx];
            int cap = d_max;
            for (int i = 0; i < nu; ++i) {
                if (m & (1u << i)) cap = std::min(cap, d_max - degree[static_cast<std::size_t>(i)]);
            }
            for (int v = 0; v <= cap; ++v) {
                counts[m] = static_cast<std::uint32_t>(v);
                if (v > 0) {
                    for (int i = 0; i < nu; ++i) {
                        if (m & (1u << i)) degree[static_cast<std::size_t>(i)] += v;
                    }
                }
                self(self, idx + 1);
                if (v > 0) {
                    for (int i = 0; i < nu; ++i) {
                        if (m & (1u << i)) degree[static_cast<std::size_t>(i)] -= v;
                    }
                }
            }
            counts[m] = 0;
        };
        dfs(dfs, 0);

        for (auto& [key, set] : found) catalog.sets.push_back(std::move(set));
    }
    return catalog;
}

std::string StoppingSetCatalog::to_json() const {
    nlohmann::json j;
    j["nu_max"] = nu_max;
    j["d_max"] = d_max;
    j["sets"] = nlohmann::json::array();
    for (const auto& s : sets) {
        nlohmann::json js;
        js["nu"] = s.nu;
        js["mu"] = s.mu;
        js["v"] = s.degree_histogram;
        js["aut"] = s.aut;
        js["c"] = s.c;
        js["biadjacency"] = s.biadjacency;
        j["sets"].push_back(js);
    }
    return j.dump(2);
}

StoppingSetCatalog StoppingSetCatalog::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    StoppingSetCatalog catalog;
    catalog.nu_max = j.at("nu_max").get<int>();
    catalog.d_max = j.at("d_max").get<int>();
    for (const auto& js : j.at("sets")) {
        StoppingSet s = canonical_stopping_set(js.at("nu").get<int>(), js.at("mu").get<int>(),
                                               js.at("biadjacency").get<std::vector<std::vector<int>>>());
        if (s.aut != js.at("aut").get<std::uint64_t>() || s.c != js.at("c").get<std::uint64_t>() ||
            s.degree_histogram != js.at("v").get<std::vector<int>>()) {
            throw std::invalid_argument("StoppingSetCatalog: stored invariants disagree with biadjacency");
        }
        catalog.sets.push_back(std::move(s));
    }
    return catalog;
}

}  // namespace csa
