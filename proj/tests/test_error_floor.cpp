#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "csa/error_floor.hpp"
#include "csa/monte_carlo.hpp"
#include "test_support.hpp"

using namespace csa;
using namespace csa::testing;

namespace {

double log_c(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::uint64_t fact(int k) {
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

TEST_CASE("the smallest catalog holds exactly the elementary pair") {
    const auto catalog = enumerate_stopping_sets(2, 2);
    REQUIRE(catalog.sets.size() == 1);
    const auto& s = catalog.sets[0];
    CHECK(s.nu == 2);
    CHECK(s.mu == 2);
    CHECK(s.aut == 4);
    CHECK(s.c == 1);
    CHECK(s.degree_histogram == std::vector<int>{0, 2});
    CHECK(s.minimal);
}

TEST_CASE("degree-2 triples: shared-slot set and six-cycle") {
    const auto catalog = enumerate_stopping_sets(3, 2);
    REQUIRE(catalog.sets.size() == 3);
    bool saw_cycle = false, saw_shared = false;
    for (const auto& s : catalog.sets) {
        if (s.nu == 3 && s.mu == 3) {
            CHECK(s.aut == 6);
            CHECK(s.c == 6);  // 3! 3! / 6
            CHECK(s.minimal);
            saw_cycle = true;
        }
        if (s.nu == 3 && s.mu == 2) {
            CHECK(s.aut == 12);
            CHECK(s.c == 1);
            CHECK_FALSE(s.minimal);  // contains the elementary pair
            saw_shared = true;
        }
    }
    CHECK(saw_cycle);
    CHECK(saw_shared);
}

TEST_CASE("a single user of degree two or more cannot form a stopping set") {
    CHECK(enumerate_stopping_sets(1, 8).sets.empty());
}

TEST_CASE("enumeration bounds are enforced") {
    CHECK_THROWS_AS(enumerate_stopping_sets(6, 4), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_stopping_sets(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_stopping_sets(4, 9), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_stopping_sets(4, 1), std::invalid_argument);
}

TEST_CASE("catalog entries satisfy the structural invariants") {
    const auto catalog = enumerate_stopping_sets(3, 8);
    CHECK(catalog.sets.size() == 158);
    for (const auto& s : catalog.sets) {
        const int vn_total = std::accumulate(s.degree_histogram.begin(), s.degree_histogram.end(), 0);
        CHECK(vn_total == s.nu);
        int edge_total = 0;
        for (int j = 1; j <= s.max_vn_degree(); ++j) {
            edge_total += j * s.degree_histogram[static_cast<std::size_t>(j - 1)];
        }
        // slot degrees >= 2 everywhere and edges consistent
        std::vector<int> cn_degree(static_cast<std::size_t>(s.mu), 0);
        for (const auto& row : s.biadjacency) {
            for (int cn : row) cn_degree[static_cast<std::size_t>(cn)]++;
        }
        int cn_edge_total = 0;
        for (int d : cn_degree) {
            CHECK(d >= 2);
            cn_edge_total += d;
        }
        CHECK(edge_total == cn_edge_total);
        // multiplicity is the labeled-copy count
        const unsigned __int128 labeled =
            static_cast<unsigned __int128>(fact(s.nu)) * fact(s.mu);
        CHECK(static_cast<std::uint64_t>(labeled % s.aut) == 0);
        CHECK(static_cast<std::uint64_t>(labeled / s.aut) == s.c);
    }
}

TEST_CASE("enumeration is deterministic and canonicalization is label-invariant") {
    const auto a = enumerate_stopping_sets(3, 4);
    const auto b = enumerate_stopping_sets(3, 4);
    REQUIRE(a.sets.size() == b.sets.size());
    for (std::size_t i = 0; i < a.sets.size(); ++i) {
        CHECK(a.sets[i].neighborhood_counts == b.sets[i].neighborhood_counts);
        CHECK(a.sets[i].biadjacency == b.sets[i].biadjacency);
    }

    SplitMix64 rng(61);
    for (const auto& s : a.sets) {
        for (int shuffle = 0; shuffle < 10; ++shuffle) {
            // relabel VNs and CNs at random, re-canonicalize, compare
            std::vector<int> vn_perm(static_cast<std::size_t>(s.nu));
            std::iota(vn_perm.begin(), vn_perm.end(), 0);
            for (std::size_t i = vn_perm.size(); i > 1; --i) {
                std::swap(vn_perm[i - 1], vn_perm[rng.below(i)]);
            }
            std::vector<int> cn_perm(static_cast<std::size_t>(s.mu));
            std::iota(cn_perm.begin(), cn_perm.end(), 0);
            for (std::size_t i = cn_perm.size(); i > 1; --i) {
                std::swap(cn_perm[i - 1], cn_perm[rng.below(i)]);
            }
            std::vector<std::vector<int>> relabeled(static_cast<std::size_t>(s.nu));
            for (int u = 0; u < s.nu; ++u) {
                for (int cn : s.biadjacency[static_cast<std::size_t>(u)]) {
                    relabeled[static_cast<std::size_t>(vn_perm[static_cast<std::size_t>(u)])]
                        .push_back(cn_perm[static_cast<std::size_t>(cn)]);
                }
            }
            const StoppingSet round = canonical_stopping_set(s.nu, s.mu, relabeled);
            CHECK(round.neighborhood_counts == s.neighborhood_counts);
            CHECK(round.aut == s.aut);
            CHECK(round.c == s.c);
        }
    }
}

TEST_CASE("canonical_stopping_set rejects invalid structures") {
    // slot of degree one
    CHECK_THROWS_AS(canonical_stopping_set(2, 3, {{0, 1}, {0, 2}}), std::invalid_argument);
    // disconnected components
    CHECK_THROWS_AS(canonical_stopping_set(4, 4, {{0, 1}, {0, 1}, {2, 3}, {2, 3}}),
                    std::invalid_argument);
    // user of degree one
    CHECK_THROWS_AS(canonical_stopping_set(3, 2, {{0, 1}, {0, 1}, {0}}), std::invalid_argument);
}

TEST_CASE("multiplicity matches brute-force labeled enumeration on small sets") {
    const auto catalog = enumerate_stopping_sets(3, 4);
    for (const auto& s : catalog.sets) {
        CHECK(brute_force_labeled_count(s) == s.c);
    }
}

TEST_CASE("elementary-only catalog reduces to the closed form") {
    const auto elementary = enumerate_stopping_sets(2, 2);
    SplitMix64 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 20 + static_cast<int>(rng.below(500));
        const int m = 3 + static_cast<int>(rng.below(50));
        const double l2 = 0.05 + 0.9 * rng.unit();
        const auto dist = dist238(l2, 1.0 - l2, 0.0);
        const double closed = (m - 1) * l2 / std::exp(log_c(n, 2));
        const double computed = plr_degree(elementary, dist, n, m, 2);
        CHECK(std::abs(computed - closed) <= 1e-12 * closed);
    }
}

TEST_CASE("plr_degree rejects degrees without mass and unsupported sizes") {
    const auto catalog = enumerate_stopping_sets(4, 8);
    const auto x2 = DegreeDistribution::from_map({{2, 1.0}});
    CHECK_THROWS_AS(plr_degree(catalog, x2, 100, 50, 3), std::invalid_argument);
    // degree-8 sets need up to 16 slots; n = 10 cannot host them
    const auto x8 = DegreeDistribution::from_map({{8, 1.0}});
    CHECK_THROWS_AS(plr_degree(catalog, x8, 10, 11, 8), std::invalid_argument);
    // too few users for the largest catalog set
    const auto small = enumerate_stopping_sets(4, 2);
    CHECK_THROWS_AS(plr_degree(small, x2, 100, 3, 2), std::invalid_argument);
}

TEST_CASE("the sparsity limit leaves only the elementary pair") {
    const auto catalog = enumerate_stopping_sets(4, 2);
    const auto x2 = DegreeDistribution::from_map({{2, 1.0}});
    const int n = 1000000, m = 5;
    const double p = plr_degree(catalog, x2, n, m, 2);
    const double elementary = (m - 1) / std::exp(log_c(n, 2));
    CHECK(p == doctest::Approx(elementary).epsilon(1e-4));
}

TEST_CASE("plr_class mixes per-degree floors by the class distribution") {
    const auto catalog = enumerate_stopping_sets(4, 3);
    const std::vector<ClassSpec> single{ClassSpec(1.0, dist238(0.7, 0.3, 0.0))};
    const double direct = 0.7 * plr_degree(catalog, single[0].dist, 50, 10, 2) +
                          0.3 * plr_degree(catalog, single[0].dist, 50, 10, 3);
    CHECK(plr_class(catalog, single, 50, 10, 0) == doctest::Approx(direct).epsilon(1e-12));

    // a degree-8 class against a catalog without degree-8 sets predicts zero
    const std::vector<ClassSpec> mixed{ClassSpec(0.5, dist238(0.7, 0.3, 0.0)),
                                       ClassSpec(0.5, DegreeDistribution::from_map({{8, 1.0}}))};
    CHECK(plr_class(catalog, mixed, 50, 10, 1) == 0.0);
}

TEST_CASE("reference-point predictions order the classes and sit near the targets") {
    const auto catalog = enumerate_stopping_sets(4, 8);
    const auto classes = reference_classes();
    const double p1 = plr_class(catalog, classes, 100, 50, 0);
    const double p2 = plr_class(catalog, classes, 100, 50, 1);
    CHECK(p1 <= 1e-5);
    CHECK(p1 < p2);
    // the full nu<=4 catalog puts this reference point slightly above its
    // nominal 1e-3 target; pin the validated value instead
    CHECK(p2 == doctest::Approx(1.136e-3).epsilon(0.02));
}

TEST_CASE("floor predictions agree with long Monte Carlo at sparse load") {
    std::vector<ClassSpec> by_degree{ClassSpec(0.7, DegreeDistribution::from_map({{2, 1.0}})),
                                     ClassSpec(0.3, DegreeDistribution::from_map({{3, 1.0}}))};
    const ScenarioConfig sc(15, 0.4, by_degree, ClassAssignment::stochastic, 12345);
    REQUIRE(sc.user_count() == 6);
    const SimOutcome out = run_monte_carlo(sc, 4000000, {});
    const auto catalog = enumerate_stopping_sets(4, 3);
    const auto mix = dist238(0.7, 0.3, 0.0);
    for (int l : {2, 3}) {
        const double mc = out.per_class[static_cast<std::size_t>(l - 2)].plr();
        const double predicted = plr_degree(catalog, mix, sc.n, sc.user_count(), l);
        CHECK(std::abs(predicted - mc) <= 0.15 * mc);
    }
}

TEST_CASE("floor prediction is monotone in users and degree mass") {
    const auto catalog = enumerate_stopping_sets(4, 3);
    const auto dist = dist238(0.6, 0.4, 0.0);
    double prev = 0.0;
    for (int m = 6; m <= 30; m += 6) {
        const double p = plr_degree(catalog, dist, 100, m, 2);
        CHECK(p >= prev);
        prev = p;
    }
    for (double bump : {0.0, 0.1, 0.2}) {
        // raising degree-2 mass (at the expense of degree 3) raises the floor
        const double lo = plr_degree(catalog, dist238(0.5 + bump, 0.5 - bump, 0.0), 100, 20, 2);
        const double hi = plr_degree(catalog, dist238(0.6 + bump, 0.4 - bump, 0.0), 100, 20, 2);
        CHECK(hi >= lo);
    }
}

TEST_CASE("minimal-only evaluation drops the non-minimal sets") {
    const auto catalog = enumerate_stopping_sets(4, 2);
    const auto x2 = DegreeDistribution::from_map({{2, 1.0}});
    const double all = plr_degree(catalog, x2, 100, 20, 2);
    const double minimal = plr_degree(catalog, x2, 100, 20, 2, {.minimal_only = true});
    CHECK(minimal < all);
    CHECK(minimal > 0.9 * all);  // non-minimal sets are a small correction here
}

TEST_CASE("catalog JSON round trip preserves every set and detects tampering") {
    const auto catalog = enumerate_stopping_sets(3, 5);
    const auto loaded = StoppingSetCatalog::from_json(catalog.to_json());
    REQUIRE(loaded.sets.size() == catalog.sets.size());
    for (std::size_t i = 0; i < loaded.sets.size(); ++i) {
        CHECK(loaded.sets[i].neighborhood_counts == catalog.sets[i].neighborhood_counts);
        CHECK(loaded.sets[i].c == catalog.sets[i].c);
        CHECK(loaded.sets[i].aut == catalog.sets[i].aut);
        CHECK(loaded.sets[i].minimal == catalog.sets[i].minimal);
    }
    std::string tampered = catalog.to_json();
    const auto pos = tampered.find("\"c\": ");
    REQUIRE(pos != std::string::npos);
    tampered[pos + 5] = '9';
    CHECK_THROWS_AS(StoppingSetCatalog::from_json(tampered), std::invalid_argument);
}
