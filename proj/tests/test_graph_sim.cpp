#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "csa/error_floor.hpp"
#include "csa/monte_carlo.hpp"
#include "test_support.hpp"

using namespace csa;
using namespace csa::testing;

TEST_CASE("a lone user with full degree occupies every slot") {
    const ScenarioConfig sc(4, 0.25, {ClassSpec(1.0, DegreeDistribution::from_map({{4, 1.0}}))});
    REQUIRE(sc.user_count() == 1);
    SplitMix64 rng(1);
    const FrameGraph g = generate_frame(sc, rng);
    REQUIRE(g.user_count() == 1);
    CHECK(g.user_degree(0) == 4);
    CHECK(std::vector<std::uint32_t>(g.user_slots.begin(), g.user_slots.end()) ==
          std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("fixed_fraction assignment uses largest-remainder counts") {
    std::vector<ClassSpec> classes{ClassSpec(0.2, dist238(1.0, 0, 0)),
                                  ClassSpec(0.8, dist238(0, 1.0, 0))};
    const ScenarioConfig sc(100, 0.5, classes, ClassAssignment::fixed_fraction, 9);
    SplitMix64 rng(2);
    const FrameGraph g = generate_frame(sc, rng);
    CHECK(std::count(g.user_class.begin(), g.user_class.end(), 0) == 10);
    CHECK(std::count(g.user_class.begin(), g.user_class.end(), 1) == 40);

    // remainders decide who gets the leftover user
    std::vector<ClassSpec> thirds{ClassSpec(1.0 / 3.0, dist238(1.0, 0, 0)),
                                  ClassSpec(2.0 / 3.0, dist238(1.0, 0, 0))};
    const ScenarioConfig sc2(100, 0.1, thirds, ClassAssignment::fixed_fraction, 9);
    REQUIRE(sc2.user_count() == 10);
    const FrameGraph g2 = generate_frame(sc2, rng);
    CHECK(std::count(g2.user_class.begin(), g2.user_class.end(), 0) == 3);
    CHECK(std::count(g2.user_class.begin(), g2.user_class.end(), 1) == 7);
}

TEST_CASE("stochastic assignment draws classes with the right mean") {
    std::vector<ClassSpec> classes{ClassSpec(0.2, dist238(1.0, 0, 0)),
                                  ClassSpec(0.8, dist238(1.0, 0, 0))};
    const ScenarioConfig sc(100, 0.5, classes, ClassAssignment::stochastic, 5);
    const FrameSampler sampler(sc);
    FrameGraph g;
    double total = 0;
    const int frames = 2000;
    for (int f = 0; f < frames; ++f) {
        SplitMix64 rng = SplitMix64::for_substream(5, static_cast<std::uint64_t>(f));
        sampler.generate(rng, g);
        total += std::count(g.user_class.begin(), g.user_class.end(), 0);
    }
    CHECK(total / frames == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("frame graphs keep the slot adjacency as an exact transpose") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const FrameGraph g = random_small_graph(rng);
        std::set<std::pair<std::uint32_t, std::uint32_t>> user_edges, slot_edges;
        for (std::uint32_t u = 0; u < g.user_count(); ++u) {
            for (std::uint32_t e = g.user_offset[u]; e < g.user_offset[u + 1]; ++e) {
                user_edges.emplace(u, g.user_slots[e]);
            }
        }
        for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(g.n); ++s) {
            for (std::uint32_t e = g.slot_offset[s]; e < g.slot_offset[s + 1]; ++e) {
                slot_edges.emplace(g.slot_users[e], s);
            }
        }
        CHECK(user_edges == slot_edges);
    }
}

TEST_CASE("peel resolves cascades and stops at stopping sets") {
    // minimal stopping set: no singleton anywhere
    const FrameGraph pair = FrameGraph::build(3, {{0, {0, 1}}, {0, {0, 1}}});
    CHECK(peel(pair).empty());

    const FrameGraph lone = FrameGraph::build(8, {{0, {2, 5, 7}}});
    CHECK(peel(lone) == std::vector<std::uint32_t>{0});

    const FrameGraph chain = FrameGraph::build(4, {{0, {0, 1}}, {0, {1, 2}}, {0, {2, 3}}});
    CHECK(peel(chain) == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("peel is invariant under the singleton-selection order") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const FrameGraph g = random_small_graph(rng);
        const auto canonical = peel(g);
        const auto randomized = peel_random_order(g, rng);
        CHECK(canonical == randomized);
    }
}

TEST_CASE("after peeling every occupied slot has at least two live users") {
    SplitMix64 rng(41);
    for (int trial = 0; trial < 500; ++trial) {
        const FrameGraph g = random_small_graph(rng);
        PeelWorkspace ws;
        ws.run(g);
        for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(g.n); ++s) {
            int live = 0;
            for (std::uint32_t e = g.slot_offset[s]; e < g.slot_offset[s + 1]; ++e) {
                if (!ws.resolved()[g.slot_users[e]]) ++live;
            }
            CHECK(live != 1);
        }
    }
}

TEST_CASE("removing a user never turns a resolved user unresolved") {
    SplitMix64 rng(51);
    for (int trial = 0; trial < 300; ++trial) {
        const FrameGraph g = random_small_graph(rng);
        if (g.user_count() < 2) continue;
        const auto before = peel(g);
        const std::uint32_t removed = static_cast<std::uint32_t>(rng.below(g.user_count()));
        std::vector<std::pair<int, std::vector<std::uint32_t>>> rest;
        for (std::uint32_t u = 0; u < g.user_count(); ++u) {
            if (u == removed) continue;
            rest.emplace_back(0, std::vector<std::uint32_t>(g.user_slots.begin() + g.user_offset[u],
                                                            g.user_slots.begin() + g.user_offset[u + 1]));
        }
        const auto after = peel(FrameGraph::build(g.n, rest));
        std::set<std::uint32_t> after_set;  // map back to original indices
        for (std::uint32_t u : after) after_set.insert(u < removed ? u : u + 1);
        for (std::uint32_t u : before) {
            if (u != removed) CHECK(after_set.count(u) == 1);
        }
    }
}

TEST_CASE("monte carlo outcome is deterministic across worker counts") {
    const ScenarioConfig sc(100, 0.5, reference_classes(), ClassAssignment::stochastic, 77);
    const SimOutcome a = run_monte_carlo(sc, 4000, {.workers = 1});
    const SimOutcome b = run_monte_carlo(sc, 4000, {.workers = 3});
    REQUIRE(a.per_class.size() == b.per_class.size());
    for (std::size_t k = 0; k < a.per_class.size(); ++k) {
        CHECK(a.per_class[k].users_observed == b.per_class[k].users_observed);
        CHECK(a.per_class[k].users_unresolved == b.per_class[k].users_unresolved);
    }
}

TEST_CASE("a single user is always resolved") {
    const ScenarioConfig sc(100, 0.01, reference_classes(), ClassAssignment::stochastic, 3);
    REQUIRE(sc.user_count() == 1);
    const SimOutcome out = run_monte_carlo(sc, 5000, {.workers = 1});
    for (const auto& tally : out.per_class) CHECK(tally.users_unresolved == 0);
}

TEST_CASE("confidence half-width uses the rule of three at zero failures") {
    ClassTally clean{1000, 0};
    CHECK(clean.plr() == 0.0);
    CHECK(clean.confidence_halfwidth() == doctest::Approx(0.003));
    ClassTally dirty{10000, 25};
    const double p = 25.0 / 10000.0;
    CHECK(dirty.confidence_halfwidth() ==
          doctest::Approx(1.959963984540054 * std::sqrt(p * (1 - p) / 10000.0)));
    ClassTally empty{0, 0};
    CHECK(empty.confidence_halfwidth() == doctest::Approx(1.0));
}

TEST_CASE("degree-2 PLR at sparse load matches the stopping-set prediction") {
    const std::vector<ClassSpec> classes{ClassSpec(1.0, DegreeDistribution::from_map({{2, 1.0}}))};
    const ScenarioConfig sc(100, 0.1, classes, ClassAssignment::stochastic, 3);
    const SimOutcome out = run_monte_carlo(sc, 1000000, {});
    const auto catalog = enumerate_stopping_sets(4, 2);
    const double predicted = plr_degree(catalog, classes[0].dist, 100, sc.user_count(), 2);
    const double hw = out.per_class[0].confidence_halfwidth();
    CHECK(std::abs(out.per_class[0].plr() - predicted) < 2.0 * hw);
    CHECK(predicted > 9.0 / 4950.0);  // elementary pair bound from below
}

TEST_CASE("reference scenario orders class PLRs and tracks the floor prediction") {
    const ScenarioConfig sc(100, 0.5, reference_classes(), ClassAssignment::stochastic, 8);
    const SimOutcome out = run_monte_carlo(sc, 200000, {});
    const double plr1 = out.per_class[0].plr();
    const double plr2 = out.per_class[1].plr();
    CHECK(plr1 <= plr2);
    const auto catalog = enumerate_stopping_sets(4, 8);
    const double pred2 = plr_class(catalog, sc.classes, sc.n, sc.user_count(), 1);
    CHECK(plr2 < 3.0 * pred2);
    CHECK(plr2 > pred2 / 3.0);
}
