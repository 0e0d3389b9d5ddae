#pragma once

#include <cstdint>
#include <vector>

#include "csa/frame_graph.hpp"
#include "csa/scenario.hpp"

namespace csa {

struct ClassTally {
    std::uint64_t users_observed = 0;
    std::uint64_t users_unresolved = 0;

    double plr() const {
        return users_observed == 0 ? 0.0
                                   : static_cast<double>(users_unresolved) / users_observed;
    }

    // 95% half-width: normal approximation, with the rule-of-three bound when
    // no failure was seen.
    double confidence_halfwidth() const;
};

struct SimOutcome {
    std::uint64_t trials = 0;
    double realized_load = 0.0;
    std::vector<ClassTally> per_class;

    // Filled only when MonteCarloOptions::collect_per_frame is set:
    // unresolved count of class k in frame f at [f * classes + k].
    std::vector<std::uint32_t> per_frame_unresolved;
};

struct MonteCarloOptions {
    int workers = 0;                 // 0 = available parallelism
    bool collect_per_frame = false;  // needed for per-frame trace output
};

// Aggregates per-class unresolved counts over `trials` independent frames.
// Frame i draws from substream (config.seed, i), so the outcome is identical
// for any worker count.
SimOutcome run_monte_carlo(const ScenarioConfig& config, std::uint64_t trials,
                           const MonteCarloOptions& options = {});

}  // namespace csa
