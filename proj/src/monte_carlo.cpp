#include "csa/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>

#include "csa/parallel.hpp"

namespace csa {

double ClassTally::confidence_halfwidth() const {
    if (users_observed == 0) return 1.0;
    const double n = static_cast<double>(users_observed);
    const double p = plr();
    const double normal = 1.959963984540054 * std::sqrt(p * (1.0 - p) / n);
    const double rule_of_three = users_unresolved == 0 ? 3.0 / n : 0.0;
    return std::max(normal, rule_of_three);
}

SimOutcome run_monte_carlo(const ScenarioConfig& config, std::uint64_t trials,
                           const MonteCarloOptions& options) {
    if (trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");

    const FrameSampler sampler(config);
    const std::size_t num_classes = config.classes.size();
    const int workers = resolve_workers(options.workers);

    SimOutcome outcome;
    outcome.trials = trials;
    outcome.realized_load = config.realized_load();
    outcome.per_class.resize(num_classes);
    if (options.collect_per_frame) {
        outcome.per_frame_unresolved.assign(trials * num_classes, 0);
    }

    std::vector<std::vector<ClassTally>> partial(static_cast<std::size_t>(workers),
                                                 std::vector<ClassTally>(num_classes));

    run_chunked(trials, workers, [&](int w, std::uint64_t begin, std::uint64_t end) {
        FrameGraph graph;
        PeelWorkspace peeler;
        std::vector<std::uint32_t> unresolved(num_classes);
        auto& tally = partial[static_cast<std::size_t>(w)];
        for (std::uint64_t f = begin; f < end; ++f) {
            SplitMix64 rng = SplitMix64::for_substream(config.seed, f);
            sampler.generate(rng, graph);
            peeler.run(graph);
            std::fill(unresolved.begin(), unresolved.end(), 0);
            for (std::size_t u = 0; u < graph.user_count(); ++u) {
                tally[graph.user_class[u]].users_observed++;
                if (!peeler.resolved()[u]) unresolved[graph.user_class[u]]++;
            }
            for (std::size_t k = 0; k < num_classes; ++k) {
                tally[k].users_unresolved += unresolved[k];
                if (options.collect_per_frame) {
                    outcome.per_frame_unresolved[f * num_classes + k] = unresolved[k];
                }
            }
        }
    });

    for (const auto& tally : partial) {
        for (std::size_t k = 0; k < num_classes; ++k) {
            outcome.per_class[k].users_observed += tally[k].users_observed;
            outcome.per_class[k].users_unresolved += tally[k].users_unresolved;
        }
    }
    return outcome;
}

}  // namespace csa
