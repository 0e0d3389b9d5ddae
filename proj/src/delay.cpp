#include "csa/delay.hpp"

#include <cmath>
#include <stdexcept>

#include "csa/parallel.hpp"

namespace csa {

double delay_pdf(int l, double t) {
    if (l < 1) throw std::invalid_argument("delay_pdf: degree must be >= 1");
    if (t < 0.0 || t > 1.0) return 0.0;
    return l * std::pow(1.0 - t, l - 1);
}

double mean_delay_class(const ClassSpec& spec) {
    double mean = 0.0;
    for (int l = 1; l <= spec.dist.max_degree(); ++l) {
        mean += spec.dist.prob(l) / (l + 1);
    }
    return mean;
}

std::size_t SlotDecoderWorkspace::run(const FrameGraph& g) {
    const std::size_t slots = static_cast<std::size_t>(g.n);
    decode_slot_.assign(g.user_count(), -1);
    live_count_.assign(slots, 0);
    queue_.clear();

    std::size_t resolved = 0;
    for (std::uint32_t s = 0; s < slots; ++s) {
        // Slot s arrives: copies of already-decoded users are cancelled now.
        std::uint32_t live = 0;
        for (std::uint32_t e = g.slot_offset[s]; e < g.slot_offset[s + 1]; ++e) {
            if (decode_slot_[g.slot_users[e]] < 0) ++live;
        }
        live_count_[s] = live;
        if (live != 1) continue;

        queue_.clear();
        queue_.push_back(s);
        std::size_t head = 0;
        while (head < queue_.size()) {
            const std::uint32_t t = queue_[head++];
            if (live_count_[t] != 1) continue;
            std::uint32_t user = 0;
            for (std::uint32_t e = g.slot_offset[t]; e < g.slot_offset[t + 1]; ++e) {
                if (decode_slot_[g.slot_users[e]] < 0) {
                    user = g.slot_users[e];
                    break;
                }
            }
            decode_slot_[user] = static_cast<std::int32_t>(s);
            ++resolved;
            for (std::uint32_t e = g.user_offset[user]; e < g.user_offset[user + 1]; ++e) {
                const std::uint32_t r = g.user_slots[e];
                if (r > s) continue;  // not yet received; cancelled on arrival
                if (--live_count_[r] == 1) queue_.push_back(r);
            }
        }
    }
    return resolved;
}

std::vector<std::int32_t> slot_decoder(const FrameGraph& g) {
    SlotDecoderWorkspace ws;
    ws.run(g);
    return ws.decode_slot();
}

DelayOutcome run_delay_monte_carlo(const ScenarioConfig& config, std::uint64_t trials,
                                   const DelayMonteCarloOptions& options) {
    if (trials < 1) throw std::invalid_argument("run_delay_monte_carlo: trials must be >= 1");

    const FrameSampler sampler(config);
    const std::size_t num_classes = config.classes.size();
    const int workers = resolve_workers(options.workers);

    DelayOutcome outcome;
    outcome.n = config.n;
    outcome.trials = trials;
    outcome.realized_load = config.realized_load();

    std::vector<std::vector<DelayStats>> partial(
        static_cast<std::size_t>(workers),
        std::vector<DelayStats>(num_classes));
    for (auto& stats : partial) {
        for (auto& s : stats) s.histogram.assign(static_cast<std::size_t>(config.n), 0);
    }

    run_chunked(trials, workers, [&](int w, std::uint64_t begin, std::uint64_t end) {
        FrameGraph graph;
        SlotDecoderWorkspace decoder;
        auto& stats = partial[static_cast<std::size_t>(w)];
        for (std::uint64_t f = begin; f < end; ++f) {
            SplitMix64 rng = SplitMix64::for_substream(config.seed, f);
            sampler.generate(rng, graph);
            decoder.run(graph);
            for (std::size_t u = 0; u < graph.user_count(); ++u) {
                auto& cls = stats[graph.user_class[u]];
                const std::int32_t s = decoder.decode_slot()[u];
                if (s < 0) {
                    cls.unresolved++;
                } else {
                    cls.resolved++;
                    cls.histogram[static_cast<std::size_t>(s)]++;
                    cls.slot_sum += static_cast<std::uint64_t>(s) + 1;
                }
            }
        }
    });

    outcome.per_class.assign(num_classes, DelayStats{});
    for (auto& s : outcome.per_class) s.histogram.assign(static_cast<std::size_t>(config.n), 0);
    for (const auto& stats : partial) {
        for (std::size_t k = 0; k < num_classes; ++k) {
            outcome.per_class[k].resolved += stats[k].resolved;
            outcome.per_class[k].unresolved += stats[k].unresolved;
            outcome.per_class[k].slot_sum += stats[k].slot_sum;
            for (std::size_t b = 0; b < stats[k].histogram.size(); ++b) {
                outcome.per_class[k].histogram[b] += stats[k].histogram[b];
            }
        }
    }
    return outcome;
}

}  // namespace csa
