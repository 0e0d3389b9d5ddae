#pragma once

#include <cstdint>
#include <vector>

#include "csa/frame_graph.hpp"
#include "csa/scenario.hpp"

namespace csa {

// Asymptotic (g -> 0, n -> infinity) density of the normalized decoding delay
// of a degree-l user: l (1-t)^(l-1) on [0, 1], zero elsewhere.
double delay_pdf(int l, double t);

// Asymptotic mean normalized delay of a class: sum_l p_l / (l + 1).
double mean_delay_class(const ClassSpec& spec);

// Slot-by-slot decoder: after each received slot, peels the subgraph of
// received slots to fixpoint; a decoded user's copies are cancelled from past
// slots immediately and from future slots on arrival. The resolved set equals
// frame-based peeling.
class SlotDecoderWorkspace {
public:
    // Returns the number of resolved users. decode_slot()[u] is the slot
    // index at which u was decoded, -1 if unresolved.
    std::size_t run(const FrameGraph& g);

    const std::vector<std::int32_t>& decode_slot() const { return decode_slot_; }

private:
    std::vector<std::int32_t> decode_slot_;
    std::vector<std::uint32_t> live_count_;
    std::vector<std::uint32_t> queue_;
};

std::vector<std::int32_t> slot_decoder(const FrameGraph& g);

struct DelayStats {
    std::vector<std::uint64_t> histogram;  // bin s = users decoded at slot s, delay (s+1)/n
    std::uint64_t resolved = 0;
    std::uint64_t unresolved = 0;   // excluded from histogram and mean
    std::uint64_t slot_sum = 0;     // sum of (decode slot + 1) over resolved users

    double mean_normalized_delay(int n) const {
        return resolved == 0 ? 0.0
                             : static_cast<double>(slot_sum) / (static_cast<double>(resolved) * n);
    }
};

struct DelayOutcome {
    int n = 0;
    std::uint64_t trials = 0;
    double realized_load = 0.0;
    std::vector<DelayStats> per_class;
};

struct DelayMonteCarloOptions {
    int workers = 0;
};

// Same substream-per-frame contract as run_monte_carlo: deterministic for any
// worker count.
DelayOutcome run_delay_monte_carlo(const ScenarioConfig& config, std::uint64_t trials,
                                   const DelayMonteCarloOptions& options = {});

}  // namespace csa
