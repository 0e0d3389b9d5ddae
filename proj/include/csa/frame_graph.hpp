#pragma once

#include <cstdint>
#include <vector>

#include "csa/rng.hpp"
#include "csa/scenario.hpp"

namespace csa {

// One realized frame: bipartite user/slot graph with class labels. Users and
// slots are stored as two CSR adjacency views of the same edge set.
struct FrameGraph {
    int n = 0;

    std::vector<std::uint16_t> user_class;     // per user
    std::vector<std::uint32_t> user_slots;     // flat slot lists
    std::vector<std::uint32_t> user_offset;    // size users+1 into user_slots

    std::vector<std::uint32_t> slot_users;     // flat user lists (transpose)
    std::vector<std::uint32_t> slot_offset;    // size n+1 into slot_users

    std::size_t user_count() const { return user_class.size(); }
    int user_degree(std::size_t u) const {
        return static_cast<int>(user_offset[u + 1] - user_offset[u]);
    }

    // Builds a graph from explicit per-user slot lists (class, slots). Slots
    // must be distinct and in 0..n-1; lists are stored sorted.
    static FrameGraph build(int n,
                            const std::vector<std::pair<int, std::vector<std::uint32_t>>>& users);

    // Rebuilds the slot-side CSR from the user side; called by generators.
    void rebuild_slot_adjacency();
};

// Draws m users per the scenario's class-assignment rule, a degree per class
// distribution, and degree-many distinct slots uniformly at random.
class FrameSampler {
public:
    explicit FrameSampler(const ScenarioConfig& config);

    // Fills `out`, reusing its buffers. The rng stream fully determines the frame.
    void generate(SplitMix64& rng, FrameGraph& out) const;

    int user_count() const { return m_; }
    int class_count() const { return static_cast<int>(degree_cdf_.size()); }

private:
    int n_;
    int m_;
    ClassAssignment assignment_;
    std::vector<std::vector<double>> degree_cdf_;  // per class, cdf over degree l = 1..d
    std::vector<double> class_cdf_;                // stochastic assignment
    std::vector<int> fixed_counts_;                // fixed_fraction assignment
};

FrameGraph generate_frame(const ScenarioConfig& config, SplitMix64& rng);

// SIC peeling to fixpoint over the whole frame. Reusable across frames; all
// buffers grow once and are then recycled.
class PeelWorkspace {
public:
    // Returns the number of resolved users; resolved() flags are valid until
    // the next run.
    std::size_t run(const FrameGraph& g);

    const std::vector<char>& resolved() const { return resolved_; }

private:
    std::vector<std::uint32_t> live_count_;
    std::vector<char> resolved_;
    std::vector<std::uint32_t> queue_;
};

// Resolved user indices, ascending. Order-independent: peeling on erasures is
// confluent, so any singleton-selection order yields the same set.
std::vector<std::uint32_t> peel(const FrameGraph& g);

}  // namespace csa
