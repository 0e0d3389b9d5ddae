#include "csa/frame_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace csa {

FrameGraph FrameGraph::build(int n,
                             const std::vector<std::pair<int, std::vector<std::uint32_t>>>& users) {
    FrameGraph g;
    g.n = n;
    g.user_offset.push_back(0);
    for (const auto& [cls, slots] : users) {
        auto sorted = slots;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw std::invalid_argument("FrameGraph::build: duplicate slot in user slot list");
        }
        if (!sorted.empty() && sorted.back() >= static_cast<std::uint32_t>(n)) {
            throw std::invalid_argument("FrameGraph::build: slot index out of range");
        }
        g.user_class.push_back(static_cast<std::uint16_t>(cls));
        g.user_slots.insert(g.user_slots.end(), sorted.begin(), sorted.end());
        g.user_offset.push_back(static_cast<std::uint32_t>(g.user_slots.size()));
    }
    g.rebuild_slot_adjacency();
    return g;
}

void FrameGraph::rebuild_slot_adjacency() {
    const std::size_t slots = static_cast<std::size_t>(n);
    slot_offset.assign(slots + 1, 0);
    for (std::uint32_t s : user_slots) slot_offset[s + 1]++;
    for (std::size_t s = 0; s < slots; ++s) slot_offset[s + 1] += slot_offset[s];
    slot_users.resize(user_slots.size());
    std::vector<std::uint32_t> cursor(slot_offset.begin(), slot_offset.end() - 1);
    for (std::size_t u = 0; u < user_count(); ++u) {
        for (std::uint32_t e = user_offset[u]; e < user_offset[u + 1]; ++e) {
            slot_users[cursor[user_slots[e]]++] = static_cast<std::uint32_t>(u);
        }
    }
}

FrameSampler::FrameSampler(const ScenarioConfig& config)
    : n_(config.n), m_(config.user_count()), assignment_(config.assignment) {
    for (const auto& c : config.classes) {
        std::vector<double> cdf(static_cast<std::size_t>(c.dist.max_degree()));
        double acc = 0.0;
        for (int l = 1; l <= c.dist.max_degree(); ++l) {
            acc += c.dist.prob(l);
            cdf[static_cast<std::size_t>(l - 1)] = acc;
        }
        cdf.back() = 1.0;
        degree_cdf_.push_back(std::move(cdf));
        class_cdf_.push_back((class_cdf_.empty() ? 0.0 : class_cdf_.back()) + c.alpha);
    }
    class_cdf_.back() = 1.0;

    // Largest-remainder integerization of the class fractions.
    fixed_counts_.resize(config.classes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t k = 0; k < config.classes.size(); ++k) {
        const double exact = config.classes[k].alpha * m_;
        fixed_counts_[k] = static_cast<int>(std::floor(exact));
        assigned += fixed_counts_[k];
        remainders.emplace_back(exact - fixed_counts_[k], k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < m_ - assigned; ++i) fixed_counts_[remainders[static_cast<std::size_t>(i)].second]++;
}

void FrameSampler::generate(SplitMix64& rng, FrameGraph& out) const {
    out.n = n_;
    out.user_class.clear();
    out.user_slots.clear();
    out.user_offset.clear();
    out.user_offset.push_back(0);

    std::size_t max_d = 0;
    for (const auto& cdf : degree_cdf_) max_d = std::max(max_d, cdf.size());
    std::vector<std::uint32_t> scratch(max_d);
    int next_fixed_class = 0;
    int remaining_in_class = assignment_ == ClassAssignment::fixed_fraction ? fixed_counts_[0] : 0;

    for (int u = 0; u < m_; ++u) {
        std::size_t k;
        if (assignment_ == ClassAssignment::stochastic) {
            const double z = rng.unit();
            k = 0;
            while (z >= class_cdf_[k]) ++k;
        } else {
            while (remaining_in_class == 0) {
                remaining_in_class = fixed_counts_[static_cast<std::size_t>(++next_fixed_class)];
            }
            k = static_cast<std::size_t>(next_fixed_class);
            --remaining_in_class;
        }

        const auto& cdf = degree_cdf_[k];
        const double z = rng.unit();
        std::size_t li = 0;
        while (z >= cdf[li]) ++li;
        const std::uint32_t degree = static_cast<std::uint32_t>(li + 1);

        sample_distinct_sorted(rng, static_cast<std::uint64_t>(n_), degree, scratch.begin());
        out.user_class.push_back(static_cast<std::uint16_t>(k));
        out.user_slots.insert(out.user_slots.end(), scratch.begin(), scratch.begin() + degree);
        out.user_offset.push_back(static_cast<std::uint32_t>(out.user_slots.size()));
    }
    out.rebuild_slot_adjacency();
}

FrameGraph generate_frame(const ScenarioConfig& config, SplitMix64& rng) {
    FrameGraph g;
    FrameSampler(config).generate(rng, g);
    return g;
}

std::size_t PeelWorkspace::run(const FrameGraph& g) {
    const std::size_t slots = static_cast<std::size_t>(g.n);
    live_count_.assign(slots, 0);
    resolved_.assign(g.user_count(), 0);
    queue_.clear();

    for (std::size_t s = 0; s < slots; ++s) {
        live_count_[s] = g.slot_offset[s + 1] - g.slot_offset[s];
        if (live_count_[s] == 1) queue_.push_back(static_cast<std::uint32_t>(s));
    }

    std::size_t resolved_count = 0;
    std::size_t head = 0;
    while (head < queue_.size()) {
        const std::uint32_t s = queue_[head++];
        if (live_count_[s] != 1) continue;  // became empty since enqueued
        std::uint32_t user = 0;
        for (std::uint32_t e = g.slot_offset[s]; e < g.slot_offset[s + 1]; ++e) {
            if (!resolved_[g.slot_users[e]]) {
                user = g.slot_users[e];
                break;
            }
        }
        resolved_[user] = 1;
        ++resolved_count;
        for (std::uint32_t e = g.user_offset[user]; e < g.user_offset[user + 1]; ++e) {
            const std::uint32_t t = g.user_slots[e];
            if (--live_count_[t] == 1) queue_.push_back(t);
        }
    }
    return resolved_count;
}

std::vector<std::uint32_t> peel(const FrameGraph& g) {
    PeelWorkspace ws;
    ws.run(g);
    std::vector<std::uint32_t> out;
    for (std::size_t u = 0; u < g.user_count(); ++u) {
        if (ws.resolved()[u]) out.push_back(static_cast<std::uint32_t>(u));
    }
    return out;
}

}  // namespace csa
