#pragma once

#include <cstddef>
#include <map>
#include <vector>

namespace csa {

// PMF over repetition degrees, kept as the coefficient vector of the
// polynomial sum_l p_l x^l. Immutable after construction.
class DegreeDistribution {
public:
    // probs_by_degree[l-1] is the probability of degree l. Entries must be
    // non-negative and sum to 1 within 1e-12; violations are rejected, not
    // renormalized.
    explicit DegreeDistribution(std::vector<double> probs_by_degree);

    // Convenience constructor from {degree -> probability}.
    static DegreeDistribution from_map(const std::map<int, double>& probs);

    static constexpr double kNormalizationTol = 1e-12;

    // Largest degree with positive mass.
    int max_degree() const { return d_; }
    int min_degree() const { return min_degree_; }

    // Probability of degree l; zero outside 1..d.
    double prob(int l) const {
        return (l >= 1 && l <= d_) ? probs_[static_cast<std::size_t>(l - 1)] : 0.0;
    }

    // sum_l p_l x^l for x in [0, 1]. Throws std::domain_error outside.
    double eval(double x) const;

    // sum_l l p_l x^(l-1); at x = 1 this is the average degree.
    double eval_derivative(double x) const;

    double average_degree() const { return avg_degree_; }

    const std::vector<double>& probs() const { return probs_; }

    bool operator==(const DegreeDistribution& other) const { return probs_ == other.probs_; }

private:
    std::vector<double> probs_;  // index l-1 -> p_l, trimmed to max_degree
    int d_ = 0;
    int min_degree_ = 0;
    double avg_degree_ = 0.0;
};

}  // namespace csa
