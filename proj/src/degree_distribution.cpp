#include "csa/degree_distribution.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csa {

DegreeDistribution::DegreeDistribution(std::vector<double> probs_by_degree)
    : probs_(std::move(probs_by_degree)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        const double p = probs_[i];
        if (!(p >= 0.0)) {
            throw std::invalid_argument("DegreeDistribution: probability of degree " +
                                        std::to_string(i + 1) + " is negative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kNormalizationTol) {
        throw std::invalid_argument("DegreeDistribution: probabilities sum to " +
                                    std::to_string(sum) + ", expected 1 within 1e-12");
    }
    while (!probs_.empty() && probs_.back() == 0.0) probs_.pop_back();
    if (probs_.empty()) {
        throw std::invalid_argument("DegreeDistribution: no degree has positive mass");
    }
    d_ = static_cast<int>(probs_.size());
    min_degree_ = d_;
    for (int l = 1; l <= d_; ++l) {
        if (probs_[static_cast<std::size_t>(l - 1)] > 0.0) {
            min_degree_ = l;
            break;
        }
    }
    for (int l = 1; l <= d_; ++l) avg_degree_ += l * probs_[static_cast<std::size_t>(l - 1)];
}

DegreeDistribution DegreeDistribution::from_map(const std::map<int, double>& probs) {
    int d = 0;
    for (const auto& [l, p] : probs) {
        if (l < 1) throw std::invalid_argument("DegreeDistribution: degree must be >= 1");
        if (p > 0.0) d = std::max(d, l);
    }
    std::vector<double> v(static_cast<std::size_t>(std::max(d, 1)), 0.0);
    for (const auto& [l, p] : probs) {
        if (l <= d) v[static_cast<std::size_t>(l - 1)] = p;
    }
    return DegreeDistribution(std::move(v));
}

double DegreeDistribution::eval(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("DegreeDistribution::eval: x must be in [0, 1]");
    }
    // Horner over the dense coefficient vector; constant term is zero.
    double acc = 0.0;
    for (int l = d_; l >= 1; --l) acc = acc * x + probs_[static_cast<std::size_t>(l - 1)];
    return acc * x;
}

double DegreeDistribution::eval_derivative(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("DegreeDistribution::eval_derivative: x must be in [0, 1]");
    }
    double acc = 0.0;
    for (int l = d_; l >= 1; --l) acc = acc * x + l * probs_[static_cast<std::size_t>(l - 1)];
    return acc;
}

}  // namespace csa
