#include "csa/error_floor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csa {

namespace {

// Explicit log-sums rather than lgamma differences: the arguments stay small
// (k <= 20, nu <= 5), and large-argument lgamma carries absolute log error
// proportional to its value, which the closed-form tolerance cannot absorb.
double log_binomial(int n, int k) {
    double acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += std::log(static_cast<double>(n + 1 - i)) - std::log(static_cast<double>(i));
    return acc;
}

// log of (m-1)! / (m-nu)!
double log_falling_factorial(int m, int nu) {
    double acc = 0.0;
    for (int i = m - nu + 1; i <= m - 1; ++i) acc += std::log(static_cast<double>(i));
    return acc;
}

double log_factorial(int k) {
    double acc = 0.0;
    for (int i = 2; i <= k; ++i) acc += std::log(static_cast<double>(i));
    return acc;
}

}  // namespace

double plr_degree(const StoppingSetCatalog& catalog, const DegreeDistribution& avg, int n,
                  int m, int l, const ErrorFloorOptions& options) {
    if (avg.prob(l) <= 0.0) {
        throw std::invalid_argument("plr_degree: average distribution has no mass on degree " +
                                    std::to_string(l));
    }

    // log of each stopping set's contribution, summed with a max shift
    std::vector<double> log_terms;
    for (const auto& s : catalog.sets) {
        if (options.minimal_only && !s.minimal) continue;
        bool annihilated = false;
        for (int j = 2; j <= s.max_vn_degree(); ++j) {
            if (s.degree_histogram[static_cast<std::size_t>(j - 1)] > 0 && avg.prob(j) <= 0.0) {
                annihilated = true;
                break;
            }
        }
        if (annihilated) continue;
        if (n < s.mu) {
            throw std::invalid_argument("plr_degree: frame length " + std::to_string(n) +
                                        " below catalog mu " + std::to_string(s.mu));
        }
        if (m <= s.nu) {
            throw std::invalid_argument("plr_degree: user count " + std::to_string(m) +
                                        " must exceed catalog nu " + std::to_string(s.nu));
        }
        const int vl = l <= s.max_vn_degree() ? s.degree_histogram[static_cast<std::size_t>(l - 1)] : 0;
        if (vl == 0) continue;

        // Expected embeddings containing a fixed degree-l user. c counts
        // labeled realizations, so the 1/nu! here converts the ordered-user
        // factor (m-1)!/(m-nu)! into unordered placements; spelling the same
        // factor as c * prod_j v_j! / nu! recovers the degree-class count the
        // approximation needs for mixed-degree sets.
        double log_term = std::log(static_cast<double>(vl)) + std::log(static_cast<double>(s.c)) +
                          log_falling_factorial(m, s.nu) - log_factorial(s.nu) +
                          log_binomial(n, s.mu);
        for (int j = 2; j <= s.max_vn_degree(); ++j) {
            const int vj = s.degree_histogram[static_cast<std::size_t>(j - 1)];
            if (vj == 0) continue;
            log_term += vj * (std::log(avg.prob(j)) - log_binomial(n, j));
        }
        log_terms.push_back(log_term);
    }
    if (log_terms.empty()) return 0.0;

    double max_term = log_terms.front();
    for (double t : log_terms) max_term = std::max(max_term, t);
    double sum = 0.0;
    for (double t : log_terms) sum += std::exp(t - max_term);

    return std::exp(max_term + std::log(sum) - std::log(avg.prob(l)));
}

double plr_class(const StoppingSetCatalog& catalog, const std::vector<ClassSpec>& classes,
                 int n, int m, std::size_t k, const ErrorFloorOptions& options) {
    if (k >= classes.size()) throw std::invalid_argument("plr_class: class index out of range");
    const DegreeDistribution avg = average_distribution(classes);
    const DegreeDistribution& own = classes[k].dist;
    double p = 0.0;
    for (int l = 1; l <= own.max_degree(); ++l) {
        if (own.prob(l) <= 0.0) continue;
        p += own.prob(l) * plr_degree(catalog, avg, n, m, l, options);
    }
    return p;
}

}  // namespace csa
