#include "csa/density_evolution.hpp"

#include <cmath>
#include <stdexcept>

namespace csa {

namespace {

constexpr double kStallDelta = 1e-14;

void validate(double g, const FixedPointOptions& options) {
    if (!(g > 0.0)) throw std::invalid_argument("density evolution: g must be > 0");
    if (!(options.eps > 0.0 && options.eps <= 1e-6)) {
        throw std::invalid_argument("density evolution: eps must be in (0, 1e-6]");
    }
    if (options.max_iter < 1) throw std::invalid_argument("density evolution: max_iter must be >= 1");
}

}  // namespace

FixedPointResult de_fixed_point(const DegreeDistribution& avg, double g,
                                const FixedPointOptions& options) {
    validate(g, options);
    FixedPointResult result;
    double xi = 1.0;
    for (int i = 0; i < options.max_iter; ++i) {
        const double next = 1.0 - std::exp(-g * avg.eval_derivative(xi));
        result.iterations = i + 1;
        if (options.record_trajectory) result.trajectory.push_back(next);
        if (next < options.eps) {
            result.converged = true;
            result.final_xi = next;
            return result;
        }
        if (xi - next < kStallDelta) {  // stuck at a positive fixed point
            result.final_xi = next;
            return result;
        }
        xi = next;
    }
    result.final_xi = xi;
    return result;
}

DEResult threshold(const DegreeDistribution& avg, double tol, const FixedPointOptions& options) {
    if (!(tol > 0.0 && tol <= 1e-2)) {
        throw std::invalid_argument("threshold: tol must be in (0, 1e-2]");
    }
    DEResult result;
    double lo = 0.0;  // feasible for min degree >= 2
    double hi = 2.0;  // safely infeasible
    FixedPointOptions probe = options;
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        probe.record_trajectory = false;
        const bool ok = de_fixed_point(avg, mid, probe).converged;
        result.probes.emplace_back(mid, ok);
        if (ok) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.g_star = 0.5 * (lo + hi);
    if (options.record_trajectory && lo > 0.0) {
        probe.record_trajectory = true;
        result.trajectory = de_fixed_point(avg, lo, probe).trajectory;
    }
    if (avg.min_degree() >= 2 && result.g_star > 1.0 + tol) {
        throw std::logic_error("threshold: g* > 1 for a min-degree-2 ensemble");
    }
    return result;
}

MultiEdgeResult multi_edge_de(const std::vector<ClassSpec>& classes, double g,
                              const FixedPointOptions& options) {
    validate(g, options);
    if (classes.empty()) throw std::invalid_argument("multi_edge_de: no classes");

    const std::size_t kappa = classes.size();
    std::vector<double> theta(kappa);  // Poisson mean of type-k slot degrees
    for (std::size_t k = 0; k < kappa; ++k) {
        theta[k] = g * classes[k].alpha * classes[k].dist.eval_derivative(1.0);
    }
    const auto poisson_pgf = [&](std::size_t k, double x) { return std::exp(-theta[k] * (1.0 - x)); };

    MultiEdgeResult result;
    result.final_xi.assign(kappa, 1.0);
    result.xi.resize(kappa);
    result.p.resize(kappa);

    std::vector<double> q(kappa, 1.0);  // VN -> CN erasure probability per class
    std::vector<double> xi(kappa, 1.0);
    for (int i = 0; i < options.max_iter; ++i) {
        double max_xi = 0.0;
        double max_drop = 0.0;
        for (std::size_t k = 0; k < kappa; ++k) {
            // Edge-perspective CN distribution equals the Poisson pgf, so the
            // product runs over the own-class rho and the other classes' pgfs.
            double prod = poisson_pgf(k, 1.0 - q[k]);
            for (std::size_t j = 0; j < kappa; ++j) {
                if (j != k) prod *= poisson_pgf(j, 1.0 - q[j]);
            }
            const double next = 1.0 - prod;
            max_drop = std::max(max_drop, xi[k] - next);
            xi[k] = next;
            max_xi = std::max(max_xi, next);
            if (options.record_trajectory) {
                result.xi[k].push_back(next);
                result.p[k].push_back(classes[k].dist.eval(next));
            }
        }
        result.iterations = i + 1;
        if (max_xi < options.eps) {
            result.converged = true;
            result.final_xi = xi;
            return result;
        }
        if (max_drop < kStallDelta) {
            result.final_xi = xi;
            return result;
        }
        for (std::size_t k = 0; k < kappa; ++k) {
            const double ddot = classes[k].dist.eval_derivative(1.0);
            q[k] = classes[k].dist.eval_derivative(xi[k]) / ddot;  // lambda_k(xi_k)
        }
    }
    result.final_xi = xi;
    return result;
}

double multi_edge_threshold(const std::vector<ClassSpec>& classes, double tol,
                            const FixedPointOptions& options) {
    if (!(tol > 0.0 && tol <= 1e-2)) {
        throw std::invalid_argument("multi_edge_threshold: tol must be in (0, 1e-2]");
    }
    double lo = 0.0;
    double hi = 2.0;
    FixedPointOptions probe = options;
    probe.record_trajectory = false;
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        if (multi_edge_de(classes, mid, probe).converged) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

bool de_condition_holds_on_grid(const DegreeDistribution& avg, double g, std::size_t points) {
    if (points < 2) throw std::invalid_argument("de_condition_holds_on_grid: points must be >= 2");
    for (std::size_t i = 1; i <= points; ++i) {
        const double xi = static_cast<double>(i) / static_cast<double>(points);
        if (!(xi > 1.0 - std::exp(-g * avg.eval_derivative(xi)))) return false;
    }
    return true;
}

}  // namespace csa
