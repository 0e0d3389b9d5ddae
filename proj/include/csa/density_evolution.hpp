#pragma once

#include <cstddef>
#include <vector>

#include "csa/scenario.hpp"

namespace csa {

struct FixedPointOptions {
    int max_iter = 10000;
    double eps = 1e-10;
    bool record_trajectory = false;
};

struct FixedPointResult {
    bool converged = false;
    double final_xi = 1.0;
    int iterations = 0;
    std::vector<double> trajectory;  // computed iterates xi_1, xi_2, ...
};

// Iterates xi <- 1 - exp(-g * avg'(xi)) from xi = 1. Converged means xi fell
// below eps within max_iter; the sequence is monotone non-increasing.
FixedPointResult de_fixed_point(const DegreeDistribution& avg, double g,
                                const FixedPointOptions& options = {});

struct DEResult {
    double g_star = 0.0;
    std::vector<std::pair<double, bool>> probes;  // (g, converged) per bisection step
    std::vector<double> trajectory;               // xi sequence at the last feasible probe
};

// Largest load with a vanishing fixed point, by bisection over [0, 2].
DEResult threshold(const DegreeDistribution& avg, double tol = 1e-3,
                   const FixedPointOptions& options = {});

struct MultiEdgeResult {
    bool converged = false;
    int iterations = 0;
    std::vector<double> final_xi;               // per class
    std::vector<std::vector<double>> xi;        // per class, per iteration
    std::vector<std::vector<double>> p;         // per class VN erasure probability per iteration
};

// Coupled per-class recursion with class edge-perspective distributions and
// Poisson slot-degree distributions. All classes provably share the same xi
// trajectory; this implementation keeps them separate so the collapse can be
// checked numerically.
MultiEdgeResult multi_edge_de(const std::vector<ClassSpec>& classes, double g,
                              const FixedPointOptions& options = {});

double multi_edge_threshold(const std::vector<ClassSpec>& classes, double tol = 1e-3,
                            const FixedPointOptions& options = {});

// Dense-grid validation of the threshold condition
//   xi > 1 - exp(-g * avg'(xi))  for all xi in (0, 1],
// checked on an equispaced grid. Guards against fixed points the iteration
// approaches too slowly to classify within its budget.
bool de_condition_holds_on_grid(const DegreeDistribution& avg, double g,
                                std::size_t points = 100000);

}  // namespace csa
