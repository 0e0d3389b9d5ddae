#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "csa/scenario.hpp"
#include "csa/stopping_set.hpp"

namespace csa {

struct NelderMeadParams {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double simplex_tol = 1e-4;  // max vertex distance to the best vertex
    int max_evals = 2000;
    double initial_step = 0.05;
};

struct NelderMeadOutcome {
    std::vector<double> best_point;
    double best_value = 0.0;
    int evaluations = 0;
};

// Derivative-free simplex search, maximizing. Deterministic given the start
// point and parameters.
NelderMeadOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                              const std::vector<double>& start, const NelderMeadParams& params);

struct OptimizationProblem {
    int n = 100;
    double g_target = 0.5;
    std::vector<double> alpha;                       // per class, sums to 1
    std::vector<std::optional<double>> target_plr;   // per class, in (0, 1]
    std::vector<int> allowed_degrees = {2, 3, 8};    // subset of 2..8, ascending
    double start_grid_step = 0.1;
    double penalty_weight = 10.0;
    NelderMeadParams nm;
    int nu_max = 4;          // stopping-set catalog bound
    double de_tol = 1e-3;    // threshold bisection tolerance
    int objective_de_max_iter = 4000;  // fixed-point budget inside the search
    int workers = 0;

    std::size_t class_count() const { return alpha.size(); }
    // free coordinates per class: all allowed degrees except the last, whose
    // mass is the remainder
    std::size_t dims_per_class() const { return allowed_degrees.size() - 1; }

    void validate() const;
    std::string to_json() const;
    static OptimizationProblem from_json(const std::string& text);
};

struct OptimizationResult {
    bool feasible = false;
    double g_star = 0.0;                       // threshold of the returned mixture
    std::vector<DegreeDistribution> dists;     // per class
    std::vector<double> predicted_plr;         // per class at g_target
    std::uint64_t starts_attempted = 0;
    std::vector<std::pair<std::uint64_t, double>> objective_trace;  // improving (start, value)

    std::string to_json(const OptimizationProblem& problem) const;
    std::string to_table(const OptimizationProblem& problem) const;
};

// Penalized objective over flat coordinates (dims_per_class per class,
// concatenated): threshold of the mixture minus a log-domain penalty per
// violated PLR target. Invalid simplex coordinates yield the hard sentinel.
double objective(const OptimizationProblem& problem, const StoppingSetCatalog& catalog,
                 const std::vector<double>& coords);

constexpr double kInvalidObjective = -1e300;

// Multi-start search: Nelder-Mead from every grid start; best feasible result
// wins, with infeasible-best reported when no start satisfies the targets.
OptimizationResult optimize(const OptimizationProblem& problem);

}  // namespace csa
