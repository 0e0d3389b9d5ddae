#include "csa/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#include "csa/density_evolution.hpp"
#include "csa/error_floor.hpp"
#include "csa/parallel.hpp"

namespace csa {

NelderMeadOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                              const std::vector<double>& start, const NelderMeadParams& params) {
    const std::size_t dim = start.size();
    if (dim == 0) throw std::invalid_argument("nelder_mead: empty start point");

    struct Vertex {
        std::vector<double> x;
        double f;
    };
    std::vector<Vertex> simplex;
    simplex.reserve(dim + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return objective(x);
    };

    simplex.push_back({start, eval(start)});
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> v = start;
        v[i] += (v[i] + params.initial_step <= 1.0) ? params.initial_step : -params.initial_step;
        simplex.push_back({v, eval(v)});
    }

    auto by_value_desc = [](const Vertex& a, const Vertex& b) { return a.f > b.f; };
    std::stable_sort(simplex.begin(), simplex.end(), by_value_desc);

    while (evals < params.max_evals) {
        double diameter = 0.0;
        for (std::size_t v = 1; v <= dim; ++v) {
            for (std::size_t i = 0; i < dim; ++i) {
                diameter = std::max(diameter, std::abs(simplex[v].x[i] - simplex[0].x[i]));
            }
        }
        if (diameter < params.simplex_tol) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t v = 0; v < dim; ++v) {
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        const Vertex& worst = simplex[dim];
        std::vector<double> reflected(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            reflected[i] = centroid[i] + params.reflection * (centroid[i] - worst.x[i]);
        }
        const double f_reflected = eval(reflected);

        if (f_reflected > simplex[0].f) {
            std::vector<double> expanded(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                expanded[i] = centroid[i] + params.expansion * (reflected[i] - centroid[i]);
            }
            const double f_expanded = eval(expanded);
            if (f_expanded > f_reflected) {
                simplex[dim] = {std::move(expanded), f_expanded};
            } else {
                simplex[dim] = {std::move(reflected), f_reflected};
            }
        } else if (f_reflected > simplex[dim - 1].f) {
            simplex[dim] = {std::move(reflected), f_reflected};
        } else {
            const bool outside = f_reflected > worst.f;
            std::vector<double> contracted(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                contracted[i] = outside ? centroid[i] + params.contraction * (reflected[i] - centroid[i])
                                        : centroid[i] + params.contraction * (worst.x[i] - centroid[i]);
            }
            const double f_contracted = eval(contracted);
            if (f_contracted > (outside ? f_reflected : worst.f)) {
                simplex[dim] = {std::move(contracted), f_contracted};
            } else {
                for (std::size_t v = 1; v <= dim; ++v) {
                    for (std::size_t i = 0; i < dim; ++i) {
                        simplex[v].x[i] = simplex[0].x[i] + params.shrink * (simplex[v].x[i] - simplex[0].x[i]);
                    }
                    simplex[v].f = eval(simplex[v].x);
                }
            }
        }
        std::stable_sort(simplex.begin(), simplex.end(), by_value_desc);
    }

    return {simplex[0].x, simplex[0].f, evals};
}

namespace {

constexpr int kQuantScale = 1000000;  // 1e-6 coordinate grid for memoization

// Integer micro-coordinates, or empty when outside the simplex.
std::vector<int> quantize(const OptimizationProblem& problem, const std::vector<double>& coords) {
    const std::size_t dims = problem.dims_per_class();
    std::vector<int> q(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double scaled = coords[i] * kQuantScale;
        if (!(scaled > -0.5 && scaled < kQuantScale + 0.5)) return {};
        q[i] = static_cast<int>(std::llround(scaled));
    }
    for (std::size_t k = 0; k < problem.class_count(); ++k) {
        long long sum = 0;
        for (std::size_t i = 0; i < dims; ++i) sum += q[k * dims + i];
        if (sum > kQuantScale) return {};
    }
    return q;
}

std::vector<DegreeDistribution> build_dists(const OptimizationProblem& problem,
                                            const std::vector<int>& q) {
    const std::size_t dims = problem.dims_per_class();
    std::vector<DegreeDistribution> dists;
    for (std::size_t k = 0; k < problem.class_count(); ++k) {
        int rest = kQuantScale;
        std::map<int, double> probs;
        for (std::size_t i = 0; i < dims; ++i) {
            const int u = q[k * dims + i];
            rest -= u;
            probs[problem.allowed_degrees[i]] = static_cast<double>(u) / kQuantScale;
        }
        probs[problem.allowed_degrees.back()] = static_cast<double>(rest) / kQuantScale;
        dists.push_back(DegreeDistribution::from_map(probs));
    }
    return dists;
}

std::vector<ClassSpec> build_classes(const OptimizationProblem& problem,
                                     const std::vector<DegreeDistribution>& dists) {
    std::vector<ClassSpec> classes;
    for (std::size_t k = 0; k < problem.class_count(); ++k) {
        classes.emplace_back(problem.alpha[k], dists[k]);
    }
    return classes;
}

std::string memo_key(const std::vector<int>& q) {
    std::string key(q.size() * 3, '\0');
    for (std::size_t i = 0; i < q.size(); ++i) {
        key[i * 3] = static_cast<char>(q[i] & 0xff);
        key[i * 3 + 1] = static_cast<char>((q[i] >> 8) & 0xff);
        key[i * 3 + 2] = static_cast<char>((q[i] >> 16) & 0xff);
    }
    return key;
}

// Catalog folded into per-degree-histogram coefficients for one (n, m). The
// sum over 20k sets collapses to a few hundred signatures; evaluating a
// candidate distribution is then a handful of multiplications per signature.
// Matches plr_degree up to floating-point rearrangement.
class EfEvaluator {
public:
    EfEvaluator(const StoppingSetCatalog& catalog, int n, int m, int max_degree)
        : d_max_(max_degree) {
        std::map<std::vector<int>, std::size_t> index;
        for (const auto& s : catalog.sets) {
            if (n < s.mu || m <= s.nu) {
                throw std::invalid_argument("EfEvaluator: catalog does not fit (n, m)");
            }
            std::vector<int> v(static_cast<std::size_t>(d_max_), 0);
            for (int j = 1; j <= s.max_vn_degree(); ++j) {
                v[static_cast<std::size_t>(j - 1)] = s.degree_histogram[static_cast<std::size_t>(j - 1)];
            }
            double log_base = std::log(static_cast<double>(s.c)) + log_falling(m, s.nu) -
                              log_fact(s.nu) + log_binom(n, s.mu);
            for (int j = 2; j <= s.max_vn_degree(); ++j) {
                const int vj = s.degree_histogram[static_cast<std::size_t>(j - 1)];
                if (vj > 0) log_base -= vj * log_binom(n, j);
            }
            auto [it, fresh] = index.emplace(v, signatures_.size());
            if (fresh) signatures_.push_back({v, std::vector<double>(static_cast<std::size_t>(d_max_), 0.0)});
            auto& coef = signatures_[it->second].coef_by_l;
            for (int l = 2; l <= s.max_vn_degree(); ++l) {
                const int vl = s.degree_histogram[static_cast<std::size_t>(l - 1)];
                if (vl > 0) coef[static_cast<std::size_t>(l - 1)] += vl * std::exp(log_base);
            }
        }
    }

    // p_l for every degree, given the candidate average distribution.
    std::vector<double> all_p(const DegreeDistribution& avg) const {
        std::vector<double> sums(static_cast<std::size_t>(d_max_), 0.0);
        for (const auto& sig : signatures_) {
            double weight = 1.0;
            for (int j = 2; j <= d_max_ && weight > 0.0; ++j) {
                const int vj = sig.v[static_cast<std::size_t>(j - 1)];
                for (int r = 0; r < vj; ++r) weight *= avg.prob(j);
            }
            if (weight <= 0.0) continue;
            for (int l = 2; l <= d_max_; ++l) {
                sums[static_cast<std::size_t>(l - 1)] += sig.coef_by_l[static_cast<std::size_t>(l - 1)] * weight;
            }
        }
        for (int l = 1; l <= d_max_; ++l) {
            const double pl = avg.prob(l);
            sums[static_cast<std::size_t>(l - 1)] = pl > 0.0 ? sums[static_cast<std::size_t>(l - 1)] / pl : 0.0;
        }
        return sums;
    }

private:
    static double log_binom(int n, int k) {
        double acc = 0.0;
        for (int i = 1; i <= k; ++i) {
            acc += std::log(static_cast<double>(n + 1 - i)) - std::log(static_cast<double>(i));
        }
        return acc;
    }
    static double log_falling(int m, int nu) {
        double acc = 0.0;
        for (int i = m - nu + 1; i <= m - 1; ++i) acc += std::log(static_cast<double>(i));
        return acc;
    }
    static double log_fact(int k) {
        double acc = 0.0;
        for (int i = 2; i <= k; ++i) acc += std::log(static_cast<double>(i));
        return acc;
    }

    struct Signature {
        std::vector<int> v;
        std::vector<double> coef_by_l;
    };
    int d_max_;
    std::vector<Signature> signatures_;
};

double penalty_term(const OptimizationProblem& problem, const StoppingSetCatalog& catalog,
                    const std::vector<ClassSpec>& classes, std::vector<double>* predicted) {
    const int m = static_cast<int>(std::llround(problem.g_target * problem.n));
    double penalty = 0.0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const double p = plr_class(catalog, classes, problem.n, m, k);
        if (predicted) (*predicted)[k] = p;
        if (problem.target_plr[k] && p > 0.0) {
            penalty += std::max(0.0, std::log10(p) - std::log10(*problem.target_plr[k]));
        }
    }
    return penalty;
}

struct ExactEvaluation {
    double g_star = 0.0;
    std::vector<double> predicted_plr;
    bool feasible = false;
};

}  // namespace

double objective(const OptimizationProblem& problem, const StoppingSetCatalog& catalog,
                 const std::vector<double>& coords) {
    problem.validate();
    if (coords.size() != problem.dims_per_class() * problem.class_count()) {
        throw std::invalid_argument("objective: coordinate count mismatch");
    }
    const std::vector<int> q = quantize(problem, coords);
    if (q.empty()) return kInvalidObjective;
    const auto dists = build_dists(problem, q);
    const auto classes = build_classes(problem, dists);
    FixedPointOptions fp;
    fp.max_iter = problem.objective_de_max_iter;
    const double g_star = threshold(average_distribution(classes), problem.de_tol, fp).g_star;
    return g_star - problem.penalty_weight * penalty_term(problem, catalog, classes, nullptr);
}

void OptimizationProblem::validate() const {
    if (n < 1) throw std::invalid_argument("OptimizationProblem: n must be >= 1");
    if (!(g_target > 0.0)) throw std::invalid_argument("OptimizationProblem: g_target must be > 0");
    if (alpha.empty()) throw std::invalid_argument("OptimizationProblem: no classes");
    if (target_plr.size() != alpha.size()) {
        throw std::invalid_argument("OptimizationProblem: target_plr count must match alpha count");
    }
    double alpha_sum = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("OptimizationProblem: alpha must be in (0, 1]");
        alpha_sum += a;
    }
    if (std::abs(alpha_sum - 1.0) > DegreeDistribution::kNormalizationTol) {
        throw std::invalid_argument("OptimizationProblem: alphas must sum to 1");
    }
    for (const auto& t : target_plr) {
        if (t && !(*t > 0.0 && *t <= 1.0)) {
            throw std::invalid_argument("OptimizationProblem: target_plr must be in (0, 1]");
        }
    }
    if (allowed_degrees.size() < 2) {
        throw std::invalid_argument("OptimizationProblem: need at least two allowed degrees");
    }
    for (std::size_t i = 0; i < allowed_degrees.size(); ++i) {
        if (allowed_degrees[i] < 2 || allowed_degrees[i] > 8) {
            throw std::invalid_argument("OptimizationProblem: allowed degrees must lie in 2..8");
        }
        if (i > 0 && allowed_degrees[i] <= allowed_degrees[i - 1]) {
            throw std::invalid_argument("OptimizationProblem: allowed degrees must be ascending");
        }
    }
    if (!(start_grid_step > 0.0 && start_grid_step <= 1.0)) {
        throw std::invalid_argument("OptimizationProblem: start_grid_step must be in (0, 1]");
    }
    if (!(penalty_weight >= 0.0)) throw std::invalid_argument("OptimizationProblem: penalty_weight must be >= 0");
    if (nu_max < 2) throw std::invalid_argument("OptimizationProblem: nu_max must be >= 2");
}

OptimizationResult optimize(const OptimizationProblem& problem) {
    problem.validate();
    const StoppingSetCatalog catalog =
        enumerate_stopping_sets(problem.nu_max, problem.allowed_degrees.back());

    // All grid tuples per class with coordinate sum <= 1.
    const int steps = static_cast<int>(std::floor(1.0 / problem.start_grid_step + 1e-9));
    const std::size_t dims = problem.dims_per_class();
    std::vector<std::vector<double>> class_tuples;
    std::vector<double> tuple(dims, 0.0);
    auto fill_tuples = [&](auto&& self, std::size_t i, int used) -> void {
        if (i == dims) {
            class_tuples.push_back(tuple);
            return;
        }
        for (int s = 0; s + used <= steps; ++s) {
            tuple[i] = s * problem.start_grid_step;
            self(self, i + 1, used + s);
        }
    };
    fill_tuples(fill_tuples, 0, 0);

    std::uint64_t num_starts = 1;
    for (std::size_t k = 0; k < problem.class_count(); ++k) num_starts *= class_tuples.size();

    auto start_point = [&](std::uint64_t index) {
        std::vector<double> coords(dims * problem.class_count());
        for (std::size_t k = problem.class_count(); k-- > 0;) {
            const std::size_t t = index % class_tuples.size();
            index /= class_tuples.size();
            std::copy(class_tuples[t].begin(), class_tuples[t].end(), coords.begin() + static_cast<std::ptrdiff_t>(k * dims));
        }
        return coords;
    };

    const int m_target = static_cast<int>(std::llround(problem.g_target * problem.n));
    const EfEvaluator ef(catalog, problem.n, m_target, problem.allowed_degrees.back());

    // Shared memo tables; values are pure functions of the key, so concurrent
    // recomputation is benign.
    std::unordered_map<std::string, double> threshold_memo;
    std::mutex threshold_mutex;
    std::unordered_map<std::string, ExactEvaluation> exact_memo;
    std::mutex exact_mutex;

    auto memoized_objective = [&](const std::vector<double>& coords) -> double {
        const std::vector<int> q = quantize(problem, coords);
        if (q.empty()) return kInvalidObjective;
        const std::string key = memo_key(q);
        double g_star;
        bool have = false;
        {
            std::lock_guard<std::mutex> lock(threshold_mutex);
            auto it = threshold_memo.find(key);
            if (it != threshold_memo.end()) {
                g_star = it->second;
                have = true;
            }
        }
        const auto dists = build_dists(problem, q);
        const auto classes = build_classes(problem, dists);
        const DegreeDistribution avg = average_distribution(classes);
        if (!have) {
            FixedPointOptions fp;
            fp.max_iter = problem.objective_de_max_iter;
            g_star = threshold(avg, problem.de_tol, fp).g_star;
            std::lock_guard<std::mutex> lock(threshold_mutex);
            threshold_memo.emplace(key, g_star);
        }
        const std::vector<double> p_by_degree = ef.all_p(avg);
        double penalty = 0.0;
        for (std::size_t k = 0; k < classes.size(); ++k) {
            if (!problem.target_plr[k]) continue;
            double p = 0.0;
            for (int l = 1; l <= dists[k].max_degree(); ++l) {
                p += dists[k].prob(l) * p_by_degree[static_cast<std::size_t>(l - 1)];
            }
            if (p > 0.0) {
                penalty += std::max(0.0, std::log10(p) - std::log10(*problem.target_plr[k]));
            }
        }
        return g_star - problem.penalty_weight * penalty;
    };

    auto evaluate_exact = [&](const std::vector<int>& q) -> ExactEvaluation {
        const std::string key = memo_key(q);
        {
            std::lock_guard<std::mutex> lock(exact_mutex);
            auto it = exact_memo.find(key);
            if (it != exact_memo.end()) return it->second;
        }
        const auto dists = build_dists(problem, q);
        const auto classes = build_classes(problem, dists);
        ExactEvaluation exact;
        exact.predicted_plr.resize(problem.class_count());
        exact.g_star = threshold(average_distribution(classes), problem.de_tol).g_star;
        penalty_term(problem, catalog, classes, &exact.predicted_plr);
        exact.feasible = true;
        for (std::size_t k = 0; k < problem.class_count(); ++k) {
            if (problem.target_plr[k] && exact.predicted_plr[k] > *problem.target_plr[k]) {
                exact.feasible = false;
            }
        }
        std::lock_guard<std::mutex> lock(exact_mutex);
        exact_memo.emplace(key, exact);
        return exact;
    };

    struct StartOutcome {
        std::vector<int> q;   // empty when the search ended outside the simplex
        double objective = kInvalidObjective;
    };
    std::vector<StartOutcome> outcomes(num_starts);

    run_chunked(num_starts, problem.workers, [&](int, std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t s = begin; s < end; ++s) {
            const NelderMeadOutcome nm = nelder_mead(memoized_objective, start_point(s), problem.nm);
            StartOutcome& out = outcomes[s];
            out.objective = nm.best_value;
            out.q = quantize(problem, nm.best_point);
        }
    });

    OptimizationResult result;
    result.starts_attempted = num_starts;

    double trace_best = kInvalidObjective;
    const std::vector<int>* best_feasible_q = nullptr;
    double best_feasible_g = 0.0;
    const std::vector<int>* best_infeasible_q = nullptr;
    double best_infeasible_obj = kInvalidObjective;
    for (std::uint64_t s = 0; s < num_starts; ++s) {
        const StartOutcome& out = outcomes[s];
        if (out.q.empty()) continue;
        if (out.objective > trace_best) {
            trace_best = out.objective;
            result.objective_trace.emplace_back(s, out.objective);
        }
        const ExactEvaluation exact = evaluate_exact(out.q);
        if (exact.feasible) {
            if (best_feasible_q == nullptr || exact.g_star > best_feasible_g) {
                best_feasible_q = &out.q;
                best_feasible_g = exact.g_star;
            }
        } else if (best_infeasible_q == nullptr || out.objective > best_infeasible_obj) {
            best_infeasible_q = &out.q;
            best_infeasible_obj = out.objective;
        }
    }

    const std::vector<int>* best_q = best_feasible_q ? best_feasible_q : best_infeasible_q;
    if (best_q == nullptr) {
        throw std::logic_error("optimize: no start produced a valid candidate");
    }
    const ExactEvaluation exact = evaluate_exact(*best_q);
    result.feasible = exact.feasible;
    result.g_star = exact.g_star;
    result.predicted_plr = exact.predicted_plr;
    result.dists = build_dists(problem, *best_q);
    return result;
}

std::string OptimizationProblem::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["g_target"] = g_target;
    j["alpha"] = alpha;
    j["target_plr"] = nlohmann::json::array();
    for (const auto& t : target_plr) {
        if (t) {
            j["target_plr"].push_back(*t);
        } else {
            j["target_plr"].push_back(nullptr);
        }
    }
    j["allowed_degrees"] = allowed_degrees;
    j["start_grid_step"] = start_grid_step;
    j["penalty_weight"] = penalty_weight;
    j["nu_max"] = nu_max;
    j["de_tol"] = de_tol;
    j["nm"] = {{"reflection", nm.reflection},
               {"expansion", nm.expansion},
               {"contraction", nm.contraction},
               {"shrink", nm.shrink},
               {"simplex_tol", nm.simplex_tol},
               {"max_evals", nm.max_evals},
               {"initial_step", nm.initial_step}};
    return j.dump(2);
}

OptimizationProblem OptimizationProblem::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    OptimizationProblem p;
    p.n = j.at("n").get<int>();
    p.g_target = j.at("g_target").get<double>();
    p.alpha = j.at("alpha").get<std::vector<double>>();
    for (const auto& t : j.at("target_plr")) {
        if (t.is_null()) {
            p.target_plr.push_back(std::nullopt);
        } else {
            p.target_plr.push_back(t.get<double>());
        }
    }
    if (j.contains("allowed_degrees")) p.allowed_degrees = j["allowed_degrees"].get<std::vector<int>>();
    if (j.contains("start_grid_step")) p.start_grid_step = j["start_grid_step"].get<double>();
    if (j.contains("penalty_weight")) p.penalty_weight = j["penalty_weight"].get<double>();
    if (j.contains("nu_max")) p.nu_max = j["nu_max"].get<int>();
    if (j.contains("de_tol")) p.de_tol = j["de_tol"].get<double>();
    if (j.contains("nm")) {
        const auto& jm = j["nm"];
        p.nm.reflection = jm.value("reflection", p.nm.reflection);
        p.nm.expansion = jm.value("expansion", p.nm.expansion);
        p.nm.contraction = jm.value("contraction", p.nm.contraction);
        p.nm.shrink = jm.value("shrink", p.nm.shrink);
        p.nm.simplex_tol = jm.value("simplex_tol", p.nm.simplex_tol);
        p.nm.max_evals = jm.value("max_evals", p.nm.max_evals);
        p.nm.initial_step = jm.value("initial_step", p.nm.initial_step);
    }
    p.validate();
    return p;
}

std::string OptimizationResult::to_json(const OptimizationProblem& problem) const {
    nlohmann::json j;
    j["feasible"] = feasible;
    j["g_star"] = g_star;
    j["starts_attempted"] = starts_attempted;
    j["predicted_plr"] = predicted_plr;
    j["classes"] = nlohmann::json::array();
    for (std::size_t k = 0; k < dists.size(); ++k) {
        nlohmann::json jc;
        jc["alpha"] = problem.alpha[k];
        if (problem.target_plr[k]) jc["target_plr"] = *problem.target_plr[k];
        nlohmann::json jd = nlohmann::json::object();
        for (int l = 1; l <= dists[k].max_degree(); ++l) {
            if (dists[k].prob(l) > 0.0) jd[std::to_string(l)] = dists[k].prob(l);
        }
        jc["dist"] = jd;
        j["classes"].push_back(jc);
    }
    j["objective_trace"] = nlohmann::json::array();
    for (const auto& [s, v] : objective_trace) j["objective_trace"].push_back({s, v});
    return j.dump(2);
}

std::string OptimizationResult::to_table(const OptimizationProblem& problem) const {
    std::string out;
    char buf[64];
    out += "target_plr";
    for (std::size_t k = 0; k < dists.size(); ++k) {
        for (int d : problem.allowed_degrees) {
            std::snprintf(buf, sizeof(buf), "  L%zu_%d", k + 1, d);
            out += buf;
        }
    }
    out += "  g_star  feasible\n";
    for (std::size_t k = 0; k < problem.target_plr.size(); ++k) {
        if (problem.target_plr[k]) {
            std::snprintf(buf, sizeof(buf), "%.0e", *problem.target_plr[k]);
        } else {
            std::snprintf(buf, sizeof(buf), "-");
        }
        out += buf;
        if (k + 1 < problem.target_plr.size()) out += "/";
    }
    for (const auto& dist : dists) {
        for (int d : problem.allowed_degrees) {
            std::snprintf(buf, sizeof(buf), "  %.4f", dist.prob(d));
            out += buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "  %.4f  %s\n", g_star, feasible ? "yes" : "no");
    out += buf;
    return out;
}

}  // namespace csa
