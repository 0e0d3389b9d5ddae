#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "csa/delay.hpp"
#include "csa/density_evolution.hpp"
#include "csa/error_floor.hpp"
#include "csa/monte_carlo.hpp"
#include "csa/optimizer.hpp"
#include "csa/scenario.hpp"
#include "csa/stopping_set.hpp"

using namespace csa;

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("CSA_UEP_LOG");
        if (!env) return LogLevel::warn;
        const std::string s(env);
        if (s == "error") return LogLevel::error;
        if (s == "warn") return LogLevel::warn;
        if (s == "info") return LogLevel::info;
        if (s == "debug") return LogLevel::debug;
        std::fprintf(stderr, "[warn] unknown CSA_UEP_LOG value \"%s\", using warn\n", s.c_str());
        return LogLevel::warn;
    }();
    return level;
}

void logmsg(LogLevel level, const char* fmt, ...) {
    if (level > log_level()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] ", names[static_cast<int>(level)]);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fprintf(stderr, "\n");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("output path not writable: " + path);
    out << content;
    if (!out) throw std::invalid_argument("failed writing: " + path);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct LoadGrid {
    std::vector<double> values;

    static LoadGrid parse(const std::string& text) {
        LoadGrid grid;
        double start = 0, stop = 0, step = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3) {
            throw std::invalid_argument("grid must be START:STOP:STEP, got \"" + text + "\"");
        }
        if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
        if (!(start > 0.0)) throw std::invalid_argument("grid start must be > 0");
        if (stop < start) throw std::invalid_argument("grid stop must be >= start");
        for (double g = start; g <= stop + 1e-9; g += step) grid.values.push_back(g);
        return grid;
    }
};

ScenarioConfig load_scenario(const std::string& path, std::optional<std::uint64_t> seed_override) {
    ScenarioConfig config = ScenarioConfig::from_json(read_file(path));
    if (seed_override) {
        config = ScenarioConfig(config.n, config.g, config.classes, config.assignment, *seed_override);
    }
    for (std::size_t k = 0; k < config.classes.size(); ++k) {
        if (config.classes[k].dist.prob(1) > 0.0) {
            logmsg(LogLevel::warn, "class %zu puts mass on degree 1; single-copy users are fragile",
                   k + 1);
        }
    }
    return config;
}

ScenarioConfig with_load(const ScenarioConfig& base, double g) {
    return ScenarioConfig(base.n, g, base.classes, base.assignment, base.seed);
}

// ---- subcommand runners ----

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    int workers = 0;
    std::string grid_text;
    int nu_max = 4;
    bool minimal_only = false;
    std::string catalog_cache;
};

std::string out_path(const CommonOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    return (std::filesystem::path(opts.out_dir) / name).string();
}

StoppingSetCatalog get_catalog(const CommonOpts& opts, int d_max) {
    if (!opts.catalog_cache.empty() && std::filesystem::exists(opts.catalog_cache)) {
        StoppingSetCatalog cached = StoppingSetCatalog::from_json(read_file(opts.catalog_cache));
        if (cached.nu_max >= opts.nu_max && cached.d_max >= d_max) {
            StoppingSetCatalog filtered;
            filtered.nu_max = opts.nu_max;
            filtered.d_max = d_max;
            for (const auto& s : cached.sets) {
                if (s.nu <= opts.nu_max && s.max_vn_degree() <= d_max) filtered.sets.push_back(s);
            }
            logmsg(LogLevel::info, "catalog cache hit: %zu of %zu sets", filtered.sets.size(),
                   cached.sets.size());
            return filtered;
        }
        logmsg(LogLevel::warn, "catalog cache covers nu<=%d d<=%d but nu<=%d d<=%d is needed; re-enumerating",
               cached.nu_max, cached.d_max, opts.nu_max, d_max);
    }
    StoppingSetCatalog catalog = enumerate_stopping_sets(opts.nu_max, d_max);
    if (!opts.catalog_cache.empty()) {
        logmsg(LogLevel::info, "writing catalog cache to %s", opts.catalog_cache.c_str());
        write_file(opts.catalog_cache, catalog.to_json());
    }
    return catalog;
}

int run_simulate(const CommonOpts& opts, const std::string& trace_path) {
    const ScenarioConfig base = load_scenario(opts.config_path, opts.seed);
    const std::uint64_t trials = opts.trials.value_or(1000000);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::vector<double> loads = opts.grid_text.empty() ? std::vector<double>{base.g}
                                                       : LoadGrid::parse(opts.grid_text).values;
    MonteCarloOptions mc;
    mc.workers = opts.workers;
    mc.collect_per_frame = !trace_path.empty();

    std::string csv = "g,class,observed,unresolved,plr,halfwidth,realized_load\n";
    std::string trace;
    for (double g : loads) {
        const ScenarioConfig config = with_load(base, g);
        logmsg(LogLevel::info, "simulate: g=%g trials=%llu", g, (unsigned long long)trials);
        const SimOutcome outcome = run_monte_carlo(config, trials, mc);
        for (std::size_t k = 0; k < outcome.per_class.size(); ++k) {
            const auto& tally = outcome.per_class[k];
            csv += fmt_double(g) + "," + std::to_string(k + 1) + "," +
                   std::to_string(tally.users_observed) + "," +
                   std::to_string(tally.users_unresolved) + "," + fmt_double(tally.plr()) + "," +
                   fmt_double(tally.confidence_halfwidth()) + "," +
                   fmt_double(outcome.realized_load) + "\n";
        }
        if (mc.collect_per_frame) {
            const std::size_t kappa = outcome.per_class.size();
            for (std::uint64_t f = 0; f < outcome.trials; ++f) {
                trace += "{\"g\":" + fmt_double(g) + ",\"frame\":" + std::to_string(f) +
                         ",\"unresolved\":[";
                for (std::size_t k = 0; k < kappa; ++k) {
                    if (k) trace += ",";
                    trace += std::to_string(outcome.per_frame_unresolved[f * kappa + k]);
                }
                trace += "]}\n";
            }
        }
    }
    write_file(out_path(opts, "simulate.csv"), csv);
    if (!trace_path.empty()) write_file(trace_path, trace);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int run_threshold(const CommonOpts& opts, double tol, const std::string& xi_trace_path) {
    const ScenarioConfig config = load_scenario(opts.config_path, opts.seed);
    FixedPointOptions fp;
    fp.record_trajectory = !xi_trace_path.empty();
    const DEResult result = threshold(average_distribution(config.classes), tol, fp);
    std::printf("%.4f\n", result.g_star);
    logmsg(LogLevel::info, "threshold: %zu bisection probes", result.probes.size());
    if (!xi_trace_path.empty()) {
        std::string csv = "iteration,xi\n";
        for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
            csv += std::to_string(i + 1) + "," + fmt_double(result.trajectory[i]) + "\n";
        }
        write_file(xi_trace_path, csv);
    }
    return 0;
}

int run_errorfloor(const CommonOpts& opts) {
    const ScenarioConfig base = load_scenario(opts.config_path, opts.seed);
    std::vector<double> loads = opts.grid_text.empty() ? std::vector<double>{base.g}
                                                       : LoadGrid::parse(opts.grid_text).values;
    int d_max = 2;
    for (const auto& c : base.classes) d_max = std::max(d_max, c.dist.max_degree());
    const StoppingSetCatalog catalog = get_catalog(opts, d_max);
    const ErrorFloorOptions ef{opts.minimal_only};

    std::string csv = "g,class,plr_prediction\n";
    for (double g : loads) {
        const ScenarioConfig config = with_load(base, g);
        for (std::size_t k = 0; k < config.classes.size(); ++k) {
            const double p = plr_class(catalog, config.classes, config.n, config.user_count(), k, ef);
            csv += fmt_double(g) + "," + std::to_string(k + 1) + "," + fmt_double(p) + "\n";
        }
    }
    write_file(out_path(opts, "errorfloor.csv"), csv);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int run_optimize(const CommonOpts& opts, bool require_feasible) {
    OptimizationProblem problem = OptimizationProblem::from_json(read_file(opts.config_path));
    problem.workers = opts.workers;
    const OptimizationResult result = optimize(problem);
    write_file(out_path(opts, "optimize_result.json"), result.to_json(problem));
    std::fputs(result.to_table(problem).c_str(), stdout);
    if (require_feasible && !result.feasible) {
        logmsg(LogLevel::error, "no feasible distribution satisfies the PLR targets");
        return 2;
    }
    return 0;
}

int run_delay(const CommonOpts& opts) {
    const ScenarioConfig base = load_scenario(opts.config_path, opts.seed);
    const std::uint64_t trials = opts.trials.value_or(100000);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::vector<double> loads = opts.grid_text.empty() ? std::vector<double>{base.g}
                                                       : LoadGrid::parse(opts.grid_text).values;
    DelayMonteCarloOptions dm;
    dm.workers = opts.workers;

    // PMF at the configured load, means across the grid
    {
        const DelayOutcome outcome = run_delay_monte_carlo(base, trials, dm);
        std::string csv = "class,bin_center,mass\n";
        for (std::size_t k = 0; k < outcome.per_class.size(); ++k) {
            const auto& stats = outcome.per_class[k];
            for (std::size_t b = 0; b < stats.histogram.size(); ++b) {
                if (stats.histogram[b] == 0) continue;
                const double mass = static_cast<double>(stats.histogram[b]) /
                                    std::max<std::uint64_t>(stats.resolved, 1);
                csv += std::to_string(k + 1) + "," +
                       fmt_double(static_cast<double>(b + 1) / outcome.n) + "," + fmt_double(mass) +
                       "\n";
            }
        }
        write_file(out_path(opts, "delay_pmf.csv"), csv);
    }
    std::string csv = "g,class,mean,resolved_fraction\n";
    for (double g : loads) {
        const ScenarioConfig config = with_load(base, g);
        logmsg(LogLevel::info, "delay: g=%g trials=%llu", g, (unsigned long long)trials);
        const DelayOutcome outcome = run_delay_monte_carlo(config, trials, dm);
        for (std::size_t k = 0; k < outcome.per_class.size(); ++k) {
            const auto& stats = outcome.per_class[k];
            const std::uint64_t seen = stats.resolved + stats.unresolved;
            csv += fmt_double(g) + "," + std::to_string(k + 1) + "," +
                   fmt_double(stats.mean_normalized_delay(outcome.n)) + "," +
                   fmt_double(seen ? static_cast<double>(stats.resolved) / seen : 0.0) + "\n";
        }
    }
    write_file(out_path(opts, "delay_mean.csv"), csv);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

// ---- reproduce: bundled reference scenarios ----

struct ReferenceRow {
    const char* name;
    double alpha1;
    double target1, target2;
    double l1[3];  // degree 2, 3, 8 masses, class 1
    double l2[3];
};

constexpr ReferenceRow kReferenceRows[] = {
    {"a1", 0.1, 1e-5, 1e-2, {0.00, 0.01, 0.99}, {0.57, 0.30, 0.13}},
    {"a2", 0.1, 1e-4, 1e-3, {0.02, 0.11, 0.87}, {0.25, 0.66, 0.09}},
    {"a3", 0.1, 1e-5, 1e-3, {0.00, 0.01, 0.99}, {0.25, 0.67, 0.08}},
    {"a4", 0.1, 1e-5, 1e-4, {0.01, 0.00, 0.99}, {0.04, 0.51, 0.45}},
    {"b1", 0.2, 1e-5, 1e-2, {0.00, 0.01, 0.99}, {0.64, 0.33, 0.03}},
    {"b2", 0.2, 1e-4, 1e-3, {0.00, 0.25, 0.75}, {0.26, 0.72, 0.02}},
    {"b3", 0.2, 1e-5, 1e-3, {0.00, 0.01, 0.99}, {0.27, 0.73, 0.00}},
    {"b4", 0.2, 1e-5, 1e-4, {0.02, 0.02, 0.96}, {0.00, 0.63, 0.37}},
};

DegreeDistribution ref_dist(const double (&mass)[3]) {
    std::map<int, double> probs;
    if (mass[0] > 0) probs[2] = mass[0];
    if (mass[1] > 0) probs[3] = mass[1];
    if (mass[2] > 0) probs[8] = mass[2];
    return DegreeDistribution::from_map(probs);
}

std::vector<ClassSpec> ref_classes(const ReferenceRow& row) {
    return {ClassSpec(row.alpha1, ref_dist(row.l1), row.target1),
            ClassSpec(1.0 - row.alpha1, ref_dist(row.l2), row.target2)};
}

int run_reproduce_table1(const CommonOpts& opts, const std::vector<std::string>& rows) {
    std::string csv = "row,alpha1,target1,target2,L1_2,L1_3,L1_8,L2_2,L2_3,L2_8,g_star,feasible\n";
    for (const auto& row : kReferenceRows) {
        if (!rows.empty() && std::find(rows.begin(), rows.end(), row.name) == rows.end()) continue;
        OptimizationProblem problem;
        problem.n = 100;
        problem.g_target = 0.5;
        problem.alpha = {row.alpha1, 1.0 - row.alpha1};
        problem.target_plr = {row.target1, row.target2};
        problem.workers = opts.workers;
        problem.nu_max = opts.nu_max;
        logmsg(LogLevel::info, "optimizing row %s (targets %g / %g)", row.name, row.target1,
               row.target2);
        const OptimizationResult r = optimize(problem);
        csv += std::string(row.name) + "," + fmt_double(row.alpha1) + "," +
               fmt_double(row.target1) + "," + fmt_double(row.target2);
        for (const auto& dist : r.dists) {
            for (int d : {2, 3, 8}) csv += "," + fmt_double(dist.prob(d));
        }
        csv += "," + fmt_double(r.g_star) + "," + (r.feasible ? std::string("1") : std::string("0")) +
               "\n";
        std::printf("row %s: g*=%.4f feasible=%d\n", row.name, r.g_star, (int)r.feasible);
    }
    write_file(out_path(opts, "table1.csv"), csv);
    return 0;
}

int run_reproduce_fig4(const CommonOpts& opts) {
    const std::uint64_t trials = opts.trials.value_or(1000000);
    const std::vector<double> loads = opts.grid_text.empty()
                                          ? LoadGrid::parse("0.05:1.0:0.05").values
                                          : LoadGrid::parse(opts.grid_text).values;
    std::string csv = "row,g,class,plr_sim,halfwidth,plr_pred\n";
    MonteCarloOptions mc;
    mc.workers = opts.workers;
    for (const auto& row : kReferenceRows) {
        if (row.alpha1 != 0.2) continue;  // the four bundled curves
        const auto classes = ref_classes(row);
        int d_max = 2;
        for (const auto& c : classes) d_max = std::max(d_max, c.dist.max_degree());
        const StoppingSetCatalog catalog = get_catalog(opts, d_max);
        for (double g : loads) {
            ScenarioConfig config(100, g, classes, ClassAssignment::stochastic,
                                  opts.seed.value_or(0));
            logmsg(LogLevel::info, "fig4 row %s: g=%g", row.name, g);
            const SimOutcome outcome = run_monte_carlo(config, trials, mc);
            for (std::size_t k = 0; k < classes.size(); ++k) {
                const double pred =
                    plr_class(catalog, classes, config.n, config.user_count(), k,
                              ErrorFloorOptions{opts.minimal_only});
                csv += std::string(row.name) + "," + fmt_double(g) + "," + std::to_string(k + 1) +
                       "," + fmt_double(outcome.per_class[k].plr()) + "," +
                       fmt_double(outcome.per_class[k].confidence_halfwidth()) + "," +
                       fmt_double(pred) + "\n";
            }
        }
    }
    write_file(out_path(opts, "fig4.csv"), csv);
    return 0;
}

int run_reproduce_fig56(const CommonOpts& opts) {
    const std::uint64_t trials = opts.trials.value_or(100000);
    const auto classes = ref_classes(kReferenceRows[6]);  // b3: targets 1e-5 / 1e-3
    DelayMonteCarloOptions dm;
    dm.workers = opts.workers;

    std::string pmf = "g,class,bin_center,mass\n";
    for (double g : {0.1, 0.5, 0.9}) {
        ScenarioConfig config(100, g, classes, ClassAssignment::stochastic, opts.seed.value_or(0));
        const DelayOutcome outcome = run_delay_monte_carlo(config, trials, dm);
        for (std::size_t k = 0; k < classes.size(); ++k) {
            const auto& stats = outcome.per_class[k];
            for (std::size_t b = 0; b < stats.histogram.size(); ++b) {
                if (stats.histogram[b] == 0) continue;
                pmf += fmt_double(g) + "," + std::to_string(k + 1) + "," +
                       fmt_double(static_cast<double>(b + 1) / outcome.n) + "," +
                       fmt_double(static_cast<double>(stats.histogram[b]) / stats.resolved) + "\n";
            }
        }
    }
    write_file(out_path(opts, "fig5_pmf.csv"), pmf);

    const std::vector<double> loads = opts.grid_text.empty()
                                          ? LoadGrid::parse("0.05:0.95:0.05").values
                                          : LoadGrid::parse(opts.grid_text).values;
    std::string mean = "g,class,mean,resolved_fraction\n";
    for (double g : loads) {
        ScenarioConfig config(100, g, classes, ClassAssignment::stochastic, opts.seed.value_or(0));
        logmsg(LogLevel::info, "fig6: g=%g", g);
        const DelayOutcome outcome = run_delay_monte_carlo(config, trials, dm);
        for (std::size_t k = 0; k < classes.size(); ++k) {
            const auto& stats = outcome.per_class[k];
            const std::uint64_t seen = stats.resolved + stats.unresolved;
            mean += fmt_double(g) + "," + std::to_string(k + 1) + "," +
                    fmt_double(stats.mean_normalized_delay(outcome.n)) + "," +
                    fmt_double(seen ? static_cast<double>(stats.resolved) / seen : 0.0) + "\n";
        }
    }
    write_file(out_path(opts, "fig6_mean.csv"), mean);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-class coded slotted ALOHA analysis toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string trace_path;
    std::string xi_trace_path;
    double tol = 1e-3;
    bool require_feasible = false;
    std::vector<std::string> rows;
    std::string reproduce_what;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", opts.config_path, "scenario/problem JSON path");
        if (needs_config) c->required();
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--seed", opts.seed, "RNG seed override");
        cmd->add_option("--trials", opts.trials, "Monte Carlo frames per load point");
        cmd->add_option("--workers", opts.workers, "worker threads (0 = all cores)");
        cmd->add_option("--grid", opts.grid_text, "load grid START:STOP:STEP");
        cmd->add_option("--nu-max", opts.nu_max, "stopping-set catalog bound")
            ->check(CLI::Range(1, 5));
        cmd->add_option("--minimal-only", opts.minimal_only,
                        "restrict the error-floor sum to minimal stopping sets");
        cmd->add_option("--catalog-cache", opts.catalog_cache,
                        "JSON file persisting the stopping-set catalog");
    };

    auto* sim = app.add_subcommand("simulate", "Monte Carlo per-class PLR");
    add_common(sim, true);
    sim->add_option("--trace", trace_path, "per-frame trace output (JSON lines)");

    auto* thr = app.add_subcommand("threshold", "density-evolution threshold g*");
    add_common(thr, true);
    thr->add_option("--tol", tol, "bisection tolerance")->check(CLI::Range(1e-6, 1e-2));
    thr->add_option("--xi-trace", xi_trace_path, "write the xi trajectory CSV");

    auto* ef = app.add_subcommand("errorfloor", "stopping-set error-floor predictions");
    add_common(ef, true);

    auto* opt = app.add_subcommand("optimize", "degree-distribution design");
    add_common(opt, true);
    opt->add_flag("--require-feasible", require_feasible, "exit 2 when no feasible result");

    auto* del = app.add_subcommand("delay", "slot-based decoder delay statistics");
    add_common(del, true);

    auto* rep = app.add_subcommand("reproduce", "regenerate bundled reference results");
    add_common(rep, false);
    rep->add_option("what", reproduce_what, "table1 | fig4 | fig56")->required();
    rep->add_option("--rows", rows, "table1 rows to run (a1..a4, b1..b4)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(opts, trace_path);
        if (thr->parsed()) return run_threshold(opts, tol, xi_trace_path);
        if (ef->parsed()) return run_errorfloor(opts);
        if (opt->parsed()) return run_optimize(opts, require_feasible);
        if (del->parsed()) return run_delay(opts);
        if (rep->parsed()) {
            if (reproduce_what == "table1") return run_reproduce_table1(opts, rows);
            if (reproduce_what == "fig4") return run_reproduce_fig4(opts);
            if (reproduce_what == "fig56") return run_reproduce_fig56(opts);
            throw std::invalid_argument("reproduce target must be table1, fig4, or fig56");
        }
        return 0;
    } catch (const std::exception& e) {
        logmsg(LogLevel::error, "%s", e.what());
        return 1;
    }
}
