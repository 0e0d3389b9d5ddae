#include "csa/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace csa {

std::string to_string(ClassAssignment a) {
    return a == ClassAssignment::stochastic ? "stochastic" : "fixed_fraction";
}

ClassAssignment class_assignment_from_string(const std::string& s) {
    if (s == "stochastic") return ClassAssignment::stochastic;
    if (s == "fixed_fraction") return ClassAssignment::fixed_fraction;
    throw std::invalid_argument("class_assignment must be \"stochastic\" or \"fixed_fraction\", got \"" + s + "\"");
}

ClassSpec::ClassSpec(double alpha_, DegreeDistribution dist_, std::optional<double> target)
    : alpha(alpha_), dist(std::move(dist_)), target_plr(target) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("ClassSpec: alpha must be in (0, 1]");
    }
    if (target_plr && !(*target_plr > 0.0 && *target_plr < 1.0)) {
        throw std::invalid_argument("ClassSpec: target_plr must be in (0, 1)");
    }
}

DegreeDistribution average_distribution(const std::vector<ClassSpec>& classes) {
    if (classes.empty()) throw std::invalid_argument("average_distribution: no classes");
    double alpha_sum = 0.0;
    int d = 1;
    for (const auto& c : classes) {
        alpha_sum += c.alpha;
        d = std::max(d, c.dist.max_degree());
    }
    if (std::abs(alpha_sum - 1.0) > DegreeDistribution::kNormalizationTol) {
        throw std::invalid_argument("average_distribution: class alphas sum to " +
                                    std::to_string(alpha_sum) + ", expected 1");
    }
    std::vector<double> mix(static_cast<std::size_t>(d), 0.0);
    for (const auto& c : classes) {
        for (int l = 1; l <= c.dist.max_degree(); ++l) {
            mix[static_cast<std::size_t>(l - 1)] += c.alpha * c.dist.prob(l);
        }
    }
    // Mixing can leave the sum a few ulp off 1; nudge the largest entry so the
    // result passes the constructor's 1e-12 gate without masking real errors.
    double sum = 0.0;
    for (double p : mix) sum += p;
    if (std::abs(sum - 1.0) <= 16 * DegreeDistribution::kNormalizationTol) {
        std::size_t imax = 0;
        for (std::size_t i = 1; i < mix.size(); ++i) {
            if (mix[i] > mix[imax]) imax = i;
        }
        mix[imax] += 1.0 - sum;
    }
    return DegreeDistribution(std::move(mix));
}

ScenarioConfig::ScenarioConfig(int n_, double g_, std::vector<ClassSpec> classes_,
                               ClassAssignment assignment_, std::uint64_t seed_)
    : n(n_), g(g_), classes(std::move(classes_)), assignment(assignment_), seed(seed_) {
    if (n < 1) throw std::invalid_argument("ScenarioConfig: n must be >= 1");
    if (!(g > 0.0)) throw std::invalid_argument("ScenarioConfig: g must be > 0");
    if (classes.empty()) throw std::invalid_argument("ScenarioConfig: at least one class required");
    double alpha_sum = 0.0;
    for (const auto& c : classes) {
        alpha_sum += c.alpha;
        if (c.dist.max_degree() > n) {
            throw std::invalid_argument("ScenarioConfig: class max degree " +
                                        std::to_string(c.dist.max_degree()) +
                                        " exceeds frame length " + std::to_string(n));
        }
    }
    if (std::abs(alpha_sum - 1.0) > DegreeDistribution::kNormalizationTol) {
        throw std::invalid_argument("ScenarioConfig: class alphas sum to " +
                                    std::to_string(alpha_sum) + ", expected 1 within 1e-12");
    }
    m_ = static_cast<int>(std::llround(g * n));
    if (m_ < 1) {
        throw std::invalid_argument("ScenarioConfig: derived user count round(g*n) must be >= 1");
    }
}

namespace {

nlohmann::json dist_to_json(const DegreeDistribution& dist) {
    nlohmann::json j = nlohmann::json::object();
    for (int l = 1; l <= dist.max_degree(); ++l) {
        if (dist.prob(l) > 0.0) j[std::to_string(l)] = dist.prob(l);
    }
    return j;
}

DegreeDistribution dist_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("dist must be an object of degree -> probability");
    std::map<int, double> probs;
    for (const auto& [key, value] : j.items()) {
        std::size_t pos = 0;
        int l = std::stoi(key, &pos);
        if (pos != key.size()) throw std::invalid_argument("dist key \"" + key + "\" is not a degree");
        probs[l] = value.get<double>();
    }
    return DegreeDistribution::from_map(probs);
}

}  // namespace

std::string ScenarioConfig::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["g"] = g;
    j["seed"] = seed;
    j["class_assignment"] = to_string(assignment);
    j["classes"] = nlohmann::json::array();
    for (const auto& c : classes) {
        nlohmann::json jc;
        jc["alpha"] = c.alpha;
        if (c.target_plr) jc["target_plr"] = *c.target_plr;
        jc["dist"] = dist_to_json(c.dist);
        j["classes"].push_back(jc);
    }
    return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<ClassSpec> classes;
    if (!j.contains("classes") || !j["classes"].is_array() || j["classes"].empty()) {
        throw std::invalid_argument("scenario: \"classes\" must be a non-empty array");
    }
    for (const auto& jc : j["classes"]) {
        std::optional<double> target;
        if (jc.contains("target_plr") && !jc["target_plr"].is_null()) {
            target = jc["target_plr"].get<double>();
        }
        classes.emplace_back(jc.at("alpha").get<double>(), dist_from_json(jc.at("dist")), target);
    }
    ClassAssignment assignment = ClassAssignment::stochastic;
    if (j.contains("class_assignment")) {
        assignment = class_assignment_from_string(j["class_assignment"].get<std::string>());
    }
    return ScenarioConfig(j.at("n").get<int>(), j.at("g").get<double>(), std::move(classes),
                          assignment, j.value("seed", std::uint64_t{0}));
}

}  // namespace csa
