#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csa/degree_distribution.hpp"

namespace csa {

enum class ClassAssignment { stochastic, fixed_fraction };

std::string to_string(ClassAssignment a);
ClassAssignment class_assignment_from_string(const std::string& s);

struct ClassSpec {
    double alpha;  // probability that a user belongs to this class
    DegreeDistribution dist;
    std::optional<double> target_plr;

    ClassSpec(double alpha_, DegreeDistribution dist_,
              std::optional<double> target = std::nullopt);
};

// alpha-weighted mixture of the class distributions. Alphas must sum to 1.
DegreeDistribution average_distribution(const std::vector<ClassSpec>& classes);

struct ScenarioConfig {
    int n;         // slots per frame
    double g;      // requested channel load, users per slot
    std::vector<ClassSpec> classes;
    ClassAssignment assignment = ClassAssignment::stochastic;
    std::uint64_t seed = 0;

    ScenarioConfig(int n_, double g_, std::vector<ClassSpec> classes_,
                   ClassAssignment assignment_ = ClassAssignment::stochastic,
                   std::uint64_t seed_ = 0);

    // round(g*n), ties away from zero
    int user_count() const { return m_; }
    double realized_load() const { return static_cast<double>(m_) / n; }

    std::string to_json() const;
    static ScenarioConfig from_json(const std::string& text);

private:
    int m_;
};

}  // namespace csa
