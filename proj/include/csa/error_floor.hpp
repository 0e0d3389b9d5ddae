#pragma once

#include <cstddef>
#include <vector>

#include "csa/scenario.hpp"
#include "csa/stopping_set.hpp"

namespace csa {

struct ErrorFloorOptions {
    bool minimal_only = false;  // restrict the sum to minimal stopping sets
};

// Error-floor approximation of the probability that a degree-l user is left
// unresolved, summed over the catalog. Evaluated in log-space; sets touching
// degrees with zero mass in `avg` contribute nothing and are skipped.
double plr_degree(const StoppingSetCatalog& catalog, const DegreeDistribution& avg, int n,
                  int m, int l, const ErrorFloorOptions& options = {});

// Class-k PLR prediction: mixes plr_degree over the class's own degree
// distribution while the per-degree terms use the average distribution.
double plr_class(const StoppingSetCatalog& catalog, const std::vector<ClassSpec>& classes,
                 int n, int m, std::size_t k, const ErrorFloorOptions& options = {});

}  // namespace csa
