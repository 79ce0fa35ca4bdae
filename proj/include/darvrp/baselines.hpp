#pragma once

#include <cstdint>

#include "darvrp/instance.hpp"

namespace darvrp {

/// Nearest-feasible-neighbor construction: from the current node, visit the
/// closest unvisited customer whose demand still fits; when none fits, return
/// to the depot and reset. Ties go to the lower index. Always feasible.
Solution greedy_nearest(const Instance& inst);

struct OracleResult {
    double optimal_cost = 0.0;
    Solution optimal_solution;
    std::uint64_t nodes_explored = 0;  // customer permutations evaluated
};

/// Exact optimum by exhaustive permutation of customers with an optimal
/// capacity-feasible route split per permutation (every CVRP solution is some
/// permutation with some split). Refuses instances above `limit` customers.
OracleResult exact_optimum(const Instance& inst, int limit = 9);

/// Percentage gap (cost - reference) / reference * 100. reference must be > 0.
double gap(double cost, double reference);

}  // namespace darvrp
