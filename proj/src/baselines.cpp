#include "darvrp/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace darvrp {

Solution greedy_nearest(const Instance& inst) {
    const int n = inst.n();
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(n) + 1, 0);
    Solution sol;
    std::vector<int> route;
    Coord pos = inst.depot();
    double remaining = inst.capacity();
    double cost = 0.0;
    int served = 0;

    while (served < n) {
        int pick = -1;
        double pick_d = std::numeric_limits<double>::infinity();
        for (int j = 1; j <= n; ++j) {
            if (visited[static_cast<std::size_t>(j)]) continue;
            if (inst.demand(j) > remaining) continue;
            const double d = euclidean_distance(pos, inst.node(j));
            if (d < pick_d) {
                pick_d = d;
                pick = j;
            }
        }
        if (pick < 0) {
            // nothing fits: back to the depot, reset capacity
            cost += euclidean_distance(pos, inst.depot());
            pos = inst.depot();
            remaining = inst.capacity();
            sol.routes.push_back(std::move(route));
            route.clear();
            continue;
        }
        cost += pick_d;
        pos = inst.node(pick);
        visited[static_cast<std::size_t>(pick)] = 1;
        remaining -= inst.demand(pick);
        route.push_back(pick);
        ++served;
    }
    cost += euclidean_distance(pos, inst.depot());
    if (!route.empty()) sol.routes.push_back(std::move(route));
    sol.cost = cost;
    return sol;
}

OracleResult exact_optimum(const Instance& inst, int limit) {
    const int n = inst.n();
    if (n > limit)
        throw DataError("exact_optimum: instance has " + std::to_string(n) +
                        " customers, cap is " + std::to_string(limit));

    const DistanceCache dist(inst);
    const double capacity = inst.capacity();

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);

    // Optimal split of a fixed visit order into capacity-feasible routes:
    // shortest path over split points.
    std::vector<double> dp(static_cast<std::size_t>(n) + 1);
    auto split_cost = [&](const std::vector<int>& p) {
        dp[0] = 0.0;
        for (int i = 1; i <= n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            double load = 0.0, path = 0.0;
            for (int j = i - 1; j >= 0; --j) {
                load += inst.demand(p[static_cast<std::size_t>(j)]);
                if (load > capacity) break;
                if (j < i - 1)
                    path += dist(p[static_cast<std::size_t>(j)], p[static_cast<std::size_t>(j) + 1]);
                const double c = dp[static_cast<std::size_t>(j)] +
                                 dist(0, p[static_cast<std::size_t>(j)]) + path +
                                 dist(p[static_cast<std::size_t>(i) - 1], 0);
                if (c < best) best = c;
            }
            dp[static_cast<std::size_t>(i)] = best;
        }
        return dp[static_cast<std::size_t>(n)];
    };

    OracleResult result;
    result.optimal_cost = std::numeric_limits<double>::infinity();
    std::vector<int> best_perm;
    do {
        ++result.nodes_explored;
        const double c = split_cost(perm);
        if (c < result.optimal_cost) {
            result.optimal_cost = c;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    // Re-run the split DP on the winning permutation with parent tracking.
    std::vector<int> parent(static_cast<std::size_t>(n) + 1, 0);
    dp[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        double load = 0.0, path = 0.0;
        for (int j = i - 1; j >= 0; --j) {
            load += inst.demand(best_perm[static_cast<std::size_t>(j)]);
            if (load > capacity) break;
            if (j < i - 1)
                path += dist(best_perm[static_cast<std::size_t>(j)],
                             best_perm[static_cast<std::size_t>(j) + 1]);
            const double c = dp[static_cast<std::size_t>(j)] +
                             dist(0, best_perm[static_cast<std::size_t>(j)]) + path +
                             dist(best_perm[static_cast<std::size_t>(i) - 1], 0);
            if (c < best) {
                best = c;
                parent[static_cast<std::size_t>(i)] = j;
            }
        }
        dp[static_cast<std::size_t>(i)] = best;
    }
    std::vector<std::pair<int, int>> segments;
    for (int i = n; i > 0; i = parent[static_cast<std::size_t>(i)])
        segments.emplace_back(parent[static_cast<std::size_t>(i)], i);
    std::reverse(segments.begin(), segments.end());
    for (const auto& [b, e] : segments)
        result.optimal_solution.routes.emplace_back(best_perm.begin() + b, best_perm.begin() + e);
    result.optimal_solution.cost = result.optimal_cost;
    return result;
}

double gap(double cost, double reference) {
    require(reference > 0.0, "gap: reference must be positive");
    return (cost - reference) / reference * 100.0;
}

}  // namespace darvrp
