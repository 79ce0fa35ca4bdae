#include "darvrp/instance.hpp"

#include <algorithm>
#include <sstream>

namespace darvrp {

std::vector<double> distance_row(const Instance& inst, int i) {
    if (i < 0 || i > inst.n())
        throw ContractViolation("distance_row: node index " + std::to_string(i) + " out of range");
    const Coord from = inst.node(i);
    std::vector<double> row(static_cast<std::size_t>(inst.node_count()));
    row[static_cast<std::size_t>(i)] = 0.0;
    for (int j = 0; j <= inst.n(); ++j) {
        if (j == i) continue;
        row[static_cast<std::size_t>(j)] = euclidean_distance(from, inst.node(j));
    }
    return row;
}

double solution_cost(const Instance& inst, const Solution& sol) {
    double total = 0.0;
    for (const auto& route : sol.routes) {
        if (route.empty()) continue;
        Coord prev = inst.depot();
        for (int idx : route) {
            if (idx < 1 || idx > inst.n())
                throw ContractViolation("solution_cost: customer index " + std::to_string(idx) +
                                        " out of range [1, " + std::to_string(inst.n()) + "]");
            const Coord cur = inst.node(idx);
            total += euclidean_distance(prev, cur);
            prev = cur;
        }
        total += euclidean_distance(prev, inst.depot());
    }
    return total;
}

FeasibilityReport check_feasible(const Instance& inst, const Solution& sol) {
    FeasibilityReport report;
    std::vector<int> seen(static_cast<std::size_t>(inst.n()) + 1, 0);
    for (std::size_t r = 0; r < sol.routes.size(); ++r) {
        double load = 0.0;
        for (int idx : sol.routes[r]) {
            if (idx < 1 || idx > inst.n()) {
                report.violations.push_back("invalid index: " + std::to_string(idx) + " in route " +
                                            std::to_string(r));
                continue;
            }
            seen[static_cast<std::size_t>(idx)] += 1;
            load += inst.demand(idx);
        }
        if (load > inst.capacity()) {
            std::ostringstream msg;
            msg << "capacity: route " << r << " exceeds by " << (load - inst.capacity());
            report.violations.push_back(msg.str());
        }
    }
    for (int i = 1; i <= inst.n(); ++i) {
        if (seen[static_cast<std::size_t>(i)] == 0)
            report.violations.push_back("missing: " + std::to_string(i));
        else if (seen[static_cast<std::size_t>(i)] > 1)
            report.violations.push_back("duplicate: " + std::to_string(i));
    }
    report.ok = report.violations.empty();
    return report;
}

NormalizedView normalize_to_unit_square(const Instance& inst) {
    double min_x = inst.depot().x, max_x = inst.depot().x;
    double min_y = inst.depot().y, max_y = inst.depot().y;
    for (const auto& c : inst.customers()) {
        min_x = std::min(min_x, c.x);
        max_x = std::max(max_x, c.x);
        min_y = std::min(min_y, c.y);
        max_y = std::max(max_y, c.y);
    }
    const double scale = std::max(max_x - min_x, max_y - min_y);
    if (!(scale > 0.0))
        throw DataError("normalize_to_unit_square: degenerate geometry, all nodes coincident");
    NormalizedView view;
    view.scale = scale;
    view.offset = {min_x, min_y};
    view.coords01.resize(static_cast<std::size_t>(inst.node_count()));
    for (int i = 0; i <= inst.n(); ++i) {
        const Coord p = inst.node(i);
        view.coords01[static_cast<std::size_t>(i)] = {(p.x - min_x) / scale, (p.y - min_y) / scale};
    }
    return view;
}

DistanceCache::DistanceCache(std::vector<Coord> nodes, std::size_t cap) : nodes_(std::move(nodes)) {
    const std::size_t count = nodes_.size();
    if (count == 0) throw ContractViolation("DistanceCache: empty node list");
    if (count <= cap) {
        matrix_.assign(count * count, 0.0);
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t j = i + 1; j < count; ++j) {
                const double d = euclidean_distance(nodes_[i], nodes_[j]);
                matrix_[i * count + j] = d;
                matrix_[j * count + i] = d;
            }
    }
}

DistanceCache::DistanceCache(const Instance& inst, std::size_t cap)
    : DistanceCache(
          [&] {
              std::vector<Coord> nodes(static_cast<std::size_t>(inst.node_count()));
              for (int i = 0; i <= inst.n(); ++i) nodes[static_cast<std::size_t>(i)] = inst.node(i);
              return nodes;
          }(),
          cap) {}

void DistanceCache::row(int i, std::vector<double>& out) const {
    const std::size_t count = nodes_.size();
    out.resize(count);
    if (!matrix_.empty()) {
        std::copy_n(matrix_.begin() + static_cast<std::ptrdiff_t>(i * count), count, out.begin());
        return;
    }
    for (std::size_t j = 0; j < count; ++j)
        out[j] = euclidean_distance(nodes_[static_cast<std::size_t>(i)], nodes_[j]);
    out[static_cast<std::size_t>(i)] = 0.0;
}

}  // namespace darvrp
