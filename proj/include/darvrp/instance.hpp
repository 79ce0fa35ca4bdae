#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "darvrp/common.hpp"

namespace darvrp {

struct Coord {
    double x = 0.0;
    double y = 0.0;
};

inline double euclidean_distance(Coord a, Coord b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

struct Customer {
    double x = 0.0;
    double y = 0.0;
    double demand = 0.0;
};

/// A CVRP instance. Node 0 is the depot; customers are nodes 1..n.
class Instance {
public:
    Instance() = default;
    Instance(std::string name, Coord depot, std::vector<Customer> customers, double capacity,
             std::optional<double> bks = std::nullopt)
        : name_(std::move(name)), depot_(depot), customers_(std::move(customers)),
          capacity_(capacity), bks_(bks) {
        validate();
    }

    const std::string& name() const { return name_; }
    Coord depot() const { return depot_; }
    const std::vector<Customer>& customers() const { return customers_; }
    double capacity() const { return capacity_; }
    std::optional<double> bks() const { return bks_; }
    void set_bks(double v) { bks_ = v; }

    int n() const { return static_cast<int>(customers_.size()); }
    int node_count() const { return n() + 1; }

    Coord node(int i) const {
        check_index(i);
        if (i == 0) return depot_;
        return {customers_[static_cast<std::size_t>(i) - 1].x,
                customers_[static_cast<std::size_t>(i) - 1].y};
    }

    double demand(int i) const {
        check_index(i);
        return i == 0 ? 0.0 : customers_[static_cast<std::size_t>(i) - 1].demand;
    }

private:
    void validate() const {
        if (customers_.empty()) throw DataError("instance '" + name_ + "': no customers");
        if (!(capacity_ > 0.0)) throw DataError("instance '" + name_ + "': capacity must be positive");
        for (std::size_t i = 0; i < customers_.size(); ++i) {
            const double c = customers_[i].demand;
            if (!(c > 0.0) || c > capacity_)
                throw DataError("instance '" + name_ + "': customer " + std::to_string(i + 1) +
                                " demand " + std::to_string(c) + " outside (0, Q=" +
                                std::to_string(capacity_) + "]");
            if (!std::isfinite(customers_[i].x) || !std::isfinite(customers_[i].y))
                throw DataError("instance '" + name_ + "': non-finite coordinate at customer " +
                                std::to_string(i + 1));
        }
        if (!std::isfinite(depot_.x) || !std::isfinite(depot_.y))
            throw DataError("instance '" + name_ + "': non-finite depot coordinate");
    }

    void check_index(int i) const {
        if (i < 0 || i > n())
            throw ContractViolation("node index " + std::to_string(i) + " out of range [0, " +
                                    std::to_string(n()) + "]");
    }

    std::string name_;
    Coord depot_;
    std::vector<Customer> customers_;
    double capacity_ = 0.0;
    std::optional<double> bks_;
};

/// Routes partition customers 1..n; the depot is implied at both route ends.
struct Solution {
    std::vector<std::vector<int>> routes;
    double cost = 0.0;
};

/// Row i of the distance matrix, entries for nodes 0..n.
std::vector<double> distance_row(const Instance& inst, int i);

/// Total route length per the CVRP objective: every route is depot -> ... -> depot.
double solution_cost(const Instance& inst, const Solution& sol);

struct FeasibilityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Collects every violation (duplicates, missing customers, bad indices,
/// per-route capacity overruns). Violations are data, not exceptions.
FeasibilityReport check_feasible(const Instance& inst, const Solution& sol);

/// Similarity map of all nodes into the unit square: coords01 = (p - offset) / scale
/// with a single scale = max(x extent, y extent), so distance ratios are preserved.
struct NormalizedView {
    double scale = 1.0;
    Coord offset;
    std::vector<Coord> coords01;  // index 0 = depot
};

NormalizedView normalize_to_unit_square(const Instance& inst);

/// Distance lookup that materializes the full (n+1)^2 matrix only while
/// node_count <= cap; above that, entries are recomputed on demand so
/// Set-XXL-sized instances stay within memory.
class DistanceCache {
public:
    explicit DistanceCache(std::vector<Coord> nodes, std::size_t cap = 2000);
    explicit DistanceCache(const Instance& inst, std::size_t cap = 2000);

    double operator()(int i, int j) const {
        if (!matrix_.empty()) return matrix_[static_cast<std::size_t>(i) * nodes_.size() + j];
        return euclidean_distance(nodes_[i], nodes_[j]);
    }

    /// Writes distances from node i to all nodes into out (resized to node count).
    void row(int i, std::vector<double>& out) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Coord>& nodes() const { return nodes_; }

private:
    std::vector<Coord> nodes_;
    std::vector<double> matrix_;  // empty when above cap
};

}  // namespace darvrp
