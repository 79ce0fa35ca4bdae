#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "darvrp/instance.hpp"

namespace darvrp {

/// Parses a CVRPLib EUC_2D instance. The depot becomes node 0 and customers
/// are renumbered 1..n preserving file order. Header lines accept both
/// `KEY : value` and `KEY: value`; unknown keys (COMMENT, ...) are ignored.
Instance parse_instance(std::string_view text);

Instance load_instance(const std::string& path);

/// Writes the instance back out in the same VRPLIB dialect parse_instance
/// reads. Coordinates use round-trip precision.
std::string emit_instance(const Instance& inst);

/// CVRPLib .sol convention: one `Route #k: i1 i2 ...` line per route and a
/// final `Cost <value>` line. Refuses structurally broken solutions (empty
/// routes, duplicate or non-positive indices).
std::string emit_solution(const Solution& sol, double cost);

/// Inverse of emit_solution; also accepts files without a Cost line.
Solution parse_solution(std::string_view text);

struct GenSpec {
    int n = 0;
    int demand_low = 1;
    int demand_high = 9;
    double capacity = 30.0;
    std::uint64_t seed = 0;
    std::string name;  // defaults to "rnd<n>-s<seed>"
};

/// Uniform instance sampler: depot and customers i.i.d. on [0,1]^2, integer
/// demands uniform in [demand_low, demand_high]. Identical spec -> identical
/// instance, bit for bit.
Instance generate_instance(const GenSpec& spec);

/// Name -> best-known cost table, loaded from `<name> <cost>` lines
/// (# comments allowed). Absent names stay absent; nothing is fabricated.
class BksRegistry {
public:
    BksRegistry() = default;

    static BksRegistry from_text(std::string_view text);
    static BksRegistry from_file(const std::string& path);

    void insert(const std::string& name, double cost);
    std::optional<double> lookup(const std::string& name) const;
    std::size_t size() const { return costs_.size(); }

private:
    std::map<std::string, double> costs_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace darvrp
