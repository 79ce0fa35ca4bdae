#include "darvrp/vrplib.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace darvrp {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& s, long& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

[[noreturn]] void fail(const std::string& msg, std::size_t line_no) {
    throw ParseError(msg + " (line " + std::to_string(line_no) + ")");
}

std::string fmt_g(double v, int precision = 17) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

struct NodeEntry {
    long id;
    double x, y;
};

}  // namespace

Instance parse_instance(std::string_view text) {
    std::map<std::string, std::string> header;
    std::vector<NodeEntry> coords;
    std::vector<std::pair<long, double>> demands;
    std::vector<long> depot_ids;
    std::size_t coord_line = 0, demand_line = 0, depot_line = 0;

    std::istringstream is{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    enum class Section { None, Coords, Demands, Depots, Done };
    Section section = Section::None;

    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line == "EOF") break;

        if (line == "NODE_COORD_SECTION") {
            section = Section::Coords;
            coord_line = line_no;
        } else if (line == "DEMAND_SECTION") {
            section = Section::Demands;
            demand_line = line_no;
        } else if (line == "DEPOT_SECTION") {
            section = Section::Depots;
            depot_line = line_no;
        } else if (line.find(':') != std::string::npos) {
            // Header lines may appear before, between, or after sections.
            const auto pos = line.find(':');
            header[trim(line.substr(0, pos))] = trim(line.substr(pos + 1));
            section = Section::None;
        } else if (section == Section::Coords) {
            auto toks = split_ws(line);
            NodeEntry e;
            if (toks.size() != 3 || !parse_int(toks[0], e.id) || !parse_double(toks[1], e.x) ||
                !parse_double(toks[2], e.y))
                fail("NODE_COORD_SECTION: malformed entry '" + line + "'", line_no);
            coords.push_back(e);
        } else if (section == Section::Demands) {
            auto toks = split_ws(line);
            long id;
            double d;
            if (toks.size() != 2 || !parse_int(toks[0], id) || !parse_double(toks[1], d))
                fail("DEMAND_SECTION: malformed entry '" + line + "'", line_no);
            demands.emplace_back(id, d);
        } else if (section == Section::Depots) {
            for (const auto& t : split_ws(line)) {
                long id;
                if (!parse_int(t, id))
                    fail("DEPOT_SECTION: malformed entry '" + t + "'", line_no);
                if (id == -1) {
                    section = Section::Done;
                    break;
                }
                depot_ids.push_back(id);
            }
        } else {
            fail("unrecognized line '" + line + "'", line_no);
        }
    }

    (void)coord_line;
    if (auto it = header.find("TYPE"); it != header.end() && it->second != "CVRP")
        throw UnsupportedFormat("TYPE '" + header["TYPE"] + "' not supported, expected CVRP");
    if (auto it = header.find("EDGE_WEIGHT_TYPE"); it != header.end() && it->second != "EUC_2D")
        throw UnsupportedFormat("EDGE_WEIGHT_TYPE '" + header["EDGE_WEIGHT_TYPE"] +
                                "' not supported, expected EUC_2D");

    auto dim_it = header.find("DIMENSION");
    if (dim_it == header.end()) throw ParseError("DIMENSION absent");
    long dimension;
    if (!parse_int(dim_it->second, dimension) || dimension < 2)
        throw ParseError("DIMENSION '" + dim_it->second + "' is not an integer >= 2");

    auto cap_it = header.find("CAPACITY");
    if (cap_it == header.end()) throw ParseError("CAPACITY absent");
    double capacity;
    if (!parse_double(cap_it->second, capacity) || !(capacity > 0))
        throw ParseError("CAPACITY '" + cap_it->second + "' is not a positive number");

    if (coords.empty()) throw ParseError("NODE_COORD_SECTION absent");
    if (demands.empty()) throw ParseError("DEMAND_SECTION absent");
    if (depot_ids.empty()) throw ParseError("DEPOT_SECTION absent");

    if (static_cast<long>(coords.size()) != dimension)
        fail("DIMENSION is " + std::to_string(dimension) + " but NODE_COORD_SECTION has " +
                 std::to_string(coords.size()) + " entries",
             coord_line);
    if (static_cast<long>(demands.size()) != dimension)
        fail("DIMENSION is " + std::to_string(dimension) + " but DEMAND_SECTION has " +
                 std::to_string(demands.size()) + " entries",
             demand_line);
    if (depot_ids.size() != 1)
        fail("DEPOT_SECTION must list exactly one depot, got " + std::to_string(depot_ids.size()),
             depot_line);

    std::map<long, double> demand_by_id;
    for (const auto& [id, d] : demands) {
        if (!demand_by_id.emplace(id, d).second)
            fail("DEMAND_SECTION: duplicate id " + std::to_string(id), demand_line);
    }

    const long depot_id = depot_ids[0];
    std::optional<Coord> depot;
    std::vector<Customer> customers;
    customers.reserve(coords.size() - 1);
    std::set<long> seen_ids;
    for (const auto& e : coords) {
        if (!seen_ids.insert(e.id).second)
            fail("NODE_COORD_SECTION: duplicate id " + std::to_string(e.id), coord_line);
        auto dit = demand_by_id.find(e.id);
        if (dit == demand_by_id.end())
            fail("node " + std::to_string(e.id) + " has coordinates but no demand", demand_line);
        if (e.id == depot_id) {
            if (dit->second != 0.0)
                fail("depot " + std::to_string(e.id) + " has nonzero demand", depot_line);
            depot = Coord{e.x, e.y};
        } else {
            customers.push_back({e.x, e.y, dit->second});
        }
    }
    if (!depot)
        fail("depot id " + std::to_string(depot_id) + " has no coordinate entry", depot_line);

    std::string name = header.count("NAME") ? header["NAME"] : "unnamed";
    try {
        return Instance(name, *depot, std::move(customers), capacity);
    } catch (const DataError& e) {
        throw ParseError(e.what());
    }
}

Instance load_instance(const std::string& path) {
    try {
        return parse_instance(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string emit_instance(const Instance& inst) {
    std::ostringstream os;
    os << "NAME : " << inst.name() << "\n";
    os << "TYPE : CVRP\n";
    os << "DIMENSION : " << inst.node_count() << "\n";
    os << "EDGE_WEIGHT_TYPE : EUC_2D\n";
    os << "CAPACITY : " << fmt_g(inst.capacity()) << "\n";
    os << "NODE_COORD_SECTION\n";
    for (int i = 0; i <= inst.n(); ++i) {
        const Coord p = inst.node(i);
        os << (i + 1) << " " << fmt_g(p.x) << " " << fmt_g(p.y) << "\n";
    }
    os << "DEMAND_SECTION\n";
    for (int i = 0; i <= inst.n(); ++i) os << (i + 1) << " " << fmt_g(inst.demand(i)) << "\n";
    os << "DEPOT_SECTION\n1\n-1\nEOF\n";
    return os.str();
}

std::string emit_solution(const Solution& sol, double cost) {
    std::set<int> seen;
    for (const auto& route : sol.routes) {
        if (route.empty()) throw DataError("emit_solution: refusing empty route");
        for (int idx : route) {
            if (idx < 1) throw DataError("emit_solution: invalid customer index " + std::to_string(idx));
            if (!seen.insert(idx).second)
                throw DataError("emit_solution: customer " + std::to_string(idx) +
                                " appears more than once");
        }
    }
    std::ostringstream os;
    for (std::size_t r = 0; r < sol.routes.size(); ++r) {
        os << "Route #" << (r + 1) << ":";
        for (int idx : sol.routes[r]) os << " " << idx;
        os << "\n";
    }
    os << "Cost " << fmt_g(cost, 12) << "\n";
    return os.str();
}

Solution parse_solution(std::string_view text) {
    Solution sol;
    std::istringstream is{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("Route", 0) == 0) {
            auto colon = line.find(':');
            if (colon == std::string::npos) fail("route line missing ':'", line_no);
            std::vector<int> route;
            for (const auto& tok : split_ws(line.substr(colon + 1))) {
                long idx;
                if (!parse_int(tok, idx) || idx < 1)
                    fail("route entry '" + tok + "' is not a positive integer", line_no);
                route.push_back(static_cast<int>(idx));
            }
            sol.routes.push_back(std::move(route));
        } else if (line.rfind("Cost", 0) == 0) {
            auto toks = split_ws(line);
            if (toks.size() != 2 || !parse_double(toks[1], sol.cost))
                fail("malformed Cost line '" + line + "'", line_no);
        } else {
            fail("unrecognized solution line '" + line + "'", line_no);
        }
    }
    return sol;
}

Instance generate_instance(const GenSpec& spec) {
    if (spec.n < 1) throw DataError("generate_instance: n must be >= 1");
    if (spec.demand_low < 1 || spec.demand_low > spec.demand_high)
        throw DataError("generate_instance: need 1 <= demand_low <= demand_high");
    if (static_cast<double>(spec.demand_high) > spec.capacity)
        throw DataError("generate_instance: demand_high " + std::to_string(spec.demand_high) +
                        " exceeds capacity " + fmt_g(spec.capacity));
    Rng rng(spec.seed);
    const Coord depot{rng.uniform01(), rng.uniform01()};
    std::vector<Customer> customers(static_cast<std::size_t>(spec.n));
    for (auto& c : customers) {
        c.x = rng.uniform01();
        c.y = rng.uniform01();
        c.demand = static_cast<double>(rng.uniform_int(spec.demand_low, spec.demand_high));
    }
    std::string name = spec.name.empty()
                           ? "rnd" + std::to_string(spec.n) + "-s" + std::to_string(spec.seed)
                           : spec.name;
    return Instance(std::move(name), depot, std::move(customers), spec.capacity);
}

BksRegistry BksRegistry::from_text(std::string_view text) {
    BksRegistry reg;
    std::istringstream is{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        auto toks = split_ws(line);
        double cost;
        if (toks.size() != 2 || !parse_double(toks[1], cost))
            fail("registry line must be '<name> <cost>', got '" + line + "'", line_no);
        if (!(cost > 0)) fail("registry cost for '" + toks[0] + "' must be positive", line_no);
        reg.insert(toks[0], cost);
    }
    return reg;
}

BksRegistry BksRegistry::from_file(const std::string& path) {
    try {
        return from_text(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void BksRegistry::insert(const std::string& name, double cost) {
    if (!(cost > 0)) throw DataError("BksRegistry: cost for '" + name + "' must be positive");
    costs_[name] = cost;
}

std::optional<double> BksRegistry::lookup(const std::string& name) const {
    auto it = costs_.find(name);
    if (it == costs_.end()) return std::nullopt;
    return it->second;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + path + "'");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw DataError("write failed for '" + path + "'");
}

}  // namespace darvrp
