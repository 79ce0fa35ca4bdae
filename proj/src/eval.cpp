#include "darvrp/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace darvrp {

std::vector<EvalRecord> evaluate(const std::vector<SolverSpec>& solvers,
                                 const std::vector<Instance>& instances, const BksRegistry& refs,
                                 int threads) {
    std::vector<EvalRecord> records(solvers.size() * instances.size());
    for (std::size_t s = 0; s < solvers.size(); ++s) {
        parallel_for(instances.size(), threads, [&, s](std::size_t i) {
            const Instance& inst = instances[i];
            EvalRecord rec;
            rec.instance = inst.name();
            rec.solver = solvers[s].id;
            const auto t0 = std::chrono::steady_clock::now();
            Solution sol = solvers[s].solve(inst);
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rec.feasible = check_feasible(inst, sol).ok;
            rec.cost = rec.feasible ? solution_cost(inst, sol) : sol.cost;
            if (rec.feasible) {
                if (auto ref = refs.lookup(inst.name())) rec.gap = gap(rec.cost, *ref);
            }
            records[s * instances.size() + i] = std::move(rec);
        });
    }
    return records;
}

std::vector<DispersionStats> dispersion_profile(const Instance& inst, const ParamStore& params,
                                                const PolicyConfig& cfg, double tau, int steps) {
    require(steps >= 1, "dispersion_profile: steps must be >= 1");
    Graph g(false);
    RolloutOptions opt;
    opt.m = 1;
    opt.force_first = false;  // capture the policy's own first-step decision
    opt.trace_steps = steps;
    auto result = rollout(g, params, cfg, inst, opt);
    return dispersion_from_breakdowns(result.trace, tau);
}

std::vector<DispersionStats> dispersion_from_breakdowns(const std::vector<ScoreBreakdown>& trace,
                                                        double tau) {
    std::vector<DispersionStats> out;
    out.reserve(trace.size());
    for (const auto& bd : trace) {
        DispersionStats st;
        st.step = bd.step;
        st.tau = tau;
        for (double alpha : bd.clipped) {
            if (alpha == -std::numeric_limits<double>::infinity()) continue;  // masked
            st.feasible_count += 1;
            if (alpha > tau) st.above_count += 1;
        }
        st.fraction = st.feasible_count > 0
                          ? static_cast<double>(st.above_count) / st.feasible_count
                          : 0.0;
        out.push_back(st);
    }
    return out;
}

std::vector<AblateRow> ablate_k(const std::vector<Instance>& instances, const ParamStore& params,
                                const PolicyConfig& cfg, const std::vector<int>& k_values,
                                const std::vector<double>& reference_costs, int m, int threads) {
    require(instances.size() == reference_costs.size(),
            "ablate_k: one reference cost per instance required");
    require(!instances.empty(), "ablate_k: empty instance set");
    std::vector<AblateRow> rows;
    rows.reserve(k_values.size());
    for (int k : k_values) {
        PolicyConfig kcfg = cfg;
        kcfg.neighbor_k = k;
        std::vector<double> gaps(instances.size());
        parallel_for(instances.size(), threads, [&](std::size_t i) {
            auto [sol, trace] = greedy_rollout(instances[i], params, kcfg, m);
            gaps[i] = gap(sol.cost, reference_costs[i]);
        });
        AblateRow row;
        row.k = k;
        for (double v : gaps) row.mean_gap += v;
        row.mean_gap /= static_cast<double>(gaps.size());
        rows.push_back(row);
    }
    return rows;
}

namespace {

constexpr int kSchemaVersion = 1;

std::string fmt_num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string records_to_csv(const std::vector<EvalRecord>& records) {
    std::ostringstream os;
    os << "# darvrp-eval schema v" << kSchemaVersion << "\n";
    os << "instance,solver,cost,gap,seconds,feasible\n";
    for (const auto& r : records) {
        os << r.instance << "," << r.solver << "," << fmt_num(r.cost) << ","
           << (r.gap ? fmt_num(*r.gap) : "") << "," << fmt_num(r.seconds) << ","
           << (r.feasible ? "1" : "0") << "\n";
    }
    return os.str();
}

std::string records_to_json(const std::vector<EvalRecord>& records) {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["records"] = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json jr;
        jr["instance"] = r.instance;
        jr["solver"] = r.solver;
        jr["cost"] = r.cost;
        if (r.gap) jr["gap"] = *r.gap;
        jr["seconds"] = r.seconds;
        jr["feasible"] = r.feasible;
        doc["records"].push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

std::vector<EvalRecord> records_from_csv(std::string_view text) {
    std::vector<EvalRecord> records;
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("instance,", 0) == 0) continue;  // header
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < 6) fields.emplace_back();
        EvalRecord r;
        r.instance = fields[0];
        r.solver = fields[1];
        r.cost = std::stod(fields[2]);
        if (!fields[3].empty()) r.gap = std::stod(fields[3]);
        r.seconds = std::stod(fields[4]);
        r.feasible = fields[5] != "0";
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<EvalRecord> records_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("records json: ") + e.what());
    }
    std::vector<EvalRecord> records;
    for (const auto& jr : doc.at("records")) {
        EvalRecord r;
        r.instance = jr.at("instance").get<std::string>();
        r.solver = jr.at("solver").get<std::string>();
        r.cost = jr.at("cost").get<double>();
        if (jr.contains("gap")) r.gap = jr.at("gap").get<double>();
        r.seconds = jr.at("seconds").get<double>();
        r.feasible = jr.value("feasible", true);
        records.push_back(std::move(r));
    }
    return records;
}

void export_records(const std::vector<EvalRecord>& records, const std::string& format,
                    const std::string& path) {
    if (format == "csv")
        write_file(path, records_to_csv(records));
    else if (format == "json")
        write_file(path, records_to_json(records));
    else
        throw DataError("export_records: unknown format '" + format + "' (use csv or json)");
}

}  // namespace darvrp
