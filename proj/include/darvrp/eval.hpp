#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "darvrp/baselines.hpp"
#include "darvrp/policy.hpp"
#include "darvrp/vrplib.hpp"

namespace darvrp {

struct EvalRecord {
    std::string instance;
    std::string solver;
    double cost = 0.0;
    std::optional<double> gap;  // present only when a reference exists
    double seconds = 0.0;
    bool feasible = true;
};

struct SolverSpec {
    std::string id;
    std::function<Solution(const Instance&)> solve;
};

/// Greedy-inference benchmark loop: per (solver, instance) one record, every
/// returned solution re-validated; infeasible output becomes a failure row and
/// the run continues. Timing covers solve() only. Instances may be evaluated
/// concurrently; records keep input order.
std::vector<EvalRecord> evaluate(const std::vector<SolverSpec>& solvers,
                                 const std::vector<Instance>& instances, const BksRegistry& refs,
                                 int threads = 1);

struct DispersionStats {
    int step = 0;
    int feasible_count = 0;
    int above_count = 0;  // clipped scores > tau among feasible candidates
    double fraction = 0.0;
    double tau = -1.0;
};

/// Runs a free (unforced, single-trajectory) greedy rollout and, for the first
/// `steps` decisions, counts feasible candidates whose clipped score exceeds
/// tau.
std::vector<DispersionStats> dispersion_profile(const Instance& inst, const ParamStore& params,
                                                const PolicyConfig& cfg, double tau,
                                                int steps = 1);

/// Brute-force recount over exported breakdown records; the oracle the
/// profile is checked against.
std::vector<DispersionStats> dispersion_from_breakdowns(const std::vector<ScoreBreakdown>& trace,
                                                        double tau);

struct AblateRow {
    int k = 0;
    double mean_gap = 0.0;
};

/// Re-evaluates the policy with each K (inference-time only, no retraining)
/// against the given per-instance reference costs.
std::vector<AblateRow> ablate_k(const std::vector<Instance>& instances, const ParamStore& params,
                                const PolicyConfig& cfg, const std::vector<int>& k_values,
                                const std::vector<double>& reference_costs, int m, int threads = 1);

/// CSV/JSON export with fixed column order and an embedded schema version;
/// both formats carry identical values and re-parse losslessly.
std::string records_to_csv(const std::vector<EvalRecord>& records);
std::string records_to_json(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> records_from_csv(std::string_view text);
std::vector<EvalRecord> records_from_json(std::string_view text);

/// format is "csv" or "json".
void export_records(const std::vector<EvalRecord>& records, const std::string& format,
                    const std::string& path);

}  // namespace darvrp
