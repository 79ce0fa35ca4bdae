#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darvrp/graph.hpp"
#include "darvrp/params.hpp"
#include "darvrp/policy.hpp"
#include "darvrp/vrplib.hpp"

namespace darvrp {

struct TrainConfig {
    // Instance size schedule: fixed when n_low == n_high, else uniform draw
    // per step from [n_low, n_high].
    int n_low = 20;
    int n_high = 20;
    int steps = 2000;
    int base_batch = 120;  // bs = floor(base * (100/N)^1.6), clamped at 1
    AdamConfig adam;
    int m = 0;  // trajectories per instance; 0 -> N
    std::uint64_t seed = 0;
    int early_stop_steps = 0;  // hard cap on steps; 0 disables
    int demand_low = 1;
    int demand_high = 9;
    double capacity = 30.0;
    int checkpoint_every = 0;        // steps between checkpoints; 0 = none
    std::string checkpoint_path;     // written when checkpoint_every > 0
    int threads = 1;
    PolicyConfig policy;
};

/// Parses `key = value` lines (# comments allowed). Unknown keys are errors.
/// Documented keys: n, n_low, n_high, steps, base_batch, lr, beta1, beta2,
/// eps, m, seed, early_stop_steps, demand_low, demand_high, capacity,
/// checkpoint_every, threads, width, heads, layers, ff_dim, k, clip, dar,
/// normalize.
TrainConfig parse_train_config(std::string_view text);

/// Memory-scaled batch size: floor(base * (100/N)^1.6), at least 1.
int batch_size_for(int n, int base);

/// Negative tour length on original coordinates. The solution must be feasible.
double reward(const Instance& inst, const Solution& sol);

/// REINFORCE with the shared multi-trajectory baseline:
///   L = -(1/M) sum_m (R_m - mean(R)) * log_prob_m
/// The baseline is a constant; gradients flow only through the log-probs.
/// log_probs must be an [M,1] node on g.
NodeId reinforce_loss(Graph& g, const std::vector<double>& rewards, NodeId log_probs);

struct TrainReportRow {
    int step = 0;
    double mean_reward = 0.0;
    double baseline = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<TrainReportRow> rows;
    double wall_seconds = 0.0;
};

std::string train_report_csv(const TrainReport& report);

/// Runs the REINFORCE loop on `store` (params must already be initialized to
/// match cfg.policy). Fully seeded: identical config + store -> identical
/// parameters afterwards, independent of cfg.threads.
TrainReport train(const TrainConfig& cfg, ParamStore& store);

/// Meta JSON stored in checkpoints, describing the policy dims and flags.
std::string checkpoint_meta(const PolicyConfig& cfg, std::uint64_t seed);
/// Restores a PolicyConfig from checkpoint meta JSON.
PolicyConfig policy_config_from_meta(const std::string& meta_json);

}  // namespace darvrp
