#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "darvrp/graph.hpp"
#include "darvrp/instance.hpp"
#include "darvrp/params.hpp"

namespace darvrp {

struct PolicyConfig {
    int width = 64;
    int heads = 4;
    int layers = 3;
    int ff_dim = 0;  // 0 -> 4 * width
    int neighbor_k = 100;
    double clip = 50.0;
    bool dar_enabled = true;
    bool normalize_inputs = true;

    int ff() const { return ff_dim > 0 ? ff_dim : 4 * width; }
};

/// Creates and seeds all encoder/decoder weights. Linear weights and biases
/// use U(-1/sqrt(fan_in), 1/sqrt(fan_in)); norm affines start at identity.
void init_policy_params(ParamStore& store, const PolicyConfig& cfg, std::uint64_t seed);

/// Coordinates and demand fractions the policy actually operates on. When
/// normalize_inputs is set this is the unit-square view; solution costs are
/// always reported on the original coordinates regardless.
struct PolicyGeometry {
    std::vector<Coord> coords;    // [n+1], index 0 = depot
    std::vector<double> demand;   // [n+1], demand[0] = 0
    double capacity = 0.0;
};

PolicyGeometry policy_geometry(const Instance& inst, const PolicyConfig& cfg);

/// One trajectory's construction state.
struct RolloutState {
    std::vector<std::uint8_t> visited;  // [n+1]; depot entry stays 0
    int current = 0;
    double remaining = 0.0;
    double log_prob_sum = 0.0;
    std::vector<std::vector<int>> routes;
    std::vector<int> open_route;
    int served = 0;

    static RolloutState initial(const Instance& inst);
    bool all_served(int n) const { return served == n; }
    bool done(int n) const { return all_served(n) && current == 0; }
};

/// Feasible actions from a state: depot unless the vehicle is parked there
/// with customers left; unvisited customers whose demand fits the remaining
/// capacity. Once everything is served and the vehicle is home, only the
/// depot self-loop stays open (it carries probability 1 and log-prob 0).
Mask feasible_actions(const RolloutState& state, const PolicyGeometry& geo);

/// Distance scores b: -log(d) for the k nearest nodes to `current` (self
/// excluded, depot competing, ties to the lower index), -d for the rest.
/// Distances are clamped below at `clamp` before the log so coincident
/// nodes stay finite.
std::vector<double> distance_scores(const std::vector<Coord>& coords, int current, int k,
                                    double clamp = 1e-10);
std::vector<double> distance_scores(const Instance& inst, int current, int k);

/// Reshaped scores a + b; with DAR disabled returns a untouched.
std::vector<double> reshape_scores(const std::vector<double>& attention,
                                   const std::vector<double>& distance, bool dar_enabled);

/// clip * tanh on feasible entries, -inf elsewhere.
std::vector<double> clip_and_mask(const std::vector<double>& reshaped, const RolloutState& state,
                                  const PolicyGeometry& geo, double clip);

/// Per-step diagnostic record for one trajectory.
struct ScoreBreakdown {
    int step = 0;
    int current = 0;
    int chosen = -1;
    std::vector<double> attention;        // a
    std::vector<double> distance_scores;  // b (zeros when DAR is off)
    std::vector<double> reshaped;         // a + b
    std::vector<double> clipped;          // C tanh, -inf masked
    std::vector<double> probs;
};

/// Batched decoder over one instance: encodes once, then serves lockstep
/// decode steps for m trajectory states on the supplied graph. The same
/// engine backs training (recording graph) and inference (value-only graph
/// with per-step rollback).
class RolloutEngine {
public:
    RolloutEngine(Graph& g, const ParamStore& params, const PolicyConfig& cfg,
                  const Instance& inst);

    struct StepOut {
        NodeId attn = Graph::kNone;   // [m, n+1] raw compatibilities
        NodeId logp = Graph::kNone;   // [m, n+1] masked log-probabilities
        Tensor probs;                 // [m, n+1]
        Tensor distance;              // [m, n+1] b-scores (empty when DAR off)
        Tensor reshaped;              // [m, n+1]
        Tensor clipped;               // [m, n+1]
        std::vector<Mask> mask;       // singleton, [m, n+1]
    };

    /// Computes one decode step for the given states.
    StepOut step(const std::vector<RolloutState>& states);

    const PolicyGeometry& geometry() const { return geo_; }
    NodeId embeddings() const { return h_; }
    int n() const { return n_; }

    /// Applies an action to a state and returns the travel cost increment on
    /// the original coordinates.
    double apply_action(RolloutState& state, int action) const;

private:
    Graph& g_;
    const ParamStore& params_;
    PolicyConfig cfg_;
    const Instance& inst_;
    PolicyGeometry geo_;
    int n_;
    NodeId h_, mean_, k_glimpse_, v_glimpse_, k_logit_;
    NodeId wq_ctx_, wo_glimpse_;
};

/// Encoder as a standalone operation: per-node embeddings [n+1, width].
Tensor encode(const Instance& inst, const ParamStore& params, const PolicyConfig& cfg);

/// Raw pre-clip compatibilities for one state (Eq. 5 path, glimpse included).
std::vector<double> attention_scores(const Instance& inst, const ParamStore& params,
                                     const PolicyConfig& cfg, const RolloutState& state);

/// Full single-step pipeline: attention -> distance -> reshape -> clip/mask
/// -> softmax.
struct StepPolicyResult {
    std::vector<double> probs;
    ScoreBreakdown breakdown;
};
StepPolicyResult step_policy(const Instance& inst, const ParamStore& params,
                             const PolicyConfig& cfg, const RolloutState& state);

struct RolloutOptions {
    int m = 0;                    // trajectories; 0 -> n (capped at n when forcing starts)
    bool sample = false;          // sample instead of argmax
    std::uint64_t seed = 0;       // sampling seed
    std::uint64_t stream_tag = 0; // distinguishes instances sharing a seed
    bool force_first = true;      // POMO multi-start: trajectory t starts at customer t+1
    int trace_steps = 0;          // capture breakdowns for trajectory 0
};

struct RolloutResult {
    std::vector<Solution> trajectories;
    std::vector<double> costs;            // original coordinates
    std::vector<double> log_prob_sums;
    std::vector<std::vector<int>> actions;  // per trajectory, forced first included
    std::vector<NodeId> log_prob_nodes;   // per-step picked log-prob nodes when recording
    NodeId log_prob_vector = Graph::kNone;
    std::vector<ScoreBreakdown> trace;
    int best = 0;
};

RolloutResult rollout(Graph& g, const ParamStore& params, const PolicyConfig& cfg,
                      const Instance& inst, const RolloutOptions& opt);

/// Multi-start greedy inference; returns the best trajectory and, when
/// trace_steps > 0, trajectory 0's score breakdowns.
std::pair<Solution, std::vector<ScoreBreakdown>> greedy_rollout(const Instance& inst,
                                                                const ParamStore& params,
                                                                const PolicyConfig& cfg, int m,
                                                                int trace_steps = 0);

/// Writes breakdown records as delimited text:
/// step,node,attention,distance_score,reshaped,clipped,prob
std::string breakdown_to_csv(const std::vector<ScoreBreakdown>& trace);
std::vector<ScoreBreakdown> breakdown_from_csv(std::string_view text);

}  // namespace darvrp
