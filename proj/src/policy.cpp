#include "darvrp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace darvrp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string layer_name(int layer, const char* tail) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "enc%02d.%s", layer, tail);
    return buf;
}

void init_uniform(ParamStore& store, Rng& rng, const std::string& name, std::size_t rows,
                  std::size_t cols, double bound) {
    Tensor& t = store.create(name, rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
}

void init_const(ParamStore& store, const std::string& name, std::size_t rows, std::size_t cols,
                double v) {
    Tensor& t = store.create(name, rows, cols);
    t.fill(v);
}

}  // namespace

void init_policy_params(ParamStore& store, const PolicyConfig& cfg, std::uint64_t seed) {
    require(store.size() == 0, "init_policy_params: store must be empty");
    require(cfg.width >= cfg.heads && cfg.width % cfg.heads == 0,
            "init_policy_params: width must be a positive multiple of heads");
    const auto d = static_cast<std::size_t>(cfg.width);
    const auto ff = static_cast<std::size_t>(cfg.ff());
    Rng rng(derive_seed(seed, 0x706172616d73ULL));  // "params"

    const double lift2 = 1.0 / std::sqrt(2.0);
    const double lift3 = 1.0 / std::sqrt(3.0);
    const double bd = 1.0 / std::sqrt(static_cast<double>(d));
    const double bff = 1.0 / std::sqrt(static_cast<double>(ff));
    const double bctx = 1.0 / std::sqrt(static_cast<double>(2 * d + 1));

    init_uniform(store, rng, "embed.depot.w", 2, d, lift2);
    init_uniform(store, rng, "embed.depot.b", 1, d, lift2);
    init_uniform(store, rng, "embed.cust.w", 3, d, lift3);
    init_uniform(store, rng, "embed.cust.b", 1, d, lift3);
    for (int l = 0; l < cfg.layers; ++l) {
        init_uniform(store, rng, layer_name(l, "attn.wq"), d, d, bd);
        init_uniform(store, rng, layer_name(l, "attn.wk"), d, d, bd);
        init_uniform(store, rng, layer_name(l, "attn.wv"), d, d, bd);
        init_uniform(store, rng, layer_name(l, "attn.wo"), d, d, bd);
        init_const(store, layer_name(l, "norm1.g"), 1, d, 1.0);
        init_const(store, layer_name(l, "norm1.b"), 1, d, 0.0);
        init_uniform(store, rng, layer_name(l, "ff.w1"), d, ff, bd);
        init_uniform(store, rng, layer_name(l, "ff.b1"), 1, ff, bd);
        init_uniform(store, rng, layer_name(l, "ff.w2"), ff, d, bff);
        init_uniform(store, rng, layer_name(l, "ff.b2"), 1, d, bff);
        init_const(store, layer_name(l, "norm2.g"), 1, d, 1.0);
        init_const(store, layer_name(l, "norm2.b"), 1, d, 0.0);
    }
    init_uniform(store, rng, "dec.ctx.wq", 2 * d + 1, d, bctx);
    init_uniform(store, rng, "dec.glimpse.wk", d, d, bd);
    init_uniform(store, rng, "dec.glimpse.wv", d, d, bd);
    init_uniform(store, rng, "dec.glimpse.wo", d, d, bd);
    init_uniform(store, rng, "dec.logit.wk", d, d, bd);
}

PolicyGeometry policy_geometry(const Instance& inst, const PolicyConfig& cfg) {
    PolicyGeometry geo;
    geo.capacity = inst.capacity();
    geo.demand.resize(static_cast<std::size_t>(inst.node_count()));
    for (int i = 0; i <= inst.n(); ++i) geo.demand[static_cast<std::size_t>(i)] = inst.demand(i);
    if (cfg.normalize_inputs) {
        geo.coords = normalize_to_unit_square(inst).coords01;
    } else {
        geo.coords.resize(static_cast<std::size_t>(inst.node_count()));
        for (int i = 0; i <= inst.n(); ++i) geo.coords[static_cast<std::size_t>(i)] = inst.node(i);
    }
    return geo;
}

RolloutState RolloutState::initial(const Instance& inst) {
    RolloutState s;
    s.visited.assign(static_cast<std::size_t>(inst.node_count()), 0);
    s.current = 0;
    s.remaining = inst.capacity();
    return s;
}

Mask feasible_actions(const RolloutState& state, const PolicyGeometry& geo) {
    const std::size_t count = geo.coords.size();
    const int n = static_cast<int>(count) - 1;
    Mask mask(1, count, 0);
    if (state.done(n)) {
        mask.set(0, 0, true);
        return mask;
    }
    bool any = false;
    for (int j = 1; j <= n; ++j) {
        if (state.visited[static_cast<std::size_t>(j)]) continue;
        if (geo.demand[static_cast<std::size_t>(j)] <= state.remaining) {
            mask.set(0, static_cast<std::size_t>(j), true);
            any = true;
        }
    }
    if (state.current != 0 || (state.all_served(n) && !any)) mask.set(0, 0, true);
    else if (!any)
        throw ContractViolation("feasible_actions: no feasible action at depot");
    return mask;
}

std::vector<double> distance_scores(const std::vector<Coord>& coords, int current, int k,
                                    double clamp) {
    const std::size_t count = coords.size();
    require(current >= 0 && static_cast<std::size_t>(current) < count,
            "distance_scores: current node out of range");
    require(k >= 1, "distance_scores: K must be >= 1");
    std::vector<double> dist(count);
    const Coord from = coords[static_cast<std::size_t>(current)];
    for (std::size_t j = 0; j < count; ++j) dist[j] = euclidean_distance(from, coords[j]);

    // Rank everyone but the current node by (distance, index).
    std::vector<std::uint32_t> order;
    order.reserve(count - 1);
    for (std::size_t j = 0; j < count; ++j)
        if (j != static_cast<std::size_t>(current)) order.push_back(static_cast<std::uint32_t>(j));
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    auto closer = [&](std::uint32_t a, std::uint32_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    };
    if (keep < order.size())
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep - 1),
                         order.end(), closer);

    std::vector<double> b(count);
    for (std::size_t j = 0; j < count; ++j) b[j] = -dist[j];
    for (std::size_t r = 0; r < keep; ++r) {
        const std::uint32_t j = order[r];
        b[j] = -std::log(std::max(dist[j], clamp));
    }
    b[static_cast<std::size_t>(current)] = -std::log(std::max(0.0, clamp));
    return b;
}

std::vector<double> distance_scores(const Instance& inst, int current, int k) {
    return distance_scores(normalize_to_unit_square(inst).coords01, current, k);
}

std::vector<double> reshape_scores(const std::vector<double>& attention,
                                   const std::vector<double>& distance, bool dar_enabled) {
    if (!dar_enabled) return attention;
    require(attention.size() == distance.size(), "reshape_scores: length mismatch");
    std::vector<double> out(attention.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = attention[i] + distance[i];
    return out;
}

std::vector<double> clip_and_mask(const std::vector<double>& reshaped, const RolloutState& state,
                                  const PolicyGeometry& geo, double clip) {
    require(reshaped.size() == geo.coords.size(), "clip_and_mask: length mismatch");
    const Mask mask = feasible_actions(state, geo);
    std::vector<double> alpha(reshaped.size());
    for (std::size_t j = 0; j < reshaped.size(); ++j)
        alpha[j] = mask.at(0, j) ? clip * std::tanh(reshaped[j]) : kNegInf;
    return alpha;
}

RolloutEngine::RolloutEngine(Graph& g, const ParamStore& params, const PolicyConfig& cfg,
                             const Instance& inst)
    : g_(g), params_(params), cfg_(cfg), inst_(inst), geo_(policy_geometry(inst, cfg)),
      n_(inst.n()) {
    const auto d = static_cast<std::size_t>(cfg_.width);
    const int count = n_ + 1;

    // Node features: depot (x, y), customers (x, y, demand/Q).
    Tensor depot_feat(1, 2);
    depot_feat.at(0, 0) = geo_.coords[0].x;
    depot_feat.at(0, 1) = geo_.coords[0].y;
    Tensor cust_feat(static_cast<std::size_t>(n_), 3);
    for (int i = 1; i < count; ++i) {
        cust_feat.at(static_cast<std::size_t>(i - 1), 0) = geo_.coords[static_cast<std::size_t>(i)].x;
        cust_feat.at(static_cast<std::size_t>(i - 1), 1) = geo_.coords[static_cast<std::size_t>(i)].y;
        cust_feat.at(static_cast<std::size_t>(i - 1), 2) =
            geo_.demand[static_cast<std::size_t>(i)] / geo_.capacity;
    }

    auto P = [&](const std::string& name) { return g_.param(name, params_.value(name)); };

    NodeId depot_h = g_.linear(g_.constant(std::move(depot_feat)), P("embed.depot.w"),
                               P("embed.depot.b"));
    NodeId cust_h =
        g_.linear(g_.constant(std::move(cust_feat)), P("embed.cust.w"), P("embed.cust.b"));
    NodeId h = g_.concat_rows(depot_h, cust_h);

    for (int l = 0; l < cfg_.layers; ++l) {
        NodeId q = g_.matmul(h, P(layer_name(l, "attn.wq")));
        NodeId k = g_.matmul(h, P(layer_name(l, "attn.wk")));
        NodeId v = g_.matmul(h, P(layer_name(l, "attn.wv")));
        NodeId attn = g_.attention(q, k, v, cfg_.heads, nullptr);
        NodeId proj = g_.matmul(attn, P(layer_name(l, "attn.wo")));
        h = g_.instance_norm(g_.add(h, proj), P(layer_name(l, "norm1.g")),
                             P(layer_name(l, "norm1.b")));
        NodeId ff = g_.linear(
            g_.relu(g_.linear(h, P(layer_name(l, "ff.w1")), P(layer_name(l, "ff.b1")))),
            P(layer_name(l, "ff.w2")), P(layer_name(l, "ff.b2")));
        h = g_.instance_norm(g_.add(h, ff), P(layer_name(l, "norm2.g")),
                             P(layer_name(l, "norm2.b")));
    }
    (void)d;

    h_ = h;
    mean_ = g_.mean_rows(h_);
    k_glimpse_ = g_.matmul(h_, P("dec.glimpse.wk"));
    v_glimpse_ = g_.matmul(h_, P("dec.glimpse.wv"));
    k_logit_ = g_.matmul(h_, P("dec.logit.wk"));
    wq_ctx_ = P("dec.ctx.wq");
    wo_glimpse_ = P("dec.glimpse.wo");
}

RolloutEngine::StepOut RolloutEngine::step(const std::vector<RolloutState>& states) {
    const std::size_t m = states.size();
    require(m >= 1, "RolloutEngine::step: no states");
    const std::size_t count = static_cast<std::size_t>(n_) + 1;

    std::vector<int> current(m);
    Tensor cap_frac(m, 1);
    Mask mask(m, count, 0);
    for (std::size_t t = 0; t < m; ++t) {
        current[t] = states[t].current;
        cap_frac.at(t, 0) = states[t].remaining / geo_.capacity;
        const Mask row = feasible_actions(states[t], geo_);
        for (std::size_t j = 0; j < count; ++j) mask.set(t, j, row.at(0, j));
    }

    NodeId cur_emb = g_.gather_rows(h_, current);
    NodeId mean_b = g_.broadcast_rows(mean_, m);
    NodeId cap = g_.constant(std::move(cap_frac));
    const NodeId parts[] = {mean_b, cur_emb, cap};
    NodeId ctx = g_.concat_cols(parts);
    NodeId q0 = g_.matmul(ctx, wq_ctx_);
    NodeId glimpse = g_.attention(q0, k_glimpse_, v_glimpse_, cfg_.heads, &mask);
    NodeId q = g_.matmul(glimpse, wo_glimpse_);
    NodeId attn = g_.matmul_nt(q, k_logit_, 1.0 / std::sqrt(static_cast<double>(cfg_.width)));

    StepOut out;
    out.attn = attn;
    NodeId reshaped = attn;
    if (cfg_.dar_enabled) {
        Tensor b(m, count);
        std::unordered_map<int, std::size_t> seen;  // dedupe identical current nodes
        for (std::size_t t = 0; t < m; ++t) {
            auto it = seen.find(current[t]);
            if (it != seen.end()) {
                std::copy_n(b.row(it->second), count, b.row(t));
                continue;
            }
            const auto scores = distance_scores(geo_.coords, current[t], cfg_.neighbor_k);
            std::copy_n(scores.data(), count, b.row(t));
            seen.emplace(current[t], t);
        }
        out.distance = b;
        reshaped = g_.add(attn, g_.constant(std::move(b)));
    }
    out.reshaped = g_.value(reshaped);
    NodeId alpha = g_.tanh_clip_masked(reshaped, cfg_.clip, mask);
    out.clipped = g_.value(alpha);
    NodeId logp = g_.log_softmax_masked(alpha, mask);
    out.logp = logp;
    NodeId probs = g_.softmax_masked(alpha, mask);
    out.probs = g_.value(probs);
    out.mask.push_back(std::move(mask));
    return out;
}

double RolloutEngine::apply_action(RolloutState& state, int action) const {
    require(action >= 0 && action <= n_, "apply_action: action out of range");
    const double delta = euclidean_distance(inst_.node(state.current), inst_.node(action));
    if (action == 0) {
        if (!state.open_route.empty()) {
            state.routes.push_back(std::move(state.open_route));
            state.open_route.clear();
        }
        state.remaining = geo_.capacity;
    } else {
        require(!state.visited[static_cast<std::size_t>(action)],
                "apply_action: customer already visited");
        const double demand = geo_.demand[static_cast<std::size_t>(action)];
        require(demand <= state.remaining, "apply_action: capacity exceeded");
        state.visited[static_cast<std::size_t>(action)] = 1;
        state.remaining -= demand;
        state.open_route.push_back(action);
        state.served += 1;
    }
    state.current = action;
    return delta;
}

namespace {

int argmax_row(const Tensor& probs, std::size_t row) {
    const double* p = probs.row(row);
    int best = 0;
    double best_v = p[0];
    for (std::size_t j = 1; j < probs.cols(); ++j)
        if (p[j] > best_v) {
            best_v = p[j];
            best = static_cast<int>(j);
        }
    return best;
}

int sample_row(const Tensor& probs, std::size_t row, Rng& rng) {
    const double* p = probs.row(row);
    const double u = rng.uniform01();
    double acc = 0.0;
    int last_alive = -1;
    for (std::size_t j = 0; j < probs.cols(); ++j) {
        if (p[j] <= 0.0) continue;
        last_alive = static_cast<int>(j);
        acc += p[j];
        if (u < acc) return last_alive;
    }
    require(last_alive >= 0, "sample_row: empty distribution");
    return last_alive;  // guard against rounding in the cumulative sum
}

ScoreBreakdown make_breakdown(const RolloutEngine::StepOut& out, const Graph& g, int step,
                              int current, std::size_t row, std::size_t count) {
    ScoreBreakdown bd;
    bd.step = step;
    bd.current = current;
    const Tensor& attn = g.value(out.attn);
    bd.attention.assign(attn.row(row), attn.row(row) + count);
    if (out.distance.size() != 0)
        bd.distance_scores.assign(out.distance.row(row), out.distance.row(row) + count);
    else
        bd.distance_scores.assign(count, 0.0);
    bd.reshaped.assign(out.reshaped.row(row), out.reshaped.row(row) + count);
    bd.clipped.assign(out.clipped.row(row), out.clipped.row(row) + count);
    bd.probs.assign(out.probs.row(row), out.probs.row(row) + count);
    return bd;
}

}  // namespace

RolloutResult rollout(Graph& g, const ParamStore& params, const PolicyConfig& cfg,
                      const Instance& inst, const RolloutOptions& opt) {
    const int n = inst.n();
    int m = opt.m > 0 ? opt.m : n;
    if (opt.force_first) m = std::min(m, n);
    require(m >= 1, "rollout: need at least one trajectory");

    RolloutEngine engine(g, params, cfg, inst);
    const std::size_t count = static_cast<std::size_t>(n) + 1;

    std::vector<RolloutState> states(static_cast<std::size_t>(m), RolloutState::initial(inst));
    std::vector<double> costs(static_cast<std::size_t>(m), 0.0);
    std::vector<Rng> streams;
    if (opt.sample) {
        streams.reserve(static_cast<std::size_t>(m));
        for (int t = 0; t < m; ++t)
            streams.emplace_back(derive_seed(opt.seed, opt.stream_tag, 0x74726a00ULL + static_cast<std::uint64_t>(t)));
    }

    RolloutResult result;
    result.actions.assign(static_cast<std::size_t>(m), {});
    std::vector<NodeId> picks;

    int step_index = 0;
    if (opt.force_first) {
        for (int t = 0; t < m; ++t) {
            const int first = 1 + (t % n);
            costs[static_cast<std::size_t>(t)] +=
                engine.apply_action(states[static_cast<std::size_t>(t)], first);
            result.actions[static_cast<std::size_t>(t)].push_back(first);
        }
        ++step_index;
    }

    const int max_steps = 2 * n + 4;
    for (int guard = 0; guard <= max_steps; ++guard) {
        bool all_done = true;
        for (const auto& s : states)
            if (!s.done(n)) {
                all_done = false;
                break;
            }
        if (all_done) break;
        if (guard == max_steps)
            throw ContractViolation("rollout: step limit exceeded, decoder is stuck");

        const std::size_t mark = g.mark();
        auto out = engine.step(states);

        std::vector<int> actions(static_cast<std::size_t>(m));
        for (std::size_t t = 0; t < static_cast<std::size_t>(m); ++t) {
            actions[t] = opt.sample ? sample_row(out.probs, t, streams[t])
                                    : argmax_row(out.probs, t);
        }
        if (opt.trace_steps > 0 && step_index < opt.trace_steps) {
            auto bd = make_breakdown(out, g, step_index, states[0].current, 0, count);
            bd.chosen = actions[0];
            result.trace.push_back(std::move(bd));
        }
        if (g.recording()) {
            picks.push_back(g.pick_per_row(out.logp, actions));
        }
        const Tensor& logp_v = g.value(out.logp);
        for (std::size_t t = 0; t < static_cast<std::size_t>(m); ++t) {
            states[t].log_prob_sum += logp_v.at(t, static_cast<std::size_t>(actions[t]));
            costs[t] += engine.apply_action(states[t], actions[t]);
            result.actions[t].push_back(actions[t]);
        }
        if (!g.recording()) g.rollback(mark);
        ++step_index;
    }

    if (g.recording() && !picks.empty()) {
        NodeId total = picks[0];
        for (std::size_t i = 1; i < picks.size(); ++i) total = g.add(total, picks[i]);
        result.log_prob_vector = total;
        result.log_prob_nodes = picks;
    }

    result.trajectories.reserve(static_cast<std::size_t>(m));
    result.costs = costs;
    result.best = 0;
    for (int t = 0; t < m; ++t) {
        Solution sol;
        sol.routes = states[static_cast<std::size_t>(t)].routes;
        sol.cost = costs[static_cast<std::size_t>(t)];
        result.trajectories.push_back(std::move(sol));
        result.log_prob_sums.push_back(states[static_cast<std::size_t>(t)].log_prob_sum);
        if (costs[static_cast<std::size_t>(t)] < costs[static_cast<std::size_t>(result.best)])
            result.best = t;
    }
    return result;
}

std::pair<Solution, std::vector<ScoreBreakdown>> greedy_rollout(const Instance& inst,
                                                                const ParamStore& params,
                                                                const PolicyConfig& cfg, int m,
                                                                int trace_steps) {
    Graph g(false);
    RolloutOptions opt;
    opt.m = m;
    opt.sample = false;
    opt.trace_steps = trace_steps;
    auto result = rollout(g, params, cfg, inst, opt);
    return {result.trajectories[static_cast<std::size_t>(result.best)], std::move(result.trace)};
}

Tensor encode(const Instance& inst, const ParamStore& params, const PolicyConfig& cfg) {
    Graph g(false);
    RolloutEngine engine(g, params, cfg, inst);
    return g.value(engine.embeddings());
}

std::vector<double> attention_scores(const Instance& inst, const ParamStore& params,
                                     const PolicyConfig& cfg, const RolloutState& state) {
    Graph g(false);
    RolloutEngine engine(g, params, cfg, inst);
    auto out = engine.step({state});
    const Tensor& attn = g.value(out.attn);
    return std::vector<double>(attn.row(0), attn.row(0) + attn.cols());
}

StepPolicyResult step_policy(const Instance& inst, const ParamStore& params,
                             const PolicyConfig& cfg, const RolloutState& state) {
    Graph g(false);
    RolloutEngine engine(g, params, cfg, inst);
    auto out = engine.step({state});
    StepPolicyResult res;
    res.breakdown = make_breakdown(out, g, 0, state.current, 0,
                                   static_cast<std::size_t>(inst.node_count()));
    res.probs = res.breakdown.probs;
    return res;
}

std::string breakdown_to_csv(const std::vector<ScoreBreakdown>& trace) {
    std::ostringstream os;
    os << "step,node,attention,distance_score,reshaped,clipped,prob\n";
    char buf[512];
    for (const auto& bd : trace) {
        for (std::size_t j = 0; j < bd.probs.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%d,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", bd.step, j,
                          bd.attention[j], bd.distance_scores[j], bd.reshaped[j], bd.clipped[j],
                          bd.probs[j]);
            os << buf;
        }
    }
    return os.str();
}

std::vector<ScoreBreakdown> breakdown_from_csv(std::string_view text) {
    std::vector<ScoreBreakdown> trace;
    std::istringstream is{std::string(text)};
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ScoreBreakdown tmp;
        int step;
        std::size_t node;
        double a, b, r, c, p;
        if (std::sscanf(line.c_str(), "%d,%zu,%lg,%lg,%lg,%lg,%lg", &step, &node, &a, &b, &r, &c,
                        &p) != 7)
            throw ParseError("breakdown_from_csv: malformed row '" + line + "'");
        if (trace.empty() || trace.back().step != step) {
            trace.emplace_back();
            trace.back().step = step;
        }
        auto& bd = trace.back();
        bd.attention.push_back(a);
        bd.distance_scores.push_back(b);
        bd.reshaped.push_back(r);
        bd.clipped.push_back(c);
        bd.probs.push_back(p);
    }
    return trace;
}

}  // namespace darvrp
