#include "darvrp/training.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace darvrp {

namespace {

std::string trim_copy(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool parse_bool(const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ParseError("config: expected boolean, got '" + v + "'");
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
    TrainConfig cfg;
    std::istringstream is{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim_copy(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: expected 'key = value' at line " + std::to_string(line_no));
        const std::string key = trim_copy(line.substr(0, eq));
        const std::string val = trim_copy(line.substr(eq + 1));
        try {
            if (key == "n") cfg.n_low = cfg.n_high = std::stoi(val);
            else if (key == "n_low") cfg.n_low = std::stoi(val);
            else if (key == "n_high") cfg.n_high = std::stoi(val);
            else if (key == "steps") cfg.steps = std::stoi(val);
            else if (key == "base_batch") cfg.base_batch = std::stoi(val);
            else if (key == "lr") cfg.adam.lr = std::stod(val);
            else if (key == "beta1") cfg.adam.beta1 = std::stod(val);
            else if (key == "beta2") cfg.adam.beta2 = std::stod(val);
            else if (key == "eps") cfg.adam.eps = std::stod(val);
            else if (key == "m") cfg.m = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "early_stop_steps") cfg.early_stop_steps = std::stoi(val);
            else if (key == "demand_low") cfg.demand_low = std::stoi(val);
            else if (key == "demand_high") cfg.demand_high = std::stoi(val);
            else if (key == "capacity") cfg.capacity = std::stod(val);
            else if (key == "checkpoint_every") cfg.checkpoint_every = std::stoi(val);
            else if (key == "threads") cfg.threads = std::stoi(val);
            else if (key == "width") cfg.policy.width = std::stoi(val);
            else if (key == "heads") cfg.policy.heads = std::stoi(val);
            else if (key == "layers") cfg.policy.layers = std::stoi(val);
            else if (key == "ff_dim") cfg.policy.ff_dim = std::stoi(val);
            else if (key == "k") cfg.policy.neighbor_k = std::stoi(val);
            else if (key == "clip") cfg.policy.clip = std::stod(val);
            else if (key == "dar") cfg.policy.dar_enabled = parse_bool(val);
            else if (key == "normalize") cfg.policy.normalize_inputs = parse_bool(val);
            else throw ParseError("config: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ParseError("config: bad value '" + val + "' for key '" + key + "' at line " +
                             std::to_string(line_no));
        } catch (const std::out_of_range&) {
            throw ParseError("config: value '" + val + "' out of range at line " +
                             std::to_string(line_no));
        }
    }
    if (cfg.n_low < 1 || cfg.n_high < cfg.n_low)
        throw ParseError("config: need 1 <= n_low <= n_high");
    if (cfg.steps < 0) throw ParseError("config: steps must be >= 0");
    if (cfg.base_batch < 1) throw ParseError("config: base_batch must be >= 1");
    return cfg;
}

int batch_size_for(int n, int base) {
    require(n >= 1, "batch_size_for: N must be >= 1");
    require(base >= 1, "batch_size_for: base must be >= 1");
    const double bs = std::floor(static_cast<double>(base) *
                                 std::pow(100.0 / static_cast<double>(n), 1.6));
    return std::max(1, static_cast<int>(bs));
}

double reward(const Instance& inst, const Solution& sol) {
    const auto report = check_feasible(inst, sol);
    if (!report.ok)
        throw ContractViolation("reward: infeasible solution (" + report.violations.front() + ")");
    return -solution_cost(inst, sol);
}

NodeId reinforce_loss(Graph& g, const std::vector<double>& rewards, NodeId log_probs) {
    const std::size_t m = rewards.size();
    require(m >= 2, "reinforce_loss: the shared baseline needs at least two trajectories");
    require(g.value(log_probs).size() == m, "reinforce_loss: reward/log-prob count mismatch");
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(m);
    std::vector<double> weights(m);
    for (std::size_t i = 0; i < m; ++i)
        weights[i] = -(rewards[i] - mean) / static_cast<double>(m);
    return g.weighted_sum(log_probs, std::move(weights));
}

std::string train_report_csv(const TrainReport& report) {
    std::ostringstream os;
    os << "step,mean_reward,baseline,loss,grad_norm,seconds\n";
    char buf[256];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.4f\n", row.step,
                      row.mean_reward, row.baseline, row.loss, row.grad_norm, row.seconds);
        os << buf;
    }
    return os.str();
}

std::string checkpoint_meta(const PolicyConfig& cfg, std::uint64_t seed) {
    nlohmann::json meta;
    meta["format"] = "darvrp-policy";
    meta["width"] = cfg.width;
    meta["heads"] = cfg.heads;
    meta["layers"] = cfg.layers;
    meta["ff_dim"] = cfg.ff();
    meta["k"] = cfg.neighbor_k;
    meta["clip"] = cfg.clip;
    meta["dar"] = cfg.dar_enabled;
    meta["normalize"] = cfg.normalize_inputs;
    meta["seed"] = seed;
    return meta.dump();
}

PolicyConfig policy_config_from_meta(const std::string& meta_json) {
    PolicyConfig cfg;
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("checkpoint meta: ") + e.what());
    }
    cfg.width = meta.value("width", cfg.width);
    cfg.heads = meta.value("heads", cfg.heads);
    cfg.layers = meta.value("layers", cfg.layers);
    cfg.ff_dim = meta.value("ff_dim", cfg.ff());
    cfg.neighbor_k = meta.value("k", cfg.neighbor_k);
    cfg.clip = meta.value("clip", cfg.clip);
    cfg.dar_enabled = meta.value("dar", cfg.dar_enabled);
    cfg.normalize_inputs = meta.value("normalize", cfg.normalize_inputs);
    return cfg;
}

TrainReport train(const TrainConfig& cfg, ParamStore& store) {
    TrainReport report;
    const auto t_start = std::chrono::steady_clock::now();
    const int total_steps =
        cfg.early_stop_steps > 0 ? std::min(cfg.steps, cfg.early_stop_steps) : cfg.steps;

    for (int step = 0; step < total_steps; ++step) {
        const auto t_step = std::chrono::steady_clock::now();
        Rng step_rng(derive_seed(cfg.seed, 0x737465700000ULL, static_cast<std::uint64_t>(step)));
        const int N = cfg.n_low == cfg.n_high
                          ? cfg.n_low
                          : static_cast<int>(step_rng.uniform_int(cfg.n_low, cfg.n_high));
        const int batch = batch_size_for(N, cfg.base_batch);
        const int m = cfg.m > 0 ? std::min(cfg.m, N) : N;
        require(m >= 2, "train: the shared baseline needs m >= 2 trajectories (so N >= 2)");

        std::vector<std::map<std::string, Tensor>> grads(static_cast<std::size_t>(batch));
        std::vector<double> losses(static_cast<std::size_t>(batch), 0.0);
        std::vector<double> reward_sums(static_cast<std::size_t>(batch), 0.0);

        parallel_for(static_cast<std::size_t>(batch), cfg.threads, [&](std::size_t i) {
            GenSpec gen;
            gen.n = N;
            gen.demand_low = cfg.demand_low;
            gen.demand_high = cfg.demand_high;
            gen.capacity = cfg.capacity;
            gen.seed = derive_seed(cfg.seed, 0x696e737400ULL, static_cast<std::uint64_t>(step), i);
            const Instance inst = generate_instance(gen);

            Graph g(true);
            RolloutOptions opt;
            opt.m = m;
            opt.sample = true;
            opt.seed = cfg.seed;
            opt.stream_tag = derive_seed(0x726f6c6cULL, static_cast<std::uint64_t>(step), i);
            auto result = rollout(g, store, cfg.policy, inst, opt);

            std::vector<double> rewards(result.costs.size());
            for (std::size_t t = 0; t < result.costs.size(); ++t) rewards[t] = -result.costs[t];
            const NodeId loss = reinforce_loss(g, rewards, result.log_prob_vector);
            g.backward(loss);
            g.merge_param_grads(grads[i], 1.0 / static_cast<double>(batch));

            losses[i] = g.scalar_value(loss);
            double acc = 0.0;
            for (double r : rewards) acc += r;
            reward_sums[i] = acc / static_cast<double>(rewards.size());
        });

        store.zero_grads();
        double loss_mean = 0.0, reward_mean = 0.0;
        for (int i = 0; i < batch; ++i) {
            store.accumulate_grads(grads[static_cast<std::size_t>(i)]);
            loss_mean += losses[static_cast<std::size_t>(i)];
            reward_mean += reward_sums[static_cast<std::size_t>(i)];
        }
        loss_mean /= static_cast<double>(batch);
        reward_mean /= static_cast<double>(batch);

        if (!std::isfinite(loss_mean)) {
            if (!cfg.checkpoint_path.empty())
                store.save(cfg.checkpoint_path + ".crash", checkpoint_meta(cfg.policy, cfg.seed));
            throw ContractViolation("train: non-finite loss at step " + std::to_string(step) +
                                    (cfg.checkpoint_path.empty()
                                         ? ""
                                         : ", state dumped to " + cfg.checkpoint_path + ".crash"));
        }

        const double grad_norm = store.grad_l2_norm();
        store.adam_step(cfg.adam);

        TrainReportRow row;
        row.step = step;
        row.mean_reward = reward_mean;
        row.baseline = reward_mean;
        row.loss = loss_mean;
        row.grad_norm = grad_norm;
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_step).count();
        report.rows.push_back(row);

        if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
            (step + 1) % cfg.checkpoint_every == 0)
            store.save(cfg.checkpoint_path, checkpoint_meta(cfg.policy, cfg.seed));
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

}  // namespace darvrp
