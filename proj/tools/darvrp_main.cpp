#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "darvrp/baselines.hpp"
#include "darvrp/eval.hpp"
#include "darvrp/policy.hpp"
#include "darvrp/training.hpp"
#include "darvrp/vrplib.hpp"

namespace fs = std::filesystem;
using namespace darvrp;

namespace {

std::vector<Instance> load_instance_dir(const std::string& dir) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".vrp") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw DataError("no .vrp files under '" + dir + "'");
    std::vector<Instance> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(load_instance(p.string()));
    return out;
}

struct CheckpointBundle {
    ParamStore params;
    PolicyConfig cfg;
};

CheckpointBundle load_checkpoint(const std::string& path) {
    std::string meta;
    CheckpointBundle bundle{ParamStore::load(path, &meta), {}};
    bundle.cfg = policy_config_from_meta(meta);
    return bundle;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        const std::string tok = csv.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!tok.empty()) out.push_back(std::stoi(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw DataError("empty list '" + csv + "'");
    return out;
}

std::string dispersion_csv(const std::vector<DispersionStats>& stats) {
    std::string out = "step,feasible,count_above,fraction,tau\n";
    char buf[160];
    for (const auto& st : stats) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g\n", st.step, st.feasible_count,
                      st.above_count, st.fraction, st.tau);
        out += buf;
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"darvrp: CVRP construction solver with distance-aware attention reshaping"};
    app.require_subcommand(1);

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "Write a random instance as a VRPLIB file");
    GenSpec gen_spec;
    std::string gen_out;
    gen_cmd->add_option("--n", gen_spec.n, "customer count")->required();
    gen_cmd->add_option("--demand-low", gen_spec.demand_low, "minimum integer demand");
    gen_cmd->add_option("--demand-high", gen_spec.demand_high, "maximum integer demand");
    gen_cmd->add_option("--capacity", gen_spec.capacity, "vehicle capacity Q");
    gen_cmd->add_option("--seed", gen_spec.seed, "generation seed");
    gen_cmd->add_option("--name", gen_spec.name, "instance name (defaults to rnd<n>-s<seed>)");
    gen_cmd->add_option("-o,--out", gen_out, "output .vrp path")->required();
    gen_cmd->callback([&] {
        const Instance inst = generate_instance(gen_spec);
        write_file(gen_out, emit_instance(inst));
        std::cout << "wrote " << gen_out << " (n=" << inst.n() << ", Q=" << inst.capacity()
                  << ")\n";
    });

    // train
    auto* train_cmd = app.add_subcommand("train", "Run the REINFORCE training loop");
    std::string train_config, train_out, train_init, train_report;
    std::uint64_t train_seed = 0;
    bool train_seed_set = false;
    int train_threads = 0;
    train_cmd->add_option("--config", train_config, "key = value training config")->required();
    train_cmd->add_option("-o,--out", train_out, "checkpoint output path")->required();
    train_cmd->add_option("--init", train_init, "checkpoint to continue from");
    train_cmd->add_option("--report", train_report, "append per-step report CSV here");
    train_cmd->add_option("--seed", train_seed, "override the config seed")
        ->each([&](const std::string&) { train_seed_set = true; });
    train_cmd->add_option("--threads", train_threads, "worker threads (default from config)");
    train_cmd->callback([&] {
        TrainConfig cfg = parse_train_config(read_file(train_config));
        if (train_seed_set) cfg.seed = train_seed;
        if (train_threads > 0) cfg.threads = train_threads;
        ParamStore store;
        if (!train_init.empty()) {
            auto bundle = load_checkpoint(train_init);
            // keep the architecture of the loaded model, train-time flags from config
            cfg.policy.width = bundle.cfg.width;
            cfg.policy.heads = bundle.cfg.heads;
            cfg.policy.layers = bundle.cfg.layers;
            cfg.policy.ff_dim = bundle.cfg.ff_dim;
            store = std::move(bundle.params);
        } else {
            init_policy_params(store, cfg.policy, cfg.seed);
        }
        cfg.checkpoint_path = train_out;
        auto report = train(cfg, store);
        store.save(train_out, checkpoint_meta(cfg.policy, cfg.seed));
        if (!train_report.empty()) write_file(train_report, train_report_csv(report));
        const double final_reward = report.rows.empty() ? 0.0 : report.rows.back().mean_reward;
        std::cout << "trained " << report.rows.size() << " steps in " << report.wall_seconds
                  << "s, final mean reward " << final_reward << ", checkpoint " << train_out
                  << "\n";
    });

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Greedy-decode one instance with the policy");
    std::string solve_instance, solve_ckpt, solve_out, solve_trace;
    int solve_m = 0, solve_k = 0, solve_trace_steps = 1, solve_threads = 1;
    std::uint64_t solve_seed = 0;
    bool solve_dar_on = false, solve_dar_off = false;
    bool solve_norm_on = false, solve_norm_off = false;
    solve_cmd->add_option("instance", solve_instance, "VRPLIB instance path")->required();
    solve_cmd->add_option("--checkpoint", solve_ckpt, "policy checkpoint")->required();
    solve_cmd->add_option("-o,--out", solve_out, ".sol output path");
    solve_cmd->add_flag("--dar", solve_dar_on, "force distance-aware reshaping on");
    solve_cmd->add_flag("--no-dar", solve_dar_off, "force distance-aware reshaping off");
    solve_cmd->add_option("-K,--neighbors", solve_k, "top-K neighborhood size");
    solve_cmd->add_option("-m,--starts", solve_m, "trajectories (0 = one per customer)");
    solve_cmd->add_option("--seed", solve_seed, "reserved for sampling decoders");
    solve_cmd->add_flag("--normalize", solve_norm_on, "normalize coordinates to the unit square");
    solve_cmd->add_flag("--no-normalize", solve_norm_off, "feed raw coordinates to the policy");
    solve_cmd->add_option("--trace", solve_trace, "write per-step score breakdown CSV here");
    solve_cmd->add_option("--trace-steps", solve_trace_steps, "steps to trace (with --trace)");
    solve_cmd->add_option("--threads", solve_threads, "unused for a single instance");
    solve_cmd->callback([&] {
        (void)solve_seed;
        (void)solve_threads;
        auto bundle = load_checkpoint(solve_ckpt);
        if (solve_dar_on) bundle.cfg.dar_enabled = true;
        if (solve_dar_off) bundle.cfg.dar_enabled = false;
        if (solve_norm_on) bundle.cfg.normalize_inputs = true;
        if (solve_norm_off) bundle.cfg.normalize_inputs = false;
        if (solve_k > 0) bundle.cfg.neighbor_k = solve_k;
        const Instance inst = load_instance(solve_instance);
        const auto t0 = std::chrono::steady_clock::now();
        auto [sol, trace] = greedy_rollout(inst, bundle.params, bundle.cfg, solve_m,
                                           solve_trace.empty() ? 0 : solve_trace_steps);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto feas = check_feasible(inst, sol);
        if (!feas.ok)
            throw ContractViolation("solve: infeasible solution: " + feas.violations.front());
        const std::string text = emit_solution(sol, sol.cost);
        if (solve_out.empty())
            std::cout << text;
        else
            write_file(solve_out, text);
        if (!solve_trace.empty()) write_file(solve_trace, breakdown_to_csv(trace));
        std::cout << "cost " << sol.cost << " routes " << sol.routes.size() << " time " << secs
                  << "s";
        if (auto ref = inst.bks()) std::cout << " gap " << gap(sol.cost, *ref) << "%";
        std::cout << "\n";
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Benchmark solvers over an instance directory");
    std::string eval_dir, eval_registry, eval_ckpt, eval_out = "records.csv",
                eval_format = "csv", eval_solvers = "greedy";
    int eval_m = 0, eval_threads = 1;
    eval_cmd->add_option("--instances", eval_dir, "directory of .vrp files")->required();
    eval_cmd->add_option("--registry", eval_registry, "best-known-solution registry file");
    eval_cmd->add_option("--checkpoint", eval_ckpt, "policy checkpoint (enables policy solvers)");
    eval_cmd->add_option("--solvers", eval_solvers,
                         "comma list of greedy, policy, policy-nodar");
    eval_cmd->add_option("-m,--starts", eval_m, "trajectories for policy solvers");
    eval_cmd->add_option("-o,--out", eval_out, "records output path");
    eval_cmd->add_option("--format", eval_format, "csv or json");
    eval_cmd->add_option("--threads", eval_threads, "parallel instance evaluations");
    eval_cmd->callback([&] {
        const auto instances = load_instance_dir(eval_dir);
        BksRegistry refs;
        if (!eval_registry.empty()) refs = BksRegistry::from_file(eval_registry);

        std::vector<SolverSpec> solvers;
        CheckpointBundle bundle;
        bool have_ckpt = false;
        std::size_t start = 0;
        while (start <= eval_solvers.size()) {
            const auto comma = eval_solvers.find(',', start);
            const std::string tok =
                eval_solvers.substr(start, comma == std::string::npos ? comma : comma - start);
            if (tok == "greedy") {
                solvers.push_back({"greedy", [](const Instance& i) { return greedy_nearest(i); }});
            } else if (tok == "policy" || tok == "policy-nodar") {
                if (!have_ckpt) {
                    if (eval_ckpt.empty())
                        throw DataError("solver '" + tok + "' needs --checkpoint");
                    bundle = load_checkpoint(eval_ckpt);
                    have_ckpt = true;
                }
                PolicyConfig cfg = bundle.cfg;
                cfg.dar_enabled = tok == "policy";
                const ParamStore& params = bundle.params;
                solvers.push_back({tok, [cfg, &params, eval_m](const Instance& i) {
                                       return greedy_rollout(i, params, cfg, eval_m).first;
                                   }});
            } else if (!tok.empty()) {
                throw DataError("unknown solver '" + tok + "'");
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (solvers.empty()) throw DataError("no solvers selected");
        auto records = evaluate(solvers, instances, refs, eval_threads);
        export_records(records, eval_format, eval_out);
        std::cout << "wrote " << records.size() << " records to " << eval_out << "\n";
    });

    // dispersion
    auto* disp_cmd = app.add_subcommand("dispersion", "First-step attention dispersion stats");
    std::string disp_instance, disp_ckpt, disp_out;
    double disp_tau = -1.0;
    int disp_steps = 1;
    bool disp_dar_on = false, disp_dar_off = false;
    disp_cmd->add_option("instance", disp_instance, "VRPLIB instance path")->required();
    disp_cmd->add_option("--checkpoint", disp_ckpt, "policy checkpoint")->required();
    disp_cmd->add_option("--tau", disp_tau, "score threshold (default -1)");
    disp_cmd->add_option("--steps", disp_steps, "decision steps to profile");
    disp_cmd->add_flag("--dar", disp_dar_on, "force distance-aware reshaping on");
    disp_cmd->add_flag("--no-dar", disp_dar_off, "force distance-aware reshaping off");
    disp_cmd->add_option("-o,--out", disp_out, "stats CSV path");
    disp_cmd->callback([&] {
        auto bundle = load_checkpoint(disp_ckpt);
        if (disp_dar_on) bundle.cfg.dar_enabled = true;
        if (disp_dar_off) bundle.cfg.dar_enabled = false;
        const Instance inst = load_instance(disp_instance);
        auto stats = dispersion_profile(inst, bundle.params, bundle.cfg, disp_tau, disp_steps);
        const std::string text = dispersion_csv(stats);
        if (disp_out.empty())
            std::cout << text;
        else
            write_file(disp_out, text);
    });

    // ablate
    auto* abl_cmd = app.add_subcommand("ablate", "Inference-time sweep over the neighbor count K");
    std::string abl_dir, abl_ckpt, abl_registry, abl_out, abl_klist = "20,50,100";
    int abl_m = 0, abl_threads = 1;
    abl_cmd->add_option("--instances", abl_dir, "directory of .vrp files")->required();
    abl_cmd->add_option("--checkpoint", abl_ckpt, "policy checkpoint")->required();
    abl_cmd->add_option("--k-list", abl_klist, "comma list of K values");
    abl_cmd->add_option("--registry", abl_registry,
                        "BKS registry (greedy costs are the fallback reference)");
    abl_cmd->add_option("-m,--starts", abl_m, "trajectories per instance");
    abl_cmd->add_option("-o,--out", abl_out, "table output path");
    abl_cmd->add_option("--threads", abl_threads, "parallel instance evaluations");
    abl_cmd->callback([&] {
        auto bundle = load_checkpoint(abl_ckpt);
        const auto instances = load_instance_dir(abl_dir);
        BksRegistry refs;
        if (!abl_registry.empty()) refs = BksRegistry::from_file(abl_registry);
        std::vector<double> ref_costs(instances.size());
        for (std::size_t i = 0; i < instances.size(); ++i) {
            if (auto ref = refs.lookup(instances[i].name()))
                ref_costs[i] = *ref;
            else
                ref_costs[i] = greedy_nearest(instances[i]).cost;
        }
        auto rows = ablate_k(instances, bundle.params, bundle.cfg, parse_int_list(abl_klist),
                             ref_costs, abl_m, abl_threads);
        std::string text = "k,mean_gap\n";
        char buf[64];
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g\n", row.k, row.mean_gap);
            text += buf;
        }
        if (abl_out.empty())
            std::cout << text;
        else
            write_file(abl_out, text);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
