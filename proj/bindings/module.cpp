#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "darvrp/baselines.hpp"
#include "darvrp/eval.hpp"
#include "darvrp/policy.hpp"
#include "darvrp/training.hpp"
#include "darvrp/vrplib.hpp"

namespace py = pybind11;
using namespace darvrp;

namespace {

Instance make_instance(const std::string& name, std::pair<double, double> depot,
                       const std::vector<std::tuple<double, double, double>>& customers,
                       double capacity) {
    std::vector<Customer> cs;
    cs.reserve(customers.size());
    for (const auto& [x, y, demand] : customers) cs.push_back({x, y, demand});
    return Instance(name, {depot.first, depot.second}, std::move(cs), capacity);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "CVRP construction solver with distance-aware attention reshaping";

    py::register_exception<DataError>(m, "DataError");
    py::register_exception<ContractViolation>(m, "ContractViolation");

    py::class_<Coord>(m, "Coord")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Coord::x)
        .def_readwrite("y", &Coord::y)
        .def("__repr__", [](const Coord& c) {
            return "Coord(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
        });

    py::class_<Instance>(m, "Instance")
        .def(py::init(&make_instance), py::arg("name"), py::arg("depot"), py::arg("customers"),
             py::arg("capacity"))
        .def_property_readonly("name", &Instance::name)
        .def_property_readonly("n", &Instance::n)
        .def_property_readonly("capacity", &Instance::capacity)
        .def_property_readonly("depot", &Instance::depot)
        .def("node", &Instance::node, py::arg("i"))
        .def("demand", &Instance::demand, py::arg("i"))
        .def_property_readonly("bks", &Instance::bks)
        .def("__repr__", [](const Instance& inst) {
            return "Instance('" + inst.name() + "', n=" + std::to_string(inst.n()) + ")";
        });

    py::class_<Solution>(m, "Solution")
        .def(py::init<>())
        .def(py::init([](std::vector<std::vector<int>> routes, double cost) {
                 return Solution{std::move(routes), cost};
             }),
             py::arg("routes"), py::arg("cost") = 0.0)
        .def_readwrite("routes", &Solution::routes)
        .def_readwrite("cost", &Solution::cost);

    py::class_<FeasibilityReport>(m, "FeasibilityReport")
        .def_readonly("ok", &FeasibilityReport::ok)
        .def_readonly("violations", &FeasibilityReport::violations)
        .def("__bool__", [](const FeasibilityReport& r) { return r.ok; });

    py::class_<NormalizedView>(m, "NormalizedView")
        .def_readonly("scale", &NormalizedView::scale)
        .def_readonly("offset", &NormalizedView::offset)
        .def_readonly("coords01", &NormalizedView::coords01);

    m.def("euclidean_distance", &euclidean_distance, py::arg("a"), py::arg("b"));
    m.def("distance_row", &distance_row, py::arg("instance"), py::arg("i"));
    m.def("solution_cost", &solution_cost, py::arg("instance"), py::arg("solution"));
    m.def("check_feasible", &check_feasible, py::arg("instance"), py::arg("solution"));
    m.def("normalize_to_unit_square", &normalize_to_unit_square, py::arg("instance"));

    m.def("parse_instance", [](const std::string& text) { return parse_instance(text); },
          py::arg("text"));
    m.def("load_instance", &load_instance, py::arg("path"));
    m.def("emit_instance", &emit_instance, py::arg("instance"));
    m.def("emit_solution", &emit_solution, py::arg("solution"), py::arg("cost"));
    m.def("parse_solution", [](const std::string& text) { return parse_solution(text); },
          py::arg("text"));

    py::class_<GenSpec>(m, "GenSpec")
        .def(py::init<>())
        .def_readwrite("n", &GenSpec::n)
        .def_readwrite("demand_low", &GenSpec::demand_low)
        .def_readwrite("demand_high", &GenSpec::demand_high)
        .def_readwrite("capacity", &GenSpec::capacity)
        .def_readwrite("seed", &GenSpec::seed)
        .def_readwrite("name", &GenSpec::name);
    m.def("generate_instance", &generate_instance, py::arg("spec"));
    m.def(
        "generate",
        [](int n, int demand_low, int demand_high, double capacity, std::uint64_t seed,
           const std::string& name) {
            GenSpec spec{n, demand_low, demand_high, capacity, seed, name};
            return generate_instance(spec);
        },
        py::arg("n"), py::arg("demand_low") = 1, py::arg("demand_high") = 9,
        py::arg("capacity") = 30.0, py::arg("seed") = 0, py::arg("name") = "");

    py::class_<BksRegistry>(m, "BksRegistry")
        .def(py::init<>())
        .def_static("from_text", &BksRegistry::from_text, py::arg("text"))
        .def_static("from_file", &BksRegistry::from_file, py::arg("path"))
        .def("insert", &BksRegistry::insert, py::arg("name"), py::arg("cost"))
        .def("lookup", &BksRegistry::lookup, py::arg("name"))
        .def("__len__", &BksRegistry::size);

    m.def("greedy_nearest", &greedy_nearest, py::arg("instance"));
    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("optimal_cost", &OracleResult::optimal_cost)
        .def_readonly("optimal_solution", &OracleResult::optimal_solution)
        .def_readonly("nodes_explored", &OracleResult::nodes_explored);
    m.def("exact_optimum", &exact_optimum, py::arg("instance"), py::arg("limit") = 9);
    m.def("gap", &gap, py::arg("cost"), py::arg("reference"));
    m.def("batch_size_for", &batch_size_for, py::arg("n"), py::arg("base") = 120);
    m.def("reward", &reward, py::arg("instance"), py::arg("solution"));

    py::class_<PolicyConfig>(m, "PolicyConfig")
        .def(py::init<>())
        .def_readwrite("width", &PolicyConfig::width)
        .def_readwrite("heads", &PolicyConfig::heads)
        .def_readwrite("layers", &PolicyConfig::layers)
        .def_readwrite("ff_dim", &PolicyConfig::ff_dim)
        .def_readwrite("neighbor_k", &PolicyConfig::neighbor_k)
        .def_readwrite("clip", &PolicyConfig::clip)
        .def_readwrite("dar_enabled", &PolicyConfig::dar_enabled)
        .def_readwrite("normalize_inputs", &PolicyConfig::normalize_inputs);

    py::class_<ParamStore>(m, "ParamStore")
        .def(py::init<>())
        .def("names", &ParamStore::names)
        .def("step", &ParamStore::step)
        .def("save",
             [](const ParamStore& store, const std::string& path, const PolicyConfig& cfg) {
                 store.save(path, checkpoint_meta(cfg, 0));
             },
             py::arg("path"), py::arg("config"))
        .def_static("load", [](const std::string& path) {
            std::string meta;
            auto store = ParamStore::load(path, &meta);
            return py::make_tuple(std::move(store), policy_config_from_meta(meta));
        }, py::arg("path"));

    m.def(
        "init_policy",
        [](const PolicyConfig& cfg, std::uint64_t seed) {
            ParamStore store;
            init_policy_params(store, cfg, seed);
            return store;
        },
        py::arg("config"), py::arg("seed") = 0);

    m.def(
        "policy_solve",
        [](const Instance& inst, const ParamStore& params, const PolicyConfig& cfg, int m) {
            return greedy_rollout(inst, params, cfg, m).first;
        },
        py::arg("instance"), py::arg("params"), py::arg("config"), py::arg("m") = 0,
        "Multi-start greedy inference; returns the best trajectory");

    m.def("distance_scores",
          py::overload_cast<const std::vector<Coord>&, int, int, double>(&distance_scores),
          py::arg("coords"), py::arg("current"), py::arg("k"), py::arg("clamp") = 1e-10);

    py::class_<DispersionStats>(m, "DispersionStats")
        .def_readonly("step", &DispersionStats::step)
        .def_readonly("feasible_count", &DispersionStats::feasible_count)
        .def_readonly("above_count", &DispersionStats::above_count)
        .def_readonly("fraction", &DispersionStats::fraction)
        .def_readonly("tau", &DispersionStats::tau);
    m.def("dispersion_profile", &dispersion_profile, py::arg("instance"), py::arg("params"),
          py::arg("config"), py::arg("tau") = -1.0, py::arg("steps") = 1);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("n_low", &TrainConfig::n_low)
        .def_readwrite("n_high", &TrainConfig::n_high)
        .def_readwrite("steps", &TrainConfig::steps)
        .def_readwrite("base_batch", &TrainConfig::base_batch)
        .def_readwrite("m", &TrainConfig::m)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("demand_low", &TrainConfig::demand_low)
        .def_readwrite("demand_high", &TrainConfig::demand_high)
        .def_readwrite("capacity", &TrainConfig::capacity)
        .def_readwrite("threads", &TrainConfig::threads)
        .def_readwrite("policy", &TrainConfig::policy)
        .def_property(
            "lr", [](const TrainConfig& c) { return c.adam.lr; },
            [](TrainConfig& c, double v) { c.adam.lr = v; });
    m.def("parse_train_config",
          [](const std::string& text) { return parse_train_config(text); }, py::arg("text"));
    m.def(
        "train",
        [](const TrainConfig& cfg, ParamStore& store) {
            auto report = train(cfg, store);
            py::list rows;
            for (const auto& row : report.rows) {
                py::dict d;
                d["step"] = row.step;
                d["mean_reward"] = row.mean_reward;
                d["loss"] = row.loss;
                d["grad_norm"] = row.grad_norm;
                d["seconds"] = row.seconds;
                rows.append(std::move(d));
            }
            return rows;
        },
        py::arg("config"), py::arg("params"));

    py::class_<EvalRecord>(m, "EvalRecord")
        .def_readonly("instance", &EvalRecord::instance)
        .def_readonly("solver", &EvalRecord::solver)
        .def_readonly("cost", &EvalRecord::cost)
        .def_readonly("gap", &EvalRecord::gap)
        .def_readonly("seconds", &EvalRecord::seconds)
        .def_readonly("feasible", &EvalRecord::feasible);
    m.def(
        "evaluate",
        [](const std::vector<std::pair<std::string, std::function<Solution(const Instance&)>>>&
               solvers,
           const std::vector<Instance>& instances, const BksRegistry& refs, int threads) {
            std::vector<SolverSpec> specs;
            specs.reserve(solvers.size());
            for (const auto& [id, fn] : solvers) specs.push_back({id, fn});
            return evaluate(specs, instances, refs, 1 /* python callbacks hold the GIL */);
            (void)threads;
        },
        py::arg("solvers"), py::arg("instances"), py::arg("refs") = BksRegistry(),
        py::arg("threads") = 1);
}
