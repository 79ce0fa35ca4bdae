#include "darvrp/baselines.hpp"

#include <algorithm>

#include "darvrp/vrplib.hpp"
#include "doctest.h"

using namespace darvrp;

namespace {

Instance make(std::vector<Customer> cs, double q = 30.0, Coord depot = {0, 0}) {
    return Instance("t", depot, std::move(cs), q);
}

}  // namespace

TEST_CASE("greedy_nearest basics") {
    SUBCASE("single customer") {
        auto sol = greedy_nearest(make({{0.5, 0, 1}}));
        REQUIRE(sol.routes.size() == 1);
        CHECK(sol.routes[0] == std::vector<int>{1});
        CHECK(sol.cost == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("collinear chain with ample capacity") {
        auto sol = greedy_nearest(make({{0.1, 0, 1}, {0.2, 0, 1}, {0.3, 0, 1}}));
        REQUIRE(sol.routes.size() == 1);
        CHECK(sol.routes[0] == std::vector<int>{1, 2, 3});
    }
    SUBCASE("equidistant tie goes to the lower index") {
        auto sol = greedy_nearest(make({{0, 1, 1}, {1, 0, 1}}));
        CHECK(sol.routes[0][0] == 1);
    }
    SUBCASE("capacity forces a depot reset") {
        auto sol = greedy_nearest(make({{0.1, 0, 20}, {0.2, 0, 20}}));
        CHECK(sol.routes.size() == 2);
        CHECK(check_feasible(make({{0.1, 0, 20}, {0.2, 0, 20}}), sol).ok);
    }
}

TEST_CASE("greedy_nearest is always feasible") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GenSpec spec;
        spec.n = 1 + static_cast<int>(seed % 40);
        spec.seed = seed;
        auto inst = generate_instance(spec);
        auto sol = greedy_nearest(inst);
        CHECK(check_feasible(inst, sol).ok);
        CHECK(sol.cost == doctest::Approx(solution_cost(inst, sol)).epsilon(1e-12));
    }
}

TEST_CASE("exact_optimum tiny cases") {
    SUBCASE("single customer") {
        auto inst = make({{0.5, 0.5, 1}});
        auto res = exact_optimum(inst);
        CHECK(res.optimal_cost ==
              doctest::Approx(2.0 * euclidean_distance({0, 0}, {0.5, 0.5})).epsilon(1e-12));
        CHECK(res.nodes_explored == 1);
    }
    SUBCASE("two customers, combined tour wins under ample capacity") {
        auto inst = make({{1, 0, 1}, {1, 0.1, 1}});
        auto res = exact_optimum(inst);
        const double combined = 1.0 + 0.1 + euclidean_distance({1, 0.1}, {0, 0});
        CHECK(res.optimal_cost == doctest::Approx(combined).epsilon(1e-12));
        REQUIRE(res.optimal_solution.routes.size() == 1);
    }
    SUBCASE("two customers forced apart by capacity") {
        auto inst = make({{1, 0, 20}, {1, 0.1, 20}});
        auto res = exact_optimum(inst);
        const double split = 2.0 + 2.0 * euclidean_distance({1, 0.1}, {0, 0});
        CHECK(res.optimal_cost == doctest::Approx(split).epsilon(1e-12));
        CHECK(res.optimal_solution.routes.size() == 2);
    }
    SUBCASE("cap refusal") {
        GenSpec spec;
        spec.n = 12;
        spec.seed = 1;
        CHECK_THROWS_WITH_AS((void)exact_optimum(generate_instance(spec), 9),
                             doctest::Contains("cap is 9"), DataError);
    }
}

TEST_CASE("oracle dominates greedy and its solutions are feasible") {
    int strict = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        GenSpec spec;
        spec.n = 7;
        spec.seed = 1000 + seed;
        auto inst = generate_instance(spec);
        auto oracle = exact_optimum(inst);
        auto greedy = greedy_nearest(inst);
        CHECK(check_feasible(inst, oracle.optimal_solution).ok);
        CHECK(oracle.optimal_solution.cost ==
              doctest::Approx(solution_cost(inst, oracle.optimal_solution)).epsilon(1e-9));
        CHECK(oracle.optimal_cost <= greedy.cost + 1e-9);
        if (oracle.optimal_cost < greedy.cost - 1e-9) ++strict;
    }
    CHECK(strict > 0);
}

TEST_CASE("exact_optimum is invariant to customer relabeling") {
    GenSpec spec;
    spec.n = 6;
    spec.seed = 77;
    auto inst = generate_instance(spec);
    auto base = exact_optimum(inst).optimal_cost;

    // rotate customer order
    auto cs = inst.customers();
    std::rotate(cs.begin(), cs.begin() + 2, cs.end());
    Instance rotated("rot", inst.depot(), cs, inst.capacity());
    CHECK(exact_optimum(rotated).optimal_cost == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("gap arithmetic") {
    CHECK(gap(206866, 192848) == doctest::Approx(7.27).epsilon(0.002));
    CHECK(gap(129282, 111395) == doctest::Approx(16.06).epsilon(0.002));
    CHECK(gap(100, 100) == 0.0);
    CHECK_THROWS_AS((void)gap(1.0, 0.0), ContractViolation);

    // monotone in cost for a fixed reference
    CHECK(gap(205, 100) > gap(204, 100));
}
