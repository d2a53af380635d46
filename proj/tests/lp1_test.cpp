#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fairclust/lp.hpp"
#include "fairclust/lp1.hpp"
#include "test_util.hpp"

using namespace fairclust;
using fairclust::testing::random_instance;

namespace {

void check_feasibility(const Instance& inst, const Lp1Solution& sol) {
    const auto& fac = inst.facilities();
    double ysum = 0.0;
    for (double y : sol.y) {
        CHECK(y >= -1e-7);
        CHECK(y <= 1.0 + 1e-7);
        ysum += y;
    }
    CHECK(ysum == doctest::Approx(static_cast<double>(inst.k())).epsilon(1e-7));
    std::vector<double> yof(static_cast<std::size_t>(inst.num_points()), 0.0);
    for (std::size_t j = 0; j < fac.size(); ++j) yof[static_cast<std::size_t>(fac[j])] = sol.y[j];
    for (std::size_t i = 0; i < inst.clients().size(); ++i) {
        double total = 0.0;
        for (const auto& [fid, v] : sol.x[i]) {
            CHECK(v >= -1e-9);
            CHECK(v <= yof[static_cast<std::size_t>(fid)] + 1e-6);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
    // z equals the max weighted group cost of the assignment.
    double zmax = 0.0;
    for (const Group& g : inst.groups()) {
        double s = 0.0;
        for (const auto& mem : g.members) {
            const auto pos = std::find(inst.clients().begin(), inst.clients().end(), mem.client) -
                             inst.clients().begin();
            for (const auto& [fid, v] : sol.x[static_cast<std::size_t>(pos)])
                s += mem.weight * v * pow_p(inst.distance(mem.client, fid), inst.p());
        }
        zmax = std::max(zmax, s);
    }
    CHECK(sol.z == doctest::Approx(zmax).epsilon(1e-6));
}

}  // namespace

TEST_CASE("k = |F|: the relaxation matches opening every facility") {
    Instance inst = random_instance(31, 8, 5, 5, 2, 2.0);
    const Lp1Solution sol = solve_lp1(inst);
    const CostProfile all = evaluate(inst, CenterSet::of(inst.facilities()));
    CHECK(sol.z == doctest::Approx(all.objective).epsilon(1e-6));
    check_feasibility(inst, sol);
}

TEST_CASE("relaxation lower-bounds the brute-force optimum") {
    for (unsigned seed = 50; seed < 62; ++seed) {
        Instance inst = random_instance(seed, 6 + seed % 6, 4 + seed % 4, 2 + seed % 2, 1 + seed % 3,
                                        seed % 2 ? 2.0 : 1.0, seed % 3 == 0);
        const Lp1Solution sol = solve_lp1(inst);
        const auto [centers, cost] = brute_force_opt(inst);
        CHECK(sol.lower_bound <= cost.objective * (1.0 + 1e-7) + 1e-9);
        check_feasibility(inst, sol);
    }
}

TEST_CASE("m=1: matches an independent formulation with the max constraint inlined") {
    Instance inst = random_instance(77, 7, 5, 2, 1, 1.0);
    const Lp1Solution sol = solve_lp1(inst);

    // Same relaxation written without the z variable: minimize the single
    // group's weighted assignment cost directly.
    const auto& clients = inst.clients();
    const auto& fac = inst.facilities();
    LinearProgram lp;
    std::vector<int> yv;
    for (std::size_t j = 0; j < fac.size(); ++j) yv.push_back(lp.add_variable(0.0, 1.0));
    std::vector<std::vector<int>> xv(clients.size());
    std::vector<double> weight_of(static_cast<std::size_t>(inst.num_points()), 0.0);
    for (const auto& mem : inst.groups()[0].members) weight_of[static_cast<std::size_t>(mem.client)] += mem.weight;
    for (std::size_t i = 0; i < clients.size(); ++i)
        for (std::size_t j = 0; j < fac.size(); ++j)
            xv[i].push_back(lp.add_variable(
                weight_of[static_cast<std::size_t>(clients[i])] * pow_p(inst.distance(clients[i], fac[j]), inst.p())));
    {
        const int row = lp.add_row(Relation::Eq, inst.k());
        for (int v : yv) lp.add_term(row, v, 1.0);
    }
    for (std::size_t i = 0; i < clients.size(); ++i) {
        const int row = lp.add_row(Relation::Eq, 1.0);
        for (int v : xv[i]) lp.add_term(row, v, 1.0);
    }
    for (std::size_t i = 0; i < clients.size(); ++i)
        for (std::size_t j = 0; j < fac.size(); ++j) {
            const int row = lp.add_row(Relation::LessEq, 0.0);
            lp.add_term(row, xv[i][j], 1.0);
            lp.add_term(row, yv[j], -1.0);
        }
    const auto direct = solve_to_vertex(lp);
    CHECK(sol.z == doctest::Approx(direct.objective_value).epsilon(1e-6));
}

TEST_CASE("decomposition path agrees with the direct LP") {
    for (unsigned seed = 90; seed < 98; ++seed) {
        Instance inst = random_instance(seed, 6 + seed % 5, 4 + seed % 3, 2, 1 + seed % 3,
                                        seed % 2 ? 2.0 : 1.0);
        Lp1Options direct_opts;
        direct_opts.force_direct = true;
        Lp1Options decomp_opts;
        decomp_opts.force_decomposition = true;
        const Lp1Solution a = solve_lp1(inst, direct_opts);
        const Lp1Solution b = solve_lp1(inst, decomp_opts);
        CHECK(a.z == doctest::Approx(b.z).epsilon(1e-7));
        CHECK(b.gap <= 1e-7 * std::max(1.0, b.z));
        check_feasibility(inst, b);
        CHECK(a.vertex);
        CHECK_FALSE(b.vertex);
    }
}
