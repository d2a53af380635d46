#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fairclust/convert.hpp"
#include "fairclust/sparsify.hpp"
#include "test_util.hpp"

using namespace fairclust;
using fairclust::testing::random_instance;

namespace {

MinMaxAssignmentProblem random_problem(unsigned seed, int max_parts, int max_size, int m) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    MinMaxAssignmentProblem prob;
    const int k = 1 + static_cast<int>(rng() % max_parts);
    std::vector<int> sizes(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) sizes[static_cast<std::size_t>(j)] = 1 + static_cast<int>(rng() % max_size);
    prob.costs.assign(static_cast<std::size_t>(m), {});
    for (int g = 0; g < m; ++g) {
        prob.costs[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            for (int v = 0; v < sizes[static_cast<std::size_t>(j)]; ++v)
                prob.costs[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)].push_back(u(rng));
    }
    return prob;
}

double brute_force_minmax(const MinMaxAssignmentProblem& prob) {
    const int k = prob.num_parts();
    std::vector<int> sel(static_cast<std::size_t>(k), 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        double worst = 0.0;
        for (int g = 0; g < prob.num_groups(); ++g) {
            double s = 0.0;
            for (int j = 0; j < k; ++j)
                s += prob.costs[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)][static_cast<std::size_t>(sel[static_cast<std::size_t>(j)])];
            worst = std::max(worst, s);
        }
        best = std::min(best, worst);
        int pos = 0;
        while (pos < k) {
            if (++sel[static_cast<std::size_t>(pos)] <
                static_cast<int>(prob.costs[0][static_cast<std::size_t>(pos)].size()))
                break;
            sel[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == k) break;
    }
    return best;
}

}  // namespace

TEST_CASE("best_k_subset: returns the set itself at size k") {
    Instance inst = random_instance(700, 6, 4, 3, 1, 1.0);
    CenterSet s = CenterSet::of({inst.facilities()[0], inst.facilities()[1], inst.facilities()[2]});
    CHECK(best_k_subset(inst, s).ids == s.ids);
}

TEST_CASE("best_k_subset: within 3^(p-1)(C + 2 opt) and tight at p=1") {
    for (unsigned seed = 710; seed < 722; ++seed) {
        const double p = seed % 2 ? 2.0 : 1.0;
        Instance inst = random_instance(seed, 7, 6, 2, 2, p);
        const auto [opt_centers, opt] = brute_force_opt(inst);
        // A superset of size k+2 standing in for a pseudo-solution.
        CenterSet s = CenterSet::of({inst.facilities()[0], inst.facilities()[1],
                                     inst.facilities()[2], inst.facilities()[3]});
        const double c = evaluate(inst, s).objective;
        const CenterSet t = best_k_subset(inst, s);
        CHECK(static_cast<int>(t.size()) <= inst.k());
        const double got = evaluate(inst, t).objective;
        const double bound = std::pow(3.0, p - 1.0) * (c + 2.0 * opt.objective);
        CHECK(got <= bound * (1.0 + 1e-9) + 1e-12);
        if (p == 1.0) CHECK(got <= c + 2.0 * opt.objective + 1e-9);
    }
}

TEST_CASE("best_k_subset: no worse than the nearest-to-optimum witness subset") {
    for (unsigned seed = 730; seed < 738; ++seed) {
        Instance inst = random_instance(seed, 7, 6, 2, 2, 1.0);
        const auto [opt_centers, opt] = brute_force_opt(inst);
        CenterSet s = CenterSet::of({inst.facilities()[0], inst.facilities()[1],
                                     inst.facilities()[2], inst.facilities()[4]});
        // The witness: for each optimal center, its nearest member of S.
        std::vector<PointId> witness;
        for (PointId o : opt_centers.ids) {
            PointId nearest = s.ids[0];
            for (PointId j : s.ids)
                if (inst.distance(o, j) < inst.distance(o, nearest)) nearest = j;
            witness.push_back(nearest);
        }
        const double witness_cost = evaluate(inst, CenterSet::of(witness)).objective;
        const double got = evaluate(inst, best_k_subset(inst, s)).objective;
        CHECK(got <= witness_cost + 1e-12);
    }
}

TEST_CASE("best_k_subset: enumeration cap") {
    Instance inst = random_instance(739, 5, 8, 2, 1, 1.0);
    CenterSet s = CenterSet::of(inst.facilities());
    CHECK_THROWS_WITH(best_k_subset(inst, s, 3), doctest::Contains("too large"));
}

TEST_CASE("minmax_assign: exact for one group") {
    for (unsigned seed = 740; seed < 750; ++seed) {
        const MinMaxAssignmentProblem prob = random_problem(seed, 4, 4, 1);
        const MinMaxResult got = minmax_assign(prob);
        CHECK(got.value == doctest::Approx(brute_force_minmax(prob)).epsilon(1e-12));
    }
}

TEST_CASE("minmax_assign: constant costs give k*c for any selection") {
    MinMaxAssignmentProblem prob;
    prob.epsilon = 0.5;
    prob.costs = {{{2.5, 2.5}, {2.5}, {2.5, 2.5, 2.5}},
                  {{2.5, 2.5}, {2.5}, {2.5, 2.5, 2.5}}};
    const MinMaxResult got = minmax_assign(prob);
    CHECK(got.value == doctest::Approx(7.5));
}

TEST_CASE("minmax_assign: within (1+eps) of brute force for two groups") {
    for (unsigned seed = 760; seed < 810; ++seed) {
        const MinMaxAssignmentProblem prob = random_problem(seed, 3, 3, 2);
        MinMaxAssignmentProblem half = prob;
        half.epsilon = 0.5;
        const double theta = brute_force_minmax(prob);
        const MinMaxResult got = minmax_assign(half);
        CHECK(got.value <= 1.5 * theta * (1.0 + 1e-12));
        CHECK(got.value >= theta - 1e-12);
    }
}

TEST_CASE("minmax_assign: a generous budget recovers the exact optimum") {
    for (unsigned seed = 820; seed < 828; ++seed) {
        MinMaxAssignmentProblem prob = random_problem(seed, 3, 3, 2);
        prob.epsilon = 1e-3;  // forces the union guess to cover every part
        const MinMaxResult got = minmax_assign(prob, 2'000'000);
        CHECK(got.value == doctest::Approx(brute_force_minmax(prob)).epsilon(1e-9));
    }
}

TEST_CASE("minmax_assign: budget exhaustion is an error") {
    MinMaxAssignmentProblem prob = random_problem(830, 4, 4, 2);
    CHECK_THROWS_WITH(minmax_assign(prob, 1), "subproblem too large");
}

TEST_CASE("convert: early exit when the pseudo-solution is small enough") {
    Instance inst = random_instance(840, 7, 5, 3, 2, 1.0);
    PseudoSolution pseudo;
    pseudo.centers = CenterSet::of({inst.facilities()[0], inst.facilities()[1]});
    pseudo.cost = evaluate(inst, pseudo.centers);
    ConversionConfig cfg;
    const ConversionResult res = convert(inst, pseudo, cfg);
    CHECK(res.report.path == "early-exit");
    CHECK(res.centers.ids == pseudo.centers.ids);
}

TEST_CASE("convert: pruning removes one center per turn down to k") {
    // Clustered points where dropping a duplicate center is free.
    std::vector<std::vector<double>> pts{{0}, {0.1}, {5}, {5.1}, {0.05}, {0.02}, {5.05}};
    std::vector<Group> groups{Group{"", {{0, 0.5}, {1, 0.5}}}, Group{"", {{2, 0.5}, {3, 0.5}}}};
    Instance inst = Instance::from_points(pts, {0, 1, 2, 3}, {4, 5, 6}, groups, 2, 1.0);
    PseudoSolution pseudo;
    pseudo.centers = CenterSet::of({4, 5, 6});  // k+1 centers, 4 and 5 nearly duplicate
    pseudo.cost = evaluate(inst, pseudo.centers);
    ConversionConfig cfg;
    cfg.beta = 1.0;  // generous: pruning may drop any center
    const ConversionResult res = convert(inst, pseudo, cfg);
    CHECK(res.report.path == "early-exit");
    CHECK(static_cast<int>(res.centers.size()) == 2);
}

TEST_CASE("convert: never more than k and never fewer than min(k, |F|)") {
    for (unsigned seed = 850; seed < 858; ++seed) {
        Instance inst = random_instance(seed, 6, 5, 2, 1, 1.0);
        RoundingOptions ro;
        const PseudoSolution pseudo = iterative_round(inst, ro);
        ConversionConfig cfg;
        cfg.beta = 0.0;  // discourage pruning; exercise the enumeration path
        const ConversionResult res = convert(inst, pseudo, cfg);
        CHECK(static_cast<int>(res.centers.size()) <= inst.k());
        CHECK(static_cast<int>(res.centers.size()) >=
              std::min(inst.k(), static_cast<int>(inst.facilities().size())));
    }
}

TEST_CASE("beta search: zero-cost pseudo-solutions stay at cost zero") {
    // Clients sit exactly on facilities; two centers cover everything.
    std::vector<std::vector<double>> pts{{0}, {7}, {0}, {7}, {3}};
    std::vector<Group> groups{Group{"", {{0, 0.5}, {1, 0.5}}}};
    Instance inst = Instance::from_points(pts, {0, 1}, {2, 3, 4}, groups, 2, 1.0);
    PseudoSolution pseudo;
    pseudo.centers = CenterSet::of({2, 3, 4});
    pseudo.cost = evaluate(inst, pseudo.centers);
    REQUIRE(pseudo.cost.objective == 0.0);
    ConversionConfig cfg;
    const ConversionResult res = convert_with_beta_search(inst, pseudo, cfg);
    CHECK(static_cast<int>(res.centers.size()) <= 2);
    CHECK(evaluate(inst, res.centers).objective == 0.0);
}

TEST_CASE("pipeline on micro instances stays within the end-to-end factor") {
    const double factor = 5.0 + 2.0 * std::sqrt(6.0) + 0.5;
    for (unsigned seed = 860; seed < 866; ++seed) {
        Instance base = random_instance(seed, 6, 4, 2, 1, 1.0);
        const auto [opt_centers, opt] = brute_force_opt(base);
        double best = std::numeric_limits<double>::infinity();
        ConversionConfig cfg;
        cfg.delta = 0.05;
        cfg.epsilon_prime = 0.9;
        cfg.t = 1;
        SparsifyStream stream(base, 1);
        while (auto cand = stream.next()) {
            RoundingOptions ro;
            const PseudoSolution pseudo = iterative_round(cand->instance, ro);
            const ConversionResult res = convert_with_beta_search(cand->instance, pseudo, cfg);
            best = std::min(best, evaluate(base, res.centers).objective);
        }
        CHECK(best <= factor * opt.objective + 1e-12);
    }
}

TEST_CASE("convert on a certified sparse instance meets the conversion bound") {
    // Clients cluster tightly at three locations; three facilities sit on the
    // clusters and a fourth sits far away with nothing near it. The instance
    // is verifiably opt/(m t)-sparse even for large t: the only facility away
    // from the optimum has an empty inner ball.
    std::vector<std::vector<double>> pts;
    std::vector<Group> groups(1);
    const double hubs[3] = {0.0, 40.0, 80.0};
    for (int h = 0; h < 3; ++h)
        for (int c = 0; c < 3; ++c) {
            pts.push_back({hubs[h] + 0.1 * (c + 1)});
            groups[0].members.push_back({static_cast<int>(pts.size()) - 1, 1.0 / 9.0});
        }
    std::vector<PointId> clients;
    for (int i = 0; i < 9; ++i) clients.push_back(i);
    std::vector<PointId> facilities;
    for (double x : {0.0, 40.0, 80.0, 200.0}) {
        pts.push_back({x});
        facilities.push_back(static_cast<int>(pts.size()) - 1);
    }
    Instance inst = Instance::from_points(pts, clients, facilities, groups, 3, 1.0);

    const auto [opt_centers, opt_cost] = brute_force_opt(inst);
    const double opt = opt_cost.objective;
    REQUIRE(opt > 0.0);

    ConversionConfig cfg;
    cfg.delta = 0.05;
    cfg.epsilon_prime = 0.9;
    cfg.t = 244;  // the smallest integer with t >= 4(1+3/delta)^p at p=1
    REQUIRE(is_alpha_sparse(inst, opt / (inst.num_groups() * cfg.t), opt_centers));

    PseudoSolution pseudo;
    pseudo.centers = CenterSet::of(facilities);  // k+1 centers
    pseudo.cost = evaluate(inst, pseudo.centers);

    const double c1 = 1.0 + 3.0 / cfg.delta;
    cfg.beta = 2.0 / (inst.num_groups() * cfg.t) * (opt + c1 * pseudo.cost.objective);
    const ConversionResult res = convert(inst, pseudo, cfg);
    CHECK(static_cast<int>(res.centers.size()) <= inst.k());
    // Either the pruning exit (cost(T) plus m beta) or the enumeration route
    // (a constant times cost(T) + opt) must cover the result.
    const double m = inst.num_groups();
    const double bound = std::max(pseudo.cost.objective + m * cfg.beta,
                                  (1.0 + (1.0 + cfg.epsilon_prime)) * (pseudo.cost.objective + opt));
    CHECK(res.report.cost.objective <= bound * (1.0 + 1e-9) + 1e-12);
}

TEST_CASE("conversion report serializes to JSON") {
    Instance inst = random_instance(870, 6, 5, 2, 1, 1.0);
    RoundingOptions ro;
    const PseudoSolution pseudo = iterative_round(inst, ro);
    ConversionConfig cfg;
    const ConversionResult res = convert_with_beta_search(inst, pseudo, cfg);
    const std::string json = res.report.to_json();
    CHECK(json.find("\"path\"") != std::string::npos);
    CHECK(json.find("\"beta\"") != std::string::npos);
    CHECK(json.find("\"objective\"") != std::string::npos);
}
