#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "fairclust/sparsify.hpp"
#include "test_util.hpp"

using namespace fairclust;
using fairclust::testing::line_instance;
using fairclust::testing::random_instance;

TEST_CASE("fball is a strict ball") {
    Instance inst = line_instance({0.0}, {1.0, 2.0, 3.0}, 1, 1.0);
    CHECK(fball(inst, 0, 0.0).empty());
    // The facility at exactly the radius is excluded.
    const auto at2 = fball(inst, 0, 2.0);
    CHECK(at2 == std::vector<PointId>{1});
    const auto all = fball(inst, 0, 100.0);
    CHECK(all.size() == 3);
}

TEST_CASE("cball_mass sums weights strictly inside the radius") {
    Instance inst = line_instance({0.0, 1.0, 2.0, 3.0}, {0.0}, 1, 1.0);
    CHECK(cball_mass(inst, 0, 0, 0.0) == 0.0);
    // Uniform weights 1/4 and the whole group inside.
    CHECK(cball_mass(inst, 0, 0, 100.0) == doctest::Approx(1.0));
    // Direct weighted count on a random instance.
    Instance rnd = random_instance(500, 9, 4, 2, 3, 1.0);
    for (int s = 0; s < rnd.num_groups(); ++s)
        for (double r : {0.5, 2.0, 7.5}) {
            double direct = 0.0;
            for (const auto& mem : rnd.groups()[static_cast<std::size_t>(s)].members)
                if (rnd.distance(0, mem.client) < r) direct += mem.weight;
            CHECK(cball_mass(rnd, s, 0, r) == doctest::Approx(direct));
        }
}

TEST_CASE("candidate stream: counts, the base emission, and (j,j) no-ops") {
    Instance inst = line_instance({0.0, 1.0, 5.0}, {0.0, 2.0, 5.0}, 1, 1.0);
    REQUIRE(inst.num_groups() == 1);
    SparsifyStream stream(inst, 1);
    std::vector<SparsifiedInstance> got;
    while (auto c = stream.next()) got.push_back(std::move(*c));
    // 1 unmodified + 3*3 ordered pairs generated, none truncated; discards
    // only drop candidates with fewer than k facilities.
    CHECK(stream.generated() == 10);
    CHECK_FALSE(stream.truncated());
    REQUIRE_FALSE(got.empty());
    CHECK(got[0].provenance.pair_sequence.empty());
    CHECK(got[0].instance.facilities() == inst.facilities());
    // Pairs (j, j) remove a radius-zero ball, i.e. nothing.
    for (const auto& cand : got) {
        if (cand.provenance.pair_sequence.size() == 1 &&
            cand.provenance.pair_sequence[0].first == cand.provenance.pair_sequence[0].second)
            CHECK(cand.instance.facilities() == inst.facilities());
    }
}

TEST_CASE("already-sparse instances are covered by the unmodified emission") {
    // Spread-out points: no facility is dense, so the base instance passes.
    Instance inst = line_instance({0.0, 10.0, 20.0}, {0.0, 10.0, 20.0}, 2, 1.0);
    const auto [opt_centers, opt] = brute_force_opt(inst);
    SparsifyStream stream(inst, 1);
    auto first = stream.next();
    REQUIRE(first.has_value());
    CHECK(first->provenance.pair_sequence.empty());
    CHECK(is_alpha_sparse(first->instance, opt.objective, opt_centers));
}

TEST_CASE("micro instances: some candidate is sparse with unchanged optimum") {
    for (unsigned seed = 600; seed < 606; ++seed) {
        Instance inst = random_instance(seed, 6 + seed % 3, 4 + seed % 2, 2, 1, 1.0);
        const auto [base_centers, base_cost] = brute_force_opt(inst);
        const double alpha = base_cost.objective;  // opt/(mt), m = t = 1
        bool found = false;
        SparsifyStream stream(inst, 1);
        while (auto cand = stream.next()) {
            const auto [cc, cp] = brute_force_opt(cand->instance);
            if (std::abs(cp.objective - base_cost.objective) > 1e-9 * std::max(1.0, base_cost.objective))
                continue;
            if (is_alpha_sparse(cand->instance, alpha, cc)) {
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("is_alpha_sparse oracle") {
    Instance inst = random_instance(610, 7, 4, 2, 2, 1.0);
    const auto [opt_centers, opt] = brute_force_opt(inst);
    // Facilities of the optimum have d(j, OPT) = 0 and never violate.
    Instance only_opt = inst.with_facilities(opt_centers.ids);
    CHECK(is_alpha_sparse(only_opt, 0.0, opt_centers));
    // An infinite threshold accepts anything.
    CHECK(is_alpha_sparse(inst, std::numeric_limits<double>::infinity(), opt_centers));
    // A packed facility far from the optimum violates small alpha: a heavy
    // client pins the optimum at 0 while three clients sit in the far
    // facility's inner ball.
    std::vector<std::vector<double>> pts{{0.0}, {199.9}, {200.1}, {200.05}, {0.0}, {200.0}};
    std::vector<Group> groups{Group{"", {{0, 1000.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}}};
    Instance packed = Instance::from_points(pts, {0, 1, 2, 3}, {4, 5}, groups, 1, 1.0);
    const auto [pc, pcost] = brute_force_opt(packed);
    REQUIRE(pc.contains(4));  // the heavy client decides the optimum
    // Facility 5 sits 200 away from the optimum with client mass 3 inside
    // its inner ball of radius 200/3.
    CHECK_FALSE(is_alpha_sparse(packed, 1e-6, pc));
    // ... but a threshold above (2/3*200)^1 * 3 = 400 accepts it.
    CHECK(is_alpha_sparse(packed, 401.0, pc));
}

TEST_CASE("dense-facility balls from the removal argument are disjoint") {
    // Build the canonical pair sequence: repeatedly take the lowest-id dense
    // facility (w.r.t. the base optimum) among the survivors, paired with its
    // closest optimal center, and check the client balls never overlap.
    for (unsigned seed = 620; seed < 626; ++seed) {
        Instance inst = random_instance(seed, 8, 5, 2, 2, 1.0);
        REQUIRE(groups_disjoint(inst));
        const auto [opt_centers, opt] = brute_force_opt(inst);
        const double alpha = opt.objective / (inst.num_groups() * 1.0);

        std::vector<PointId> remaining = inst.facilities();
        std::vector<std::pair<PointId, double>> picked;  // (dense facility, inner radius)
        while (true) {
            PointId dense = -1;
            double dense_dopt = 0.0;
            for (PointId j : remaining) {
                double dopt = std::numeric_limits<double>::infinity();
                for (PointId o : opt_centers.ids) dopt = std::min(dopt, inst.distance(j, o));
                if (dopt == 0.0) continue;
                bool violates = false;
                for (int s = 0; s < inst.num_groups() && !violates; ++s)
                    if (pow_p(2.0 / 3.0 * dopt, inst.p()) * cball_mass(inst, s, j, dopt / 3.0) >
                        alpha * (1 + 1e-12))
                        violates = true;
                if (violates) {
                    dense = j;
                    dense_dopt = dopt;
                    break;
                }
            }
            if (dense < 0) break;
            picked.emplace_back(dense, dense_dopt / 3.0);
            std::vector<PointId> next;
            for (PointId j : remaining)
                if (inst.distance(dense, j) >= dense_dopt) next.push_back(j);
            remaining = std::move(next);
        }
        for (int s = 0; s < inst.num_groups(); ++s) {
            for (std::size_t a = 0; a < picked.size(); ++a)
                for (std::size_t b = a + 1; b < picked.size(); ++b) {
                    // Client balls B_{a,s} and B_{b,s} share no member.
                    for (const auto& mem : inst.groups()[static_cast<std::size_t>(s)].members) {
                        const bool in_a = inst.distance(picked[a].first, mem.client) < picked[a].second;
                        const bool in_b = inst.distance(picked[b].first, mem.client) < picked[b].second;
                        CHECK_FALSE((in_a && in_b));
                    }
                }
        }
    }
}

TEST_CASE("removing facilities never lowers the optimum") {
    for (unsigned seed = 630; seed < 636; ++seed) {
        Instance inst = random_instance(seed, 7, 5, 2, 2, 1.0);
        const double base = brute_force_opt(inst).second.objective;
        SparsifyStream stream(inst, 1, SparsifyCaps{40});
        while (auto cand = stream.next()) {
            CHECK(brute_force_opt(cand->instance).second.objective >= base - 1e-12);
        }
    }
}

TEST_CASE("overlapping groups raise the warning flag") {
    Instance base = random_instance(640, 6, 4, 2, 1, 1.0);
    std::vector<Group> overlapping{base.groups()[0], base.groups()[0]};
    Instance inst(base.clients(), base.facilities(), base.matrix(), overlapping, 2, 1.0);
    SparsifyStream stream(inst, 1);
    CHECK(stream.overlapping_groups_warning());
    SparsifyStream clean(base, 1);
    CHECK_FALSE(clean.overlapping_groups_warning());
}

TEST_CASE("cap exhaustion truncates the stream") {
    Instance inst = random_instance(650, 6, 5, 2, 2, 1.0);
    SparsifyStream stream(inst, 2, SparsifyCaps{5});
    int emitted = 0;
    while (stream.next()) ++emitted;
    CHECK(stream.truncated());
    CHECK(emitted <= 5);
}
