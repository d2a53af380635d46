#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fairclust/lp.hpp"

using namespace fairclust;

namespace {

// Rank of the tight constraints at a point; equal to the variable count iff
// the point is a vertex of the feasible polyhedron.
int tight_rank(const LinearProgram& lp, const VertexSolution& sol, double tol = 1e-6) {
    std::vector<std::vector<double>> rows;
    const int n = lp.num_vars();
    for (const auto& row : lp.rows) {
        double lhs = 0.0;
        std::vector<double> dense(static_cast<std::size_t>(n), 0.0);
        for (const auto& t : row.terms) {
            lhs += t.coeff * sol.value(t.var);
            dense[static_cast<std::size_t>(t.var)] += t.coeff;
        }
        const bool tight = row.rel == Relation::Eq || std::abs(lhs - row.rhs) <= tol * (1.0 + std::abs(row.rhs));
        if (tight) rows.push_back(std::move(dense));
    }
    for (int v = 0; v < n; ++v) {
        const double x = sol.value(v);
        if (std::abs(x) <= tol || (lp.upper[static_cast<std::size_t>(v)] != kInf &&
                                   std::abs(x - lp.upper[static_cast<std::size_t>(v)]) <= tol)) {
            std::vector<double> dense(static_cast<std::size_t>(n), 0.0);
            dense[static_cast<std::size_t>(v)] = 1.0;
            rows.push_back(std::move(dense));
        }
    }
    // Gaussian elimination.
    int rank = 0;
    for (int col = 0; col < n && rank < static_cast<int>(rows.size()); ++col) {
        int piv = -1;
        double best = 1e-9;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (std::abs(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) > best) {
                best = std::abs(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]);
                piv = r;
            }
        if (piv < 0) continue;
        std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(piv)]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
            if (r == rank) continue;
            const double f = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                             rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(col)];
            if (f == 0.0) continue;
            for (int c2 = 0; c2 < n; ++c2)
                rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c2)] -=
                    f * rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c2)];
        }
        ++rank;
    }
    return rank;
}

}  // namespace

TEST_CASE("minimum of simple lower bounds") {
    LinearProgram lp;
    const int z = lp.add_variable(1.0);
    lp.add_term(lp.add_row(Relation::GreaterEq, 3.0), z, 1.0);
    lp.add_term(lp.add_row(Relation::GreaterEq, 5.0), z, 1.0);
    const auto sol = solve_to_vertex(lp);
    CHECK(sol.value(z) == doctest::Approx(5.0));
    CHECK(sol.objective_value == doctest::Approx(5.0));
}

TEST_CASE("partition matroid bases solve integrally") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        LinearProgram lp;
        const int parts = 2 + static_cast<int>(rng() % 4);
        std::vector<std::vector<int>> vars(static_cast<std::size_t>(parts));
        for (int j = 0; j < parts; ++j)
            for (unsigned v = 0; v < 1 + rng() % 4; ++v)
                vars[static_cast<std::size_t>(j)].push_back(lp.add_variable(u(rng), 1.0));
        for (int j = 0; j < parts; ++j) {
            const int row = lp.add_row(Relation::Eq, 1.0);
            for (int v : vars[static_cast<std::size_t>(j)]) lp.add_term(row, v, 1.0);
        }
        const auto sol = solve_to_vertex(lp);
        for (double v : sol.values) CHECK((std::abs(v) < 1e-7 || std::abs(v - 1.0) < 1e-7));
        CHECK(sol.support.size() == static_cast<std::size_t>(parts));
    }
}

TEST_CASE("matroid polytope with extra constraints keeps support <= k+m") {
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937 rng(500 + static_cast<unsigned>(trial));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const int k = 1 + static_cast<int>(rng() % 6);
        const int m = static_cast<int>(rng() % 4);
        LinearProgram lp;
        std::vector<std::vector<int>> vars(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
            for (unsigned v = 0; v < 1 + rng() % 4; ++v)
                vars[static_cast<std::size_t>(j)].push_back(lp.add_variable(u(rng), 1.0));
        for (int j = 0; j < k; ++j) {
            const int row = lp.add_row(Relation::Eq, 1.0);
            for (int v : vars[static_cast<std::size_t>(j)]) lp.add_term(row, v, 1.0);
        }
        for (int e = 0; e < m; ++e) {
            double center = 0.0;
            std::vector<double> coeff(static_cast<std::size_t>(lp.num_vars()), 0.0);
            for (int j = 0; j < k; ++j)
                for (int v : vars[static_cast<std::size_t>(j)]) {
                    coeff[static_cast<std::size_t>(v)] = 2.0 * u(rng);
                    center += coeff[static_cast<std::size_t>(v)] / static_cast<double>(vars[static_cast<std::size_t>(j)].size());
                }
            const int row = lp.add_row(Relation::LessEq, center + 0.1 + u(rng));
            for (int v = 0; v < lp.num_vars(); ++v)
                if (coeff[static_cast<std::size_t>(v)] != 0.0) lp.add_term(row, v, coeff[static_cast<std::size_t>(v)]);
        }
        const auto sol = solve_to_vertex(lp);
        CHECK(static_cast<int>(sol.support.size()) <= k + m);
        // The returned point is a genuine vertex: tight constraints have full rank.
        CHECK(tight_rank(lp, sol) == lp.num_vars());
    }
}

TEST_CASE("solution matches exhaustive vertex enumeration on tiny LPs") {
    // Enumerate all basic solutions of a 3-variable system directly.
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        LinearProgram lp;
        for (int v = 0; v < 3; ++v) lp.add_variable(u(rng), 2.0);
        std::vector<std::vector<double>> A;
        std::vector<double> b;
        for (int r = 0; r < 3; ++r) {
            std::vector<double> row{u(rng), u(rng), u(rng)};
            const double rhs = 1.0 + std::abs(u(rng));
            const int lrow = lp.add_row(Relation::LessEq, rhs);
            for (int v = 0; v < 3; ++v) lp.add_term(lrow, v, row[static_cast<std::size_t>(v)]);
            A.push_back(row);
            b.push_back(rhs);
        }
        const auto sol = solve_to_vertex(lp);

        // All constraints as equalities: rows, bounds at 0, bounds at 2.
        struct Eq {
            std::vector<double> a;
            double rhs;
        };
        std::vector<Eq> eqs;
        for (std::size_t r = 0; r < A.size(); ++r) eqs.push_back({A[r], b[r]});
        for (int v = 0; v < 3; ++v) {
            std::vector<double> a(3, 0.0);
            a[static_cast<std::size_t>(v)] = 1.0;
            eqs.push_back({a, 0.0});
            eqs.push_back({a, 2.0});
        }
        double best = std::numeric_limits<double>::infinity();
        const int n = static_cast<int>(eqs.size());
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int l = j + 1; l < n; ++l) {
                    // Solve the 3x3 system by Cramer's rule.
                    const auto& e1 = eqs[static_cast<std::size_t>(i)];
                    const auto& e2 = eqs[static_cast<std::size_t>(j)];
                    const auto& e3 = eqs[static_cast<std::size_t>(l)];
                    auto det3 = [](double a, double b2, double c, double d, double e, double f,
                                   double g, double h, double i2) {
                        return a * (e * i2 - f * h) - b2 * (d * i2 - f * g) + c * (d * h - e * g);
                    };
                    const double D = det3(e1.a[0], e1.a[1], e1.a[2], e2.a[0], e2.a[1], e2.a[2],
                                          e3.a[0], e3.a[1], e3.a[2]);
                    if (std::abs(D) < 1e-9) continue;
                    const double x0 = det3(e1.rhs, e1.a[1], e1.a[2], e2.rhs, e2.a[1], e2.a[2],
                                           e3.rhs, e3.a[1], e3.a[2]) / D;
                    const double x1 = det3(e1.a[0], e1.rhs, e1.a[2], e2.a[0], e2.rhs, e2.a[2],
                                           e3.a[0], e3.rhs, e3.a[2]) / D;
                    const double x2 = det3(e1.a[0], e1.a[1], e1.rhs, e2.a[0], e2.a[1], e2.rhs,
                                           e3.a[0], e3.a[1], e3.rhs) / D;
                    bool feasible = x0 >= -1e-9 && x1 >= -1e-9 && x2 >= -1e-9 && x0 <= 2 + 1e-9 &&
                                    x1 <= 2 + 1e-9 && x2 <= 2 + 1e-9;
                    for (std::size_t r = 0; r < A.size() && feasible; ++r)
                        if (A[r][0] * x0 + A[r][1] * x1 + A[r][2] * x2 > b[r] + 1e-9) feasible = false;
                    if (!feasible) continue;
                    best = std::min(best, lp.objective[0] * x0 + lp.objective[1] * x1 +
                                              lp.objective[2] * x2);
                }
        REQUIRE(std::isfinite(best));
        CHECK(sol.objective_value == doctest::Approx(best).epsilon(1e-7));
    }
}

TEST_CASE("infeasible and unbounded are reported as such") {
    {
        LinearProgram lp;
        const int x = lp.add_variable(0.0);
        lp.add_term(lp.add_row(Relation::LessEq, 1.0), x, 1.0);
        lp.add_term(lp.add_row(Relation::GreaterEq, 2.0), x, 1.0);
        CHECK_THROWS_WITH(solve_to_vertex(lp), "infeasible");
    }
    {
        LinearProgram lp;
        const int x = lp.add_variable(-1.0);
        lp.add_term(lp.add_row(Relation::GreaterEq, 0.0), x, 1.0);
        CHECK_THROWS_WITH(solve_to_vertex(lp), "unbounded");
    }
}

TEST_CASE("re-solving the same LP is bit-identical") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LinearProgram lp;
    for (int v = 0; v < 12; ++v) lp.add_variable(u(rng), 1.5);
    for (int r = 0; r < 8; ++r) {
        const int row = lp.add_row(r % 3 == 0 ? Relation::Eq : Relation::LessEq, 1.0 + std::abs(u(rng)));
        for (int v = 0; v < 12; ++v)
            if (rng() % 2) lp.add_term(row, v, u(rng) + 1.2);
    }
    const auto a = solve_to_vertex(lp);
    const auto b = solve_to_vertex(lp);
    CHECK(a.objective_value == b.objective_value);
    CHECK(a.values == b.values);
    CHECK(a.support == b.support);
}

TEST_CASE("degenerate LPs terminate (anti-cycling)") {
    // Many redundant constraints through the origin.
    LinearProgram lp;
    for (int v = 0; v < 6; ++v) lp.add_variable(v % 2 ? 1.0 : -1.0, 1.0);
    for (int r = 0; r < 12; ++r) {
        const int row = lp.add_row(Relation::LessEq, 0.0);
        lp.add_term(row, r % 6, 1.0);
        lp.add_term(row, (r + 1) % 6, -1.0);
    }
    const auto sol = solve_to_vertex(lp);
    // All variables forced equal; minimizing sum of alternating signs keeps them at a bound.
    CHECK(std::isfinite(sol.objective_value));
}

TEST_CASE("upper bounds participate (bound flips)") {
    LinearProgram lp;
    const int x = lp.add_variable(-2.0, 0.75);
    const int y = lp.add_variable(-1.0, 10.0);
    const int row = lp.add_row(Relation::LessEq, 1.0);
    lp.add_term(row, x, 1.0);
    lp.add_term(row, y, 1.0);
    const auto sol = solve_to_vertex(lp);
    CHECK(sol.value(x) == doctest::Approx(0.75));
    CHECK(sol.value(y) == doctest::Approx(0.25));
}

TEST_CASE("LP-format dump round-trips the structure textually") {
    LinearProgram lp;
    lp.add_variable(1.0, kInf, "z");
    lp.add_variable(0.0, 1.0, "y0");
    const int row = lp.add_row(Relation::GreaterEq, 2.5);
    lp.add_term(row, 0, 1.0);
    lp.add_term(row, 1, -3.0);
    const std::string text = lp.to_lp_format();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find(">= 2.5") != std::string::npos);
    CHECK(text.find("0 <= y0 <= 1") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("pivot cap reports a stall") {
    LinearProgram lp;
    for (int v = 0; v < 10; ++v) lp.add_variable(-1.0, 5.0);
    for (int r = 0; r < 6; ++r) {
        const int row = lp.add_row(Relation::LessEq, 10.0);
        for (int v = 0; v < 10; ++v) lp.add_term(row, v, 1.0 + (r * 10 + v) % 3);
    }
    SimplexOptions opts;
    opts.max_pivots = 1;
    CHECK_THROWS_WITH(solve_to_vertex(lp, opts), "stalled");
}
