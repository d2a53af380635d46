#ifndef FAIRCLUST_LP_HPP
#define FAIRCLUST_LP_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairclust {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, Eq, GreaterEq };

/// Minimization LP: variables have lower bound 0 and an optional finite upper
/// bound; constraints are sparse rows with <=, =, >= relations.
struct LinearProgram {
    struct Term {
        int var = 0;
        double coeff = 0.0;
    };
    struct Row {
        std::vector<Term> terms;
        Relation rel = Relation::LessEq;
        double rhs = 0.0;
    };

    std::vector<double> objective;
    std::vector<double> upper;
    std::vector<Row> rows;
    std::vector<std::string> names;  // optional, used by the LP-format dump

    int add_variable(double cost, double upper_bound = kInf, std::string name = {});
    int add_row(Relation rel, double rhs);
    void add_term(int row, int var, double coeff);
    int num_vars() const { return static_cast<int>(objective.size()); }

    /// Text dump in the fixed-column LP interchange style (objective line,
    /// constraint lines, bounds) for external cross-checking.
    std::string to_lp_format() const;
};

/// Optimal basic feasible solution. `values` covers the structural variables;
/// `support` lists indices with value above the support tolerance.
struct VertexSolution {
    std::vector<double> values;
    double objective_value = 0.0;
    std::vector<int> support;

    double value(int var) const { return values[static_cast<std::size_t>(var)]; }
};

struct SimplexOptions {
    double feas_tol = 1e-7;
    double support_tol = 1e-6;
    double pivot_tol = 1e-9;
    double opt_tol = 1e-9;
    std::uint64_t max_pivots = 1'000'000;
    std::uint64_t refactor_every = 128;
};

class LpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-phase simplex over bounded variables. Deterministic: Dantzig pricing
/// with lowest-index tie-breaks, switching to Bland's rule after 10 * (#vars)
/// degenerate pivots. Throws LpError("infeasible"), LpError("unbounded"), or
/// LpError("stalled") on the pivot cap.
VertexSolution solve_to_vertex(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace fairclust

#endif  // FAIRCLUST_LP_HPP
