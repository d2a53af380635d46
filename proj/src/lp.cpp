#include "fairclust/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fairclust {

int LinearProgram::add_variable(double cost, double upper_bound, std::string name) {
    objective.push_back(cost);
    upper.push_back(upper_bound);
    if (!name.empty() || !names.empty()) {
        names.resize(objective.size());
        names.back() = std::move(name);
    }
    return static_cast<int>(objective.size()) - 1;
}

int LinearProgram::add_row(Relation rel, double rhs) {
    rows.push_back(Row{{}, rel, rhs});
    return static_cast<int>(rows.size()) - 1;
}

void LinearProgram::add_term(int row, int var, double coeff) {
    rows[static_cast<std::size_t>(row)].terms.push_back(Term{var, coeff});
}

std::string LinearProgram::to_lp_format() const {
    auto var_name = [&](int v) {
        if (v < static_cast<int>(names.size()) && !names[static_cast<std::size_t>(v)].empty())
            return names[static_cast<std::size_t>(v)];
        return "x" + std::to_string(v);
    };
    auto num = [](double x) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "Minimize\n obj:";
    for (int v = 0; v < num_vars(); ++v) {
        const double c = objective[static_cast<std::size_t>(v)];
        if (c == 0.0) continue;
        out << (c >= 0 ? " + " : " - ") << num(std::abs(c)) << ' ' << var_name(v);
    }
    out << "\nSubject To\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << " c" << r << ':';
        for (const auto& t : rows[r].terms)
            out << (t.coeff >= 0 ? " + " : " - ") << num(std::abs(t.coeff)) << ' '
                << var_name(t.var);
        switch (rows[r].rel) {
            case Relation::LessEq: out << " <= "; break;
            case Relation::Eq: out << " = "; break;
            case Relation::GreaterEq: out << " >= "; break;
        }
        out << num(rows[r].rhs) << '\n';
    }
    out << "Bounds\n";
    for (int v = 0; v < num_vars(); ++v) {
        if (upper[static_cast<std::size_t>(v)] == kInf)
            out << ' ' << var_name(v) << " >= 0\n";
        else
            out << " 0 <= " << var_name(v) << " <= " << num(upper[static_cast<std::size_t>(v)])
                << '\n';
    }
    out << "End\n";
    return out.str();
}

namespace {

struct SparseCol {
    std::vector<std::pair<int, double>> entries;  // (row, coeff), row-sorted
};

enum class VarState : unsigned char { AtLower, AtUpper, Basic };

// Revised simplex with an explicit dense basis inverse. Variables live in
// [0, ub]; nonbasic variables sit at a bound. Phase 1 minimizes the sum of
// artificials on rows not satisfied by the slack start.
class Simplex {
public:
    Simplex(const LinearProgram& lp, const SimplexOptions& opts) : lp_(lp), opts_(opts) { build(); }

    VertexSolution run() {
        if (n_rows_ > 0) {
            if (has_artificials_) {
                run_phase(cost1_, /*phase1=*/true);
                if (phase1_objective() > opts_.feas_tol) throw LpError("infeasible");
                drive_out_artificials();
                for (int c = first_art_; c < n_cols_; ++c) ub_[static_cast<std::size_t>(c)] = 0.0;
            }
            run_phase(cost2_, /*phase1=*/false);
        } else {
            // No constraints: each variable sits at whichever bound minimizes cost.
            for (int c = 0; c < n_struct_; ++c) {
                if (cost2_[static_cast<std::size_t>(c)] < 0.0) {
                    if (ub_[static_cast<std::size_t>(c)] == kInf) throw LpError("unbounded");
                    state_[static_cast<std::size_t>(c)] = VarState::AtUpper;
                }
            }
        }
        return extract();
    }

private:
    const LinearProgram& lp_;
    SimplexOptions opts_;

    int n_rows_ = 0;
    int n_struct_ = 0;
    int n_cols_ = 0;
    int first_art_ = 0;
    bool has_artificials_ = false;

    std::vector<SparseCol> cols_;
    std::vector<double> rhs_;    // normalized so rhs >= 0
    std::vector<double> ub_;
    std::vector<double> cost1_;  // phase-1 costs (1 on artificials)
    std::vector<double> cost2_;

    std::vector<VarState> state_;
    std::vector<int> basis_;
    std::vector<double> xb_;
    std::vector<double> binv_;  // n_rows_ x n_rows_, row major

    bool bland_ = false;
    std::uint64_t degenerate_pivots_ = 0;
    std::uint64_t pivots_ = 0;
    std::uint64_t since_refactor_ = 0;

    double* binv_row(int r) { return binv_.data() + static_cast<std::size_t>(r) * n_rows_; }
    const double* binv_row(int r) const {
        return binv_.data() + static_cast<std::size_t>(r) * n_rows_;
    }

    void build() {
        n_rows_ = static_cast<int>(lp_.rows.size());
        n_struct_ = lp_.num_vars();

        std::vector<LinearProgram::Row> rows = lp_.rows;
        rhs_.resize(static_cast<std::size_t>(n_rows_));
        for (int r = 0; r < n_rows_; ++r) {
            auto& row = rows[static_cast<std::size_t>(r)];
            if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite rhs");
            // Row equilibration: divide by the largest coefficient magnitude.
            // Keeps near-parallel row families (cutting-plane masters) from
            // wrecking the basis conditioning.
            double scale = 0.0;
            for (const auto& t : row.terms) scale = std::max(scale, std::abs(t.coeff));
            if (scale > 0.0 && (scale > 16.0 || scale < 1.0 / 16.0)) {
                const double inv = 1.0 / scale;
                for (auto& t : row.terms) t.coeff *= inv;
                row.rhs *= inv;
            }
            if (row.rhs < 0.0) {
                row.rhs = -row.rhs;
                for (auto& t : row.terms) t.coeff = -t.coeff;
                row.rel = row.rel == Relation::LessEq ? Relation::GreaterEq
                          : row.rel == Relation::GreaterEq ? Relation::LessEq
                                                           : Relation::Eq;
            }
            rhs_[static_cast<std::size_t>(r)] = row.rhs;
        }

        cols_.assign(static_cast<std::size_t>(n_struct_), {});
        for (int r = 0; r < n_rows_; ++r) {
            for (const auto& t : rows[static_cast<std::size_t>(r)].terms) {
                if (t.var < 0 || t.var >= n_struct_)
                    throw std::invalid_argument("constraint references undeclared variable");
                if (!std::isfinite(t.coeff)) throw std::invalid_argument("non-finite coefficient");
                cols_[static_cast<std::size_t>(t.var)].entries.emplace_back(r, t.coeff);
            }
        }
        // Merge duplicate (row, var) terms.
        for (auto& col : cols_) {
            std::sort(col.entries.begin(), col.entries.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<std::pair<int, double>> merged;
            for (const auto& e : col.entries) {
                if (!merged.empty() && merged.back().first == e.first)
                    merged.back().second += e.second;
                else
                    merged.push_back(e);
            }
            col.entries = std::move(merged);
        }

        ub_ = lp_.upper;
        cost2_ = lp_.objective;
        basis_.assign(static_cast<std::size_t>(n_rows_), -1);

        // Slack / surplus columns.
        for (int r = 0; r < n_rows_; ++r) {
            const Relation rel = rows[static_cast<std::size_t>(r)].rel;
            if (rel == Relation::Eq) continue;
            SparseCol col;
            col.entries.emplace_back(r, rel == Relation::LessEq ? 1.0 : -1.0);
            cols_.push_back(std::move(col));
            ub_.push_back(kInf);
            cost2_.push_back(0.0);
            if (rel == Relation::LessEq) basis_[static_cast<std::size_t>(r)] = static_cast<int>(cols_.size()) - 1;
        }
        // Artificial columns for rows without a feasible slack start.
        first_art_ = static_cast<int>(cols_.size());
        for (int r = 0; r < n_rows_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] >= 0) continue;
            SparseCol col;
            col.entries.emplace_back(r, 1.0);
            cols_.push_back(std::move(col));
            ub_.push_back(kInf);
            cost2_.push_back(0.0);
            basis_[static_cast<std::size_t>(r)] = static_cast<int>(cols_.size()) - 1;
            has_artificials_ = true;
        }
        n_cols_ = static_cast<int>(cols_.size());
        cost1_.assign(static_cast<std::size_t>(n_cols_), 0.0);
        for (int c = first_art_; c < n_cols_; ++c) cost1_[static_cast<std::size_t>(c)] = 1.0;

        state_.assign(static_cast<std::size_t>(n_cols_), VarState::AtLower);
        for (int r = 0; r < n_rows_; ++r) state_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = VarState::Basic;

        xb_ = rhs_;
        binv_.assign(static_cast<std::size_t>(n_rows_) * n_rows_, 0.0);
        for (int r = 0; r < n_rows_; ++r) binv(r, r) = 1.0;

        for (double u : lp_.upper)
            if (u < 0.0 || std::isnan(u)) throw std::invalid_argument("invalid upper bound");
    }

    double& binv(int r, int c) { return binv_[static_cast<std::size_t>(r) * n_rows_ + c]; }

    double phase1_objective() const {
        double s = 0.0;
        for (int r = 0; r < n_rows_; ++r)
            if (basis_[static_cast<std::size_t>(r)] >= first_art_) s += xb_[static_cast<std::size_t>(r)];
        return s;
    }

    // y^T = c_B^T * Binv, skipping zero basic costs.
    void btran(const std::vector<double>& cost, std::vector<double>& y) const {
        y.assign(static_cast<std::size_t>(n_rows_), 0.0);
        for (int r = 0; r < n_rows_; ++r) {
            const double cb = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
            if (cb == 0.0) continue;
            const double* row = binv_row(r);
            for (int j = 0; j < n_rows_; ++j) y[static_cast<std::size_t>(j)] += cb * row[j];
        }
    }

    void ftran(int c, std::vector<double>& out) const {
        out.assign(static_cast<std::size_t>(n_rows_), 0.0);
        for (const auto& [row, coeff] : cols_[static_cast<std::size_t>(c)].entries) {
            for (int r = 0; r < n_rows_; ++r)
                out[static_cast<std::size_t>(r)] += coeff * binv_row(r)[row];
        }
    }

    double sparse_dot(const std::vector<double>& y, int c) const {
        double s = 0.0;
        for (const auto& [row, coeff] : cols_[static_cast<std::size_t>(c)].entries)
            s += y[static_cast<std::size_t>(row)] * coeff;
        return s;
    }

    void run_phase(const std::vector<double>& cost, bool phase1) {
        std::vector<double> y, col;
        std::vector<char> rejected(static_cast<std::size_t>(n_cols_), 0);
        int rejected_count = 0;
        bool accept_any_pivot = false;
        while (true) {
            if (pivots_ >= opts_.max_pivots) throw LpError("stalled");
            btran(cost, y);

            int entering = -1;
            double best_viol = opts_.opt_tol;
            for (int c = 0; c < n_cols_; ++c) {
                const VarState st = state_[static_cast<std::size_t>(c)];
                if (st == VarState::Basic || rejected[static_cast<std::size_t>(c)]) continue;
                if (!phase1 && c >= first_art_) continue;
                if (st == VarState::AtUpper && ub_[static_cast<std::size_t>(c)] == 0.0) continue;
                const double rc = cost[static_cast<std::size_t>(c)] - sparse_dot(y, c);
                const double viol = st == VarState::AtLower ? -rc : rc;
                if (viol > best_viol) {
                    entering = c;
                    best_viol = viol;
                    if (bland_) break;  // lowest index wins in Bland mode
                }
            }
            if (entering < 0) {
                // Every remaining candidate was rejected for tiny pivots:
                // allow them once more, accepting whatever pivot remains.
                if (rejected_count > 0 && !accept_any_pivot) {
                    std::fill(rejected.begin(), rejected.end(), 0);
                    rejected_count = 0;
                    accept_any_pivot = true;
                    continue;
                }
                return;  // optimal for this phase
            }

            ftran(entering, col);
            const double dir = state_[static_cast<std::size_t>(entering)] == VarState::AtLower ? 1.0 : -1.0;

            // Two-pass ratio test: find the tightest step, then pick a leaving
            // row with the largest pivot magnitude among near-ties (tie on
            // that -> smallest basic variable index). Choosing big pivots keeps
            // the basis inverse accurate on ill-conditioned masters.
            double t_min = ub_[static_cast<std::size_t>(entering)];
            auto row_step = [&](int r, double& t, bool& to_upper) {
                const double a = dir * col[static_cast<std::size_t>(r)];
                if (a > opts_.pivot_tol) {
                    t = xb_[static_cast<std::size_t>(r)] / a;
                    to_upper = false;
                } else if (a < -opts_.pivot_tol) {
                    const double u = ub_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
                    if (u == kInf) return false;
                    t = (u - xb_[static_cast<std::size_t>(r)]) / (-a);
                    to_upper = true;
                } else {
                    return false;
                }
                if (t < 0.0) t = 0.0;  // degenerate, beyond-bound noise
                return true;
            };
            for (int r = 0; r < n_rows_; ++r) {
                double t;
                bool to_upper;
                if (row_step(r, t, to_upper) && t < t_min) t_min = t;
            }
            if (t_min == kInf) throw LpError("unbounded");
            const double t_slack = 1e-9 * (1.0 + t_min);
            int leave_r = -1;
            bool leave_to_upper = false;
            double best_piv = 0.0;
            double t_best = t_min;
            for (int r = 0; r < n_rows_; ++r) {
                double t;
                bool to_upper;
                if (!row_step(r, t, to_upper) || t > t_min + t_slack) continue;
                const double piv = std::abs(col[static_cast<std::size_t>(r)]);
                if (piv > best_piv ||
                    (piv == best_piv && leave_r >= 0 &&
                     basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave_r)])) {
                    best_piv = piv;
                    leave_r = r;
                    leave_to_upper = to_upper;
                    t_best = t;
                }
            }
            if (t_best < 0.0) t_best = 0.0;

            // A pivot element this small would inject errors far above the
            // feasibility tolerance; look for a different entering column.
            if (leave_r >= 0 && best_piv < 1e-7 && !accept_any_pivot) {
                rejected[static_cast<std::size_t>(entering)] = 1;
                ++rejected_count;
                continue;
            }
            if (rejected_count > 0 || accept_any_pivot) {
                std::fill(rejected.begin(), rejected.end(), 0);
                rejected_count = 0;
                accept_any_pivot = false;
            }

            ++pivots_;
            if (leave_r < 0) {
                // Bound flip: the entering variable crosses to its other bound.
                for (int r = 0; r < n_rows_; ++r)
                    xb_[static_cast<std::size_t>(r)] -= dir * t_best * col[static_cast<std::size_t>(r)];
                state_[static_cast<std::size_t>(entering)] =
                    dir > 0 ? VarState::AtUpper : VarState::AtLower;
                continue;
            }

            if (t_best <= 1e-12) {
                if (++degenerate_pivots_ > 10ull * static_cast<std::uint64_t>(n_cols_))
                    bland_ = true;
            }
            pivot(leave_r, entering, dir, t_best, leave_to_upper, col);
            if (++since_refactor_ >= opts_.refactor_every) {
                refactorize();
                recompute_xb();
                since_refactor_ = 0;
                check_basic_bounds();
            }
        }
    }

    // Exact re-solution at a refactorization must sit inside bounds; a real
    // violation means earlier pivots lost feasibility and the run cannot be
    // trusted further.
    void check_basic_bounds() const {
        for (int r = 0; r < n_rows_; ++r) {
            const double x = xb_[static_cast<std::size_t>(r)];
            const double u = ub_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
            if (x < -1e-5 || (u != kInf && x > u + 1e-5))
                throw LpError("numerical breakdown: basis infeasible at refactorization");
        }
    }

    void pivot(int leave_r, int entering, double dir, double t, bool leave_to_upper,
               const std::vector<double>& col) {
        const int leaving = basis_[static_cast<std::size_t>(leave_r)];
        for (int r = 0; r < n_rows_; ++r) {
            if (r == leave_r) continue;
            xb_[static_cast<std::size_t>(r)] -= dir * t * col[static_cast<std::size_t>(r)];
        }
        const double enter_from = dir > 0 ? 0.0 : ub_[static_cast<std::size_t>(entering)];
        xb_[static_cast<std::size_t>(leave_r)] = enter_from + dir * t;

        state_[static_cast<std::size_t>(leaving)] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
        state_[static_cast<std::size_t>(entering)] = VarState::Basic;
        basis_[static_cast<std::size_t>(leave_r)] = entering;

        const double piv = col[static_cast<std::size_t>(leave_r)];
        double* prow = binv_row(leave_r);
        const double inv = 1.0 / piv;
        for (int j = 0; j < n_rows_; ++j) prow[j] *= inv;
        for (int r = 0; r < n_rows_; ++r) {
            if (r == leave_r) continue;
            const double f = col[static_cast<std::size_t>(r)];
            if (f == 0.0) continue;
            double* row = binv_row(r);
            for (int j = 0; j < n_rows_; ++j) row[j] -= f * prow[j];
        }
    }

    void refactorize() {
        // Rebuild Binv from the basis columns by Gauss-Jordan elimination.
        std::vector<double> a(static_cast<std::size_t>(n_rows_) * n_rows_, 0.0);
        for (int r = 0; r < n_rows_; ++r)
            for (const auto& [row, coeff] : cols_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])].entries)
                a[static_cast<std::size_t>(row) * n_rows_ + r] = coeff;
        std::vector<double> inv(static_cast<std::size_t>(n_rows_) * n_rows_, 0.0);
        for (int r = 0; r < n_rows_; ++r) inv[static_cast<std::size_t>(r) * n_rows_ + r] = 1.0;
        for (int c = 0; c < n_rows_; ++c) {
            int piv_row = -1;
            double best = 0.0;
            for (int r = c; r < n_rows_; ++r) {
                const double v = std::abs(a[static_cast<std::size_t>(r) * n_rows_ + c]);
                if (v > best) {
                    best = v;
                    piv_row = r;
                }
            }
            if (piv_row < 0 || best < 1e-13)
                throw LpError("numerical breakdown: singular basis at column " + std::to_string(c) +
                              " (pivot " + std::to_string(best) + ")");
            if (piv_row != c) {
                for (int j = 0; j < n_rows_; ++j) {
                    std::swap(a[static_cast<std::size_t>(piv_row) * n_rows_ + j],
                              a[static_cast<std::size_t>(c) * n_rows_ + j]);
                    std::swap(inv[static_cast<std::size_t>(piv_row) * n_rows_ + j],
                              inv[static_cast<std::size_t>(c) * n_rows_ + j]);
                }
            }
            const double s = 1.0 / a[static_cast<std::size_t>(c) * n_rows_ + c];
            for (int j = 0; j < n_rows_; ++j) {
                a[static_cast<std::size_t>(c) * n_rows_ + j] *= s;
                inv[static_cast<std::size_t>(c) * n_rows_ + j] *= s;
            }
            for (int r = 0; r < n_rows_; ++r) {
                if (r == c) continue;
                const double f = a[static_cast<std::size_t>(r) * n_rows_ + c];
                if (f == 0.0) continue;
                for (int j = 0; j < n_rows_; ++j) {
                    a[static_cast<std::size_t>(r) * n_rows_ + j] -= f * a[static_cast<std::size_t>(c) * n_rows_ + j];
                    inv[static_cast<std::size_t>(r) * n_rows_ + j] -= f * inv[static_cast<std::size_t>(c) * n_rows_ + j];
                }
            }
        }
        binv_ = std::move(inv);
    }

    void recompute_xb() {
        std::vector<double> b = rhs_;
        for (int c = 0; c < n_cols_; ++c) {
            if (state_[static_cast<std::size_t>(c)] != VarState::AtUpper) continue;
            const double u = ub_[static_cast<std::size_t>(c)];
            if (u == 0.0) continue;
            for (const auto& [row, coeff] : cols_[static_cast<std::size_t>(c)].entries)
                b[static_cast<std::size_t>(row)] -= coeff * u;
        }
        auto solve_into = [&](const std::vector<double>& rhs, std::vector<double>& out) {
            for (int r = 0; r < n_rows_; ++r) {
                const double* row = binv_row(r);
                double s = 0.0;
                for (int j = 0; j < n_rows_; ++j) s += row[j] * rhs[static_cast<std::size_t>(j)];
                out[static_cast<std::size_t>(r)] = s;
            }
        };
        solve_into(b, xb_);
        // Iterative refinement; near-parallel rows (cutting-plane masters)
        // leave the explicit inverse too inaccurate on its own.
        std::vector<double> residual(static_cast<std::size_t>(n_rows_));
        std::vector<double> correction(static_cast<std::size_t>(n_rows_));
        for (int pass = 0; pass < 3; ++pass) {
            residual = b;
            for (int r = 0; r < n_rows_; ++r) {
                const double x = xb_[static_cast<std::size_t>(r)];
                if (x == 0.0) continue;
                for (const auto& [row, coeff] : cols_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])].entries)
                    residual[static_cast<std::size_t>(row)] -= coeff * x;
            }
            double worst = 0.0;
            for (double v : residual) worst = std::max(worst, std::abs(v));
            if (worst <= 1e-12) break;
            solve_into(residual, correction);
            for (int r = 0; r < n_rows_; ++r) xb_[static_cast<std::size_t>(r)] += correction[static_cast<std::size_t>(r)];
        }
    }

    void drive_out_artificials() {
        std::vector<double> col;
        for (int r = 0; r < n_rows_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] < first_art_) continue;
            const double* rho = binv_row(r);
            int entering = -1;
            for (int c = 0; c < first_art_; ++c) {
                if (state_[static_cast<std::size_t>(c)] == VarState::Basic) continue;
                double coeff = 0.0;
                for (const auto& [row, v] : cols_[static_cast<std::size_t>(c)].entries)
                    coeff += rho[row] * v;
                if (std::abs(coeff) > 1e-7) {
                    entering = c;
                    break;
                }
            }
            if (entering < 0) continue;  // redundant row; artificial stays pinned at 0
            ftran(entering, col);
            const double dir = state_[static_cast<std::size_t>(entering)] == VarState::AtLower ? 1.0 : -1.0;
            pivot(r, entering, dir, 0.0, false, col);
            ++pivots_;
        }
    }

    VertexSolution extract() {
        std::vector<double> vals(static_cast<std::size_t>(n_cols_), 0.0);
        for (int c = 0; c < n_cols_; ++c) {
            if (state_[static_cast<std::size_t>(c)] == VarState::AtUpper)
                vals[static_cast<std::size_t>(c)] = ub_[static_cast<std::size_t>(c)];
        }
        for (int r = 0; r < n_rows_; ++r)
            vals[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = xb_[static_cast<std::size_t>(r)];

        if (!check_feasible(vals)) {
            // One repair attempt before declaring numerical failure.
            if (n_rows_ > 0) {
                refactorize();
                recompute_xb();
                for (int r = 0; r < n_rows_; ++r)
                    vals[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = xb_[static_cast<std::size_t>(r)];
            }
            std::string why;
            if (!check_feasible(vals, &why))
                throw LpError("numerical breakdown: " + why + " after refactorization");
        }

        VertexSolution out;
        out.values.assign(vals.begin(), vals.begin() + n_struct_);
        for (int v = 0; v < n_struct_; ++v) {
            double& x = out.values[static_cast<std::size_t>(v)];
            if (std::abs(x) <= opts_.feas_tol) x = 0.0;
            const double u = ub_[static_cast<std::size_t>(v)];
            if (u != kInf && std::abs(x - u) <= opts_.feas_tol) x = u;
        }
        out.objective_value = 0.0;
        for (int v = 0; v < n_struct_; ++v)
            out.objective_value += lp_.objective[static_cast<std::size_t>(v)] * out.values[static_cast<std::size_t>(v)];
        for (int v = 0; v < n_struct_; ++v)
            if (out.values[static_cast<std::size_t>(v)] > opts_.support_tol) out.support.push_back(v);
        return out;
    }

    bool check_feasible(const std::vector<double>& vals, std::string* why = nullptr) const {
        for (int c = 0; c < n_cols_; ++c) {
            const double x = vals[static_cast<std::size_t>(c)];
            const double u = ub_[static_cast<std::size_t>(c)];
            if (x < -opts_.feas_tol || (u != kInf && x > u + opts_.feas_tol)) {
                if (why)
                    *why = "column " + std::to_string(c) + " value " + std::to_string(x) +
                           " outside [0, " + std::to_string(u) + "]";
                return false;
            }
        }
        // Row residuals via column scan (columns are the sparse primitives here).
        // Slack/surplus columns are included, so every row reads as an equality.
        std::vector<double> lhs(static_cast<std::size_t>(n_rows_), 0.0);
        for (int c = 0; c < n_cols_; ++c) {
            const double x = vals[static_cast<std::size_t>(c)];
            if (x == 0.0) continue;
            for (const auto& [row, coeff] : cols_[static_cast<std::size_t>(c)].entries)
                lhs[static_cast<std::size_t>(row)] += coeff * x;
        }
        for (int r = 0; r < n_rows_; ++r) {
            const double tol = opts_.feas_tol * (1.0 + std::abs(rhs_[static_cast<std::size_t>(r)]));
            if (std::abs(lhs[static_cast<std::size_t>(r)] - rhs_[static_cast<std::size_t>(r)]) > tol) {
                if (why)
                    *why = "row " + std::to_string(r) + " residual " +
                           std::to_string(lhs[static_cast<std::size_t>(r)] - rhs_[static_cast<std::size_t>(r)]);
                return false;
            }
        }
        return true;
    }
};

}  // namespace

VertexSolution solve_to_vertex(const LinearProgram& lp, const SimplexOptions& opts) {
    try {
        Simplex s(lp, opts);
        return s.run();
    } catch (const LpError& e) {
        if (std::string(e.what()).find("numerical") == std::string::npos) throw;
        // Numerical trouble: one deterministic retry with tight refactorization
        // before giving up.
        if (const char* dump = std::getenv("FAIRCLUST_LP_DUMP")) {
            std::ofstream out(dump);
            out << lp.to_lp_format();
        }
        SimplexOptions retry = opts;
        retry.refactor_every = 16;
        Simplex s(lp, retry);
        return s.run();
    }
}

}  // namespace fairclust
