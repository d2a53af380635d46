#include "fairclust/lp1.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "fairclust/lp.hpp"

namespace fairclust {

namespace {

Lp1Solution solve_direct(const Instance& inst, const Lp1Options& opts) {
    const auto& clients = inst.clients();
    const auto& fac = inst.facilities();
    const int nc = static_cast<int>(clients.size());
    const int nf = static_cast<int>(fac.size());

    LinearProgram lp;
    const int z = lp.add_variable(1.0, kInf, "z");
    std::vector<int> yvar(static_cast<std::size_t>(nf));
    for (int j = 0; j < nf; ++j)
        yvar[static_cast<std::size_t>(j)] = lp.add_variable(0.0, 1.0, "y" + std::to_string(fac[j]));
    // x variables laid out client-major.
    std::vector<int> xvar(static_cast<std::size_t>(nc) * nf);
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nf; ++j)
            xvar[static_cast<std::size_t>(i) * nf + j] = lp.add_variable(
                0.0, kInf, "x" + std::to_string(clients[i]) + "_" + std::to_string(fac[j]));

    for (const Group& g : inst.groups()) {
        const int row = lp.add_row(Relation::GreaterEq, 0.0);
        lp.add_term(row, z, 1.0);
        for (const auto& mem : g.members) {
            const int ci = static_cast<int>(std::find(clients.begin(), clients.end(), mem.client) -
                                            clients.begin());
            for (int j = 0; j < nf; ++j) {
                const double c = mem.weight * pow_p(inst.distance(mem.client, fac[j]), inst.p());
                if (c != 0.0) lp.add_term(row, xvar[static_cast<std::size_t>(ci) * nf + j], -c);
            }
        }
    }
    {
        const int row = lp.add_row(Relation::Eq, static_cast<double>(inst.k()));
        for (int j = 0; j < nf; ++j) lp.add_term(row, yvar[static_cast<std::size_t>(j)], 1.0);
    }
    for (int i = 0; i < nc; ++i) {
        const int row = lp.add_row(Relation::Eq, 1.0);
        for (int j = 0; j < nf; ++j) lp.add_term(row, xvar[static_cast<std::size_t>(i) * nf + j], 1.0);
    }
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nf; ++j) {
            const int row = lp.add_row(Relation::LessEq, 0.0);
            lp.add_term(row, xvar[static_cast<std::size_t>(i) * nf + j], 1.0);
            lp.add_term(row, yvar[static_cast<std::size_t>(j)], -1.0);
        }

    if (!opts.dump_lp_path.empty()) {
        std::ofstream out(opts.dump_lp_path);
        out << lp.to_lp_format();
    }

    const VertexSolution sol = solve_to_vertex(lp);

    Lp1Solution out;
    out.vertex = true;
    out.z = sol.objective_value;
    out.lower_bound = sol.objective_value;
    out.gap = 0.0;
    out.y.resize(static_cast<std::size_t>(nf));
    for (int j = 0; j < nf; ++j) out.y[static_cast<std::size_t>(j)] = sol.value(yvar[static_cast<std::size_t>(j)]);
    out.x.resize(static_cast<std::size_t>(nc));
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nf; ++j) {
            const double v = sol.value(xvar[static_cast<std::size_t>(i) * nf + j]);
            if (v > 1e-9) out.x[static_cast<std::size_t>(i)].emplace_back(fac[j], v);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Cutting-plane path. The assignment block of the relaxation is separable per
// client once y is fixed: each client greedily fills one unit of assignment
// mass from its nearest facilities. That fill cost C_i(y) is convex piecewise
// linear, and each fill yields an exact supporting cut
//     c_i >= d_t^p - sum_{j : d_ij < d_t} (d_t^p - d_ij^p) y_j
// where d_t is the last distance used. The master LP over (z, c, y) with these
// cuts lower-bounds the relaxation; evaluating the fill at the master optimum
// upper-bounds it. Terminates when the two meet.
// ---------------------------------------------------------------------------

struct FillResult {
    double cost = 0.0;
    int threshold_pos = 0;  // position in the client's sorted facility order
    std::vector<std::pair<int, double>> taken;  // (facility position, amount)
};

class Decomposition {
public:
    Decomposition(const Instance& inst, const Lp1Options& opts) : inst_(inst), opts_(opts) {
        const auto& clients = inst.clients();
        const auto& fac = inst.facilities();
        nc_ = static_cast<int>(clients.size());
        nf_ = static_cast<int>(fac.size());
        order_.resize(static_cast<std::size_t>(nc_));
        dist_p_.resize(static_cast<std::size_t>(nc_));
        for (int i = 0; i < nc_; ++i) {
            auto& ord = order_[static_cast<std::size_t>(i)];
            ord.resize(static_cast<std::size_t>(nf_));
            for (int j = 0; j < nf_; ++j) ord[static_cast<std::size_t>(j)] = j;
            std::sort(ord.begin(), ord.end(), [&](int a, int b) {
                const double da = inst.distance(clients[i], fac[a]);
                const double db = inst.distance(clients[i], fac[b]);
                if (da != db) return da < db;
                return fac[a] < fac[b];
            });
            auto& dp = dist_p_[static_cast<std::size_t>(i)];
            dp.resize(static_cast<std::size_t>(nf_));
            for (int t = 0; t < nf_; ++t)
                dp[static_cast<std::size_t>(t)] =
                    pow_p(inst.distance(clients[i], fac[ord[static_cast<std::size_t>(t)]]), inst.p());
        }
        // Group weights folded to client positions.
        group_weight_.assign(inst.groups().size(), std::vector<double>(static_cast<std::size_t>(nc_), 0.0));
        for (std::size_t s = 0; s < inst.groups().size(); ++s)
            for (const auto& mem : inst.groups()[s].members) {
                const int ci = static_cast<int>(std::find(clients.begin(), clients.end(), mem.client) -
                                                clients.begin());
                group_weight_[s][static_cast<std::size_t>(ci)] += mem.weight;
            }
    }

    struct Cut {
        int client = 0;
        double u = 0.0;
        std::vector<std::pair<int, double>> v;  // (facility position, coeff)
        bool fresh = true;
    };

    Lp1Solution run() {
        // Seed cuts: c_i >= (nearest distance)^p, i.e. the fill at y == "all open".
        std::vector<Cut> cuts;
        for (int i = 0; i < nc_; ++i)
            cuts.push_back(Cut{i, dist_p_[static_cast<std::size_t>(i)][0], {}, true});

        double best_ub = std::numeric_limits<double>::infinity();
        std::vector<double> best_y;
        double lb = 0.0;

        for (int iter = 0; iter < opts_.max_iterations; ++iter) {
            LinearProgram lp;
            const int z = lp.add_variable(1.0);
            std::vector<int> cvar(static_cast<std::size_t>(nc_));
            for (int i = 0; i < nc_; ++i) cvar[static_cast<std::size_t>(i)] = lp.add_variable(0.0);
            std::vector<int> yvar(static_cast<std::size_t>(nf_));
            for (int j = 0; j < nf_; ++j) yvar[static_cast<std::size_t>(j)] = lp.add_variable(0.0, 1.0);

            for (const auto& gw : group_weight_) {
                const int row = lp.add_row(Relation::GreaterEq, 0.0);
                lp.add_term(row, z, 1.0);
                for (int i = 0; i < nc_; ++i)
                    if (gw[static_cast<std::size_t>(i)] != 0.0)
                        lp.add_term(row, cvar[static_cast<std::size_t>(i)], -gw[static_cast<std::size_t>(i)]);
            }
            {
                const int row = lp.add_row(Relation::Eq, static_cast<double>(inst_.k()));
                for (int j = 0; j < nf_; ++j) lp.add_term(row, yvar[static_cast<std::size_t>(j)], 1.0);
            }
            std::vector<int> cut_rows;
            cut_rows.reserve(cuts.size());
            for (const Cut& cut : cuts) {
                const int row = lp.add_row(Relation::GreaterEq, cut.u);
                lp.add_term(row, cvar[static_cast<std::size_t>(cut.client)], 1.0);
                for (const auto& [pos, coeff] : cut.v) lp.add_term(row, yvar[static_cast<std::size_t>(pos)], coeff);
                cut_rows.push_back(row);
            }

            const VertexSolution sol = solve_to_vertex(lp);
            lb = std::max(lb, sol.objective_value);

            std::vector<double> y(static_cast<std::size_t>(nf_));
            for (int j = 0; j < nf_; ++j) y[static_cast<std::size_t>(j)] = sol.value(yvar[static_cast<std::size_t>(j)]);

            // Exact evaluation + new cuts at the master optimum.
            double ub = 0.0;
            std::vector<double> fill_cost(static_cast<std::size_t>(nc_));
            std::vector<FillResult> fills(static_cast<std::size_t>(nc_));
            for (int i = 0; i < nc_; ++i) {
                fills[static_cast<std::size_t>(i)] = fill(i, y);
                fill_cost[static_cast<std::size_t>(i)] = fills[static_cast<std::size_t>(i)].cost;
            }
            for (const auto& gw : group_weight_) {
                double s = 0.0;
                for (int i = 0; i < nc_; ++i) s += gw[static_cast<std::size_t>(i)] * fill_cost[static_cast<std::size_t>(i)];
                ub = std::max(ub, s);
            }
            if (ub < best_ub) {
                best_ub = ub;
                best_y = y;
            }
            if (best_ub - lb <= opts_.gap_tol * std::max(1.0, std::abs(best_ub))) break;

            // Cut management: keep cuts tight at this optimum or recently added.
            std::vector<Cut> kept;
            for (std::size_t t = 0; t < cuts.size(); ++t) {
                double lhs = sol.value(cvar[static_cast<std::size_t>(cuts[t].client)]);
                for (const auto& [pos, coeff] : cuts[t].v) lhs += coeff * y[static_cast<std::size_t>(pos)];
                const bool tight = lhs - cuts[t].u <= 1e-7 * (1.0 + std::abs(cuts[t].u));
                if (tight || cuts[t].fresh) {
                    Cut c = cuts[t];
                    c.fresh = false;
                    kept.push_back(std::move(c));
                }
            }
            cuts = std::move(kept);
            for (int i = 0; i < nc_; ++i) {
                const double ci = sol.value(cvar[static_cast<std::size_t>(i)]);
                if (fill_cost[static_cast<std::size_t>(i)] >
                    ci + 1e-10 * (1.0 + std::abs(fill_cost[static_cast<std::size_t>(i)]))) {
                    Cut cut = make_cut(i, fills[static_cast<std::size_t>(i)]);
                    // A repeat of an existing cut only degrades the basis.
                    const bool dup = std::any_of(cuts.begin(), cuts.end(), [&](const Cut& c) {
                        return near_duplicate(c, cut);
                    });
                    if (dup) continue;
                    // At most a handful of cuts per client; drop the oldest
                    // beyond that to keep the master well conditioned.
                    int mine = 0;
                    for (const Cut& c : cuts) mine += c.client == i ? 1 : 0;
                    if (mine >= 6) {
                        const auto oldest = std::find_if(cuts.begin(), cuts.end(),
                                                         [&](const Cut& c) { return c.client == i; });
                        cuts.erase(oldest);
                    }
                    cuts.push_back(std::move(cut));
                }
            }
        }

        return build_solution(best_y, lb);
    }

private:
    const Instance& inst_;
    const Lp1Options& opts_;
    int nc_ = 0, nf_ = 0;
    std::vector<std::vector<int>> order_;       // per client: facility positions by distance
    std::vector<std::vector<double>> dist_p_;   // per client: d^p in that order
    std::vector<std::vector<double>> group_weight_;

    FillResult fill(int i, const std::vector<double>& y) const {
        const auto& ord = order_[static_cast<std::size_t>(i)];
        const auto& dp = dist_p_[static_cast<std::size_t>(i)];
        FillResult out;
        double acc = 0.0;
        for (int t = 0; t < nf_; ++t) {
            const int pos = ord[static_cast<std::size_t>(t)];
            const double avail = y[static_cast<std::size_t>(pos)];
            if (avail <= 1e-12) continue;
            const double take = std::min(avail, 1.0 - acc);
            out.taken.emplace_back(pos, take);
            out.cost += take * dp[static_cast<std::size_t>(t)];
            out.threshold_pos = t;
            acc += take;
            if (acc >= 1.0 - 1e-12) break;
        }
        // Numerical shortfall from the master's feasibility tolerance lands on
        // the nearest facility; the error is O(feas_tol).
        if (acc < 1.0 - 1e-12 && !out.taken.empty()) {
            out.taken.front().second += 1.0 - acc;
            out.cost += (1.0 - acc) * dp[0];
        }
        return out;
    }

    // Supporting cut of the fill at its threshold distance. Near-tied
    // distances are treated as ties (coefficient 0): cuts from fills stopping
    // at either side of a 1e-12-wide gap would otherwise differ by a
    // near-zero row and wreck the master's conditioning.
    Cut make_cut(int i, const FillResult& f) const {
        const auto& ord = order_[static_cast<std::size_t>(i)];
        const auto& dp = dist_p_[static_cast<std::size_t>(i)];
        const double dt = dp[static_cast<std::size_t>(f.threshold_pos)];
        Cut cut{i, dt, {}, true};
        for (int t = 0; t < f.threshold_pos; ++t) {
            const double diff = dt - dp[static_cast<std::size_t>(t)];
            if (diff > 1e-9 * (1.0 + dt)) cut.v.emplace_back(ord[static_cast<std::size_t>(t)], diff);
        }
        return cut;
    }

    static bool near_duplicate(const Cut& a, const Cut& b) {
        if (a.client != b.client) return false;
        if (std::abs(a.u - b.u) > 1e-9 * (1.0 + std::abs(a.u))) return false;
        if (a.v.size() != b.v.size()) return false;
        for (std::size_t t = 0; t < a.v.size(); ++t) {
            if (a.v[t].first != b.v[t].first) return false;
            if (std::abs(a.v[t].second - b.v[t].second) > 1e-9 * (1.0 + std::abs(a.v[t].second)))
                return false;
        }
        return true;
    }

    Lp1Solution build_solution(const std::vector<double>& y, double lb) const {
        Lp1Solution out;
        out.vertex = false;
        out.y = y;
        out.x.resize(static_cast<std::size_t>(nc_));
        std::vector<double> fill_cost(static_cast<std::size_t>(nc_));
        for (int i = 0; i < nc_; ++i) {
            const FillResult f = fill(i, y);
            fill_cost[static_cast<std::size_t>(i)] = f.cost;
            for (const auto& [pos, take] : f.taken)
                out.x[static_cast<std::size_t>(i)].emplace_back(inst_.facilities()[static_cast<std::size_t>(pos)], take);
        }
        double ub = 0.0;
        for (const auto& gw : group_weight_) {
            double s = 0.0;
            for (int i = 0; i < nc_; ++i) s += gw[static_cast<std::size_t>(i)] * fill_cost[static_cast<std::size_t>(i)];
            ub = std::max(ub, s);
        }
        out.z = ub;
        out.lower_bound = std::min(lb, ub);
        out.gap = ub - out.lower_bound;
        return out;
    }
};

}  // namespace

Lp1Solution solve_lp1(const Instance& inst, const Lp1Options& opts) {
    const long long pairs = static_cast<long long>(inst.clients().size()) *
                            static_cast<long long>(inst.facilities().size());
    const bool direct = opts.force_direct ||
                        (!opts.force_decomposition && pairs <= opts.direct_limit);
    if (direct) return solve_direct(inst, opts);
    Decomposition d(inst, opts);
    return d.run();
}

}  // namespace fairclust
