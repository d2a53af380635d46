#include "fairclust/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fairclust/lp.hpp"

namespace fairclust {

double round_to_grid(double d, double lambda) {
    if (d <= 0.0) return 0.0;
    const double step = std::log1p(lambda);
    const double e = std::round(std::log(d) / step);
    return std::exp(e * step);
}

SplitOutcome split_facilities(const Instance& inst, const Lp1Solution& lp1) {
    const auto& clients = inst.clients();
    const auto& fac = inst.facilities();
    const int nc = static_cast<int>(clients.size());
    const int nf = static_cast<int>(fac.size());

    std::vector<int> fac_pos(static_cast<std::size_t>(inst.num_points()), -1);
    for (int j = 0; j < nf; ++j) fac_pos[static_cast<std::size_t>(fac[j])] = j;

    // Unique nonzero assignment levels per facility, with a small merge
    // tolerance so float noise does not spawn zero-capacity copies.
    constexpr double kLevelTol = 1e-9;
    std::vector<std::vector<double>> levels(static_cast<std::size_t>(nf));
    for (int i = 0; i < nc; ++i)
        for (const auto& [fid, v] : lp1.x[static_cast<std::size_t>(i)])
            if (v > kLevelTol) levels[static_cast<std::size_t>(fac_pos[static_cast<std::size_t>(fid)])].push_back(v);
    for (auto& ls : levels) {
        std::sort(ls.begin(), ls.end());
        std::vector<double> merged;
        for (double v : ls)
            if (merged.empty() || v - merged.back() > kLevelTol * (1.0 + v)) merged.push_back(v);
        ls = std::move(merged);
    }

    SplitOutcome out;
    std::vector<int> first_copy(static_cast<std::size_t>(nf), 0);
    for (int j = 0; j < nf; ++j) {
        first_copy[static_cast<std::size_t>(j)] = static_cast<int>(out.copies.size());
        double prev = 0.0;
        int idx = 0;
        for (double lv : levels[static_cast<std::size_t>(j)]) {
            out.copies.push_back(SplitFacility{fac[j], idx++, lv - prev});
            prev = lv;
        }
        // Leftover opening mass not used by any client still counts toward
        // the cardinality constraint; it lives on one extra copy.
        const double leftover = lp1.y[static_cast<std::size_t>(j)] - prev;
        if (leftover > kLevelTol) out.copies.push_back(SplitFacility{fac[j], idx, leftover});
    }

    out.f_sets.resize(static_cast<std::size_t>(nc));
    out.d_max.assign(static_cast<std::size_t>(nc), 0.0);
    for (int i = 0; i < nc; ++i) {
        for (const auto& [fid, v] : lp1.x[static_cast<std::size_t>(i)]) {
            if (v <= kLevelTol) continue;
            const int j = fac_pos[static_cast<std::size_t>(fid)];
            const auto& ls = levels[static_cast<std::size_t>(j)];
            // Copies at levels <= v serve this client.
            int hi = static_cast<int>(std::upper_bound(ls.begin(), ls.end(), v * (1.0 + kLevelTol)) -
                                      ls.begin());
            for (int t = 0; t < hi; ++t)
                out.f_sets[static_cast<std::size_t>(i)].push_back(first_copy[static_cast<std::size_t>(j)] + t);
            out.d_max[static_cast<std::size_t>(i)] =
                std::max(out.d_max[static_cast<std::size_t>(i)], inst.distance(clients[i], fid));
        }
        std::sort(out.f_sets[static_cast<std::size_t>(i)].begin(), out.f_sets[static_cast<std::size_t>(i)].end());
    }
    return out;
}

void init_representatives(std::vector<ClientState>& states) {
    int max_copy = -1;
    for (const ClientState& st : states)
        for (int c : st.f_set) max_copy = std::max(max_copy, c);
    std::vector<char> claimed(static_cast<std::size_t>(max_copy + 1), 0);

    std::vector<int> order(states.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (states[static_cast<std::size_t>(a)].radius != states[static_cast<std::size_t>(b)].radius)
            return states[static_cast<std::size_t>(a)].radius < states[static_cast<std::size_t>(b)].radius;
        return states[static_cast<std::size_t>(a)].client < states[static_cast<std::size_t>(b)].client;
    });
    for (int idx : order) {
        ClientState& st = states[static_cast<std::size_t>(idx)];
        bool conflict = false;
        for (int c : st.f_set)
            if (claimed[static_cast<std::size_t>(c)]) {
                conflict = true;
                break;
            }
        st.representative = !conflict;
        if (!conflict)
            for (int c : st.f_set) claimed[static_cast<std::size_t>(c)] = 1;
    }
}

namespace {

[[noreturn]] void invariant_failure(const std::string& what) {
    throw std::logic_error("rounding invariant violated: " + what);
}

// All-pairs shortest paths over the rounded distances. The rounded values can
// break the triangle inequality, and the coverage guarantee is stated in the
// metric completion of the rounded metric.
std::vector<double> rounded_completion(const Instance& inst, double lambda) {
    const int n = inst.num_points();
    std::vector<double> d(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            d[static_cast<std::size_t>(a) * n + b] = round_to_grid(inst.distance(a, b), lambda);
    for (int mid = 0; mid < n; ++mid)
        for (int a = 0; a < n; ++a) {
            const double dam = d[static_cast<std::size_t>(a) * n + mid];
            double* row = d.data() + static_cast<std::size_t>(a) * n;
            const double* mrow = d.data() + static_cast<std::size_t>(mid) * n;
            for (int b = 0; b < n; ++b) {
                const double alt = dam + mrow[b];
                if (alt < row[b]) row[b] = alt;
            }
        }
    return d;
}

class RoundingLoop {
public:
    RoundingLoop(const Instance& inst, const RoundingOptions& opts, const Lp1Solution& lp1)
        : inst_(inst), opts_(opts), lp1_(lp1), lambda_(opts.lambda) {
        if (!(lambda_ > 0.0 && lambda_ <= 1.0)) throw std::invalid_argument("lambda must be in (0, 1]");
        split_ = split_facilities(inst_, lp1_);
        const auto& clients = inst_.clients();
        nc_ = static_cast<int>(clients.size());
        ncopy_ = static_cast<int>(split_.copies.size());

        // Rounded distances client x copy; D_i starts at the max over F_i.
        rd_.resize(static_cast<std::size_t>(nc_) * ncopy_);
        for (int i = 0; i < nc_; ++i)
            for (int c = 0; c < ncopy_; ++c)
                rd_[static_cast<std::size_t>(i) * ncopy_ + c] =
                    round_to_grid(inst_.distance(clients[i], split_.copies[static_cast<std::size_t>(c)].original), lambda_);

        states_.resize(static_cast<std::size_t>(nc_));
        for (int i = 0; i < nc_; ++i) {
            ClientState& st = states_[static_cast<std::size_t>(i)];
            st.client = clients[i];
            st.f_set = split_.f_sets[static_cast<std::size_t>(i)];
            st.radius = 0.0;
            for (int c : st.f_set) st.radius = std::max(st.radius, rd(i, c));
        }
        init_representatives(states_);
        owner_.assign(static_cast<std::size_t>(ncopy_), -1);
        for (int i = 0; i < nc_; ++i)
            if (states_[static_cast<std::size_t>(i)].representative)
                for (int c : states_[static_cast<std::size_t>(i)].f_set) owner_[static_cast<std::size_t>(c)] = i;
        settled_.assign(static_cast<std::size_t>(nc_), 0);
        for (int i = 0; i < nc_; ++i)
            if (!states_[static_cast<std::size_t>(i)].representative) recompute_ball(i);

        group_weight_.assign(inst_.groups().size(), std::vector<double>(static_cast<std::size_t>(nc_), 0.0));
        for (std::size_t s = 0; s < inst_.groups().size(); ++s)
            for (const auto& mem : inst_.groups()[s].members) {
                const int ci = static_cast<int>(std::find(clients.begin(), clients.end(), mem.client) -
                                                clients.begin());
                group_weight_[s][static_cast<std::size_t>(ci)] += mem.weight;
            }

        // Clients scanned for tight constraints in increasing client id.
        scan_order_.resize(static_cast<std::size_t>(nc_));
        std::iota(scan_order_.begin(), scan_order_.end(), 0);
        std::sort(scan_order_.begin(), scan_order_.end(),
                  [&](int a, int b) { return clients[a] < clients[b]; });
    }

    PseudoSolution run() {
        const double diam = inst_.diameter();
        const double dmin = inst_.min_positive_distance();
        const double ratio = dmin > 0.0 ? std::max(2.0, diam / dmin) : 2.0;
        const std::uint64_t cap = static_cast<std::uint64_t>(
            std::ceil(opts_.iteration_cap_constant * nc_ * std::log2(ratio) / lambda_));

        std::vector<double> completion;
        if (opts_.check_invariants) completion = rounded_completion(inst_, lambda_);

        double prev_obj = std::numeric_limits<double>::infinity();
        std::vector<double> y;
        double obj = 0.0;
        for (std::uint64_t iter = 0;; ++iter) {
            if (iter > cap) throw std::runtime_error("rounding stalled");
            solve_iteration_lp(y, obj);

            if (opts_.check_invariants) {
                if (obj > prev_obj + 1e-6 * std::max(1.0, std::abs(prev_obj)))
                    invariant_failure("LP objective increased");
                check_coverage(y, completion);
                check_disjoint();
            }
            prev_obj = obj;

            std::vector<int> tight = tight_clients(y);
            if (opts_.trace) {
                RoundingTraceRow row;
                row.iteration = static_cast<int>(iter);
                row.lp_objective = obj;
                row.num_representatives = 0;
                for (const ClientState& st : states_) row.num_representatives += st.representative ? 1 : 0;
                row.num_nonrepresentatives = nc_ - row.num_representatives;
                row.shrunk_client = tight.empty() ? -1 : states_[static_cast<std::size_t>(tight.front())].client;
                row.support_size = support_size(y);
                opts_.trace->push_back(row);
            }
            if (tight.empty()) break;
            if (!opts_.batch_shrinks) tight.resize(1);
            for (int i : tight) shrink(i);
        }
        return extract(y);
    }

private:
    const Instance& inst_;
    const RoundingOptions& opts_;
    const Lp1Solution& lp1_;
    double lambda_;
    SplitOutcome split_;
    int nc_ = 0, ncopy_ = 0;
    std::vector<double> rd_;
    std::vector<ClientState> states_;
    std::vector<int> owner_;
    std::vector<char> settled_;
    std::vector<std::vector<double>> group_weight_;
    std::vector<int> scan_order_;

    double rd(int i, int c) const { return rd_[static_cast<std::size_t>(i) * ncopy_ + c]; }

    void recompute_ball(int i) {
        ClientState& st = states_[static_cast<std::size_t>(i)];
        st.b_set.clear();
        const double r = st.radius / (1.0 + lambda_) * (1.0 + 1e-12);
        for (int c : st.f_set)
            if (rd(i, c) <= r) st.b_set.push_back(c);
    }

    void solve_iteration_lp(std::vector<double>& y_out, double& obj_out) {
        LinearProgram lp;
        const int z = lp.add_variable(1.0);
        std::vector<int> yvar(static_cast<std::size_t>(ncopy_));
        for (int c = 0; c < ncopy_; ++c) yvar[static_cast<std::size_t>(c)] = lp.add_variable(0.0, 1.0);

        for (const auto& gw : group_weight_) {
            // z >= sum_{reps} w sum_{F_i} d^p y + sum_{nonreps} w (sum_{B_i} d^p y + (1 - y(B_i)) D_i^p)
            double rhs = 0.0;
            const int row = lp.add_row(Relation::GreaterEq, 0.0);
            lp.add_term(row, z, 1.0);
            for (int i = 0; i < nc_; ++i) {
                const double w = gw[static_cast<std::size_t>(i)];
                if (w == 0.0) continue;
                const ClientState& st = states_[static_cast<std::size_t>(i)];
                if (st.representative) {
                    for (int c : st.f_set)
                        lp.add_term(row, yvar[static_cast<std::size_t>(c)], -w * pow_p(rd(i, c), inst_.p()));
                } else {
                    const double rp = pow_p(st.radius, inst_.p());
                    rhs += w * rp;
                    for (int c : st.b_set) {
                        const double coeff = -w * (pow_p(rd(i, c), inst_.p()) - rp);
                        if (coeff != 0.0) lp.add_term(row, yvar[static_cast<std::size_t>(c)], coeff);
                    }
                }
            }
            lp.rows[static_cast<std::size_t>(row)].rhs = rhs;
        }
        {
            const int row = lp.add_row(Relation::Eq, static_cast<double>(inst_.k()));
            for (int c = 0; c < ncopy_; ++c) lp.add_term(row, yvar[static_cast<std::size_t>(c)], 1.0);
        }
        for (int i = 0; i < nc_; ++i) {
            const ClientState& st = states_[static_cast<std::size_t>(i)];
            if (st.representative) {
                const int row = lp.add_row(Relation::Eq, 1.0);
                for (int c : st.f_set) lp.add_term(row, yvar[static_cast<std::size_t>(c)], 1.0);
            } else if (!st.b_set.empty()) {
                const int row = lp.add_row(Relation::LessEq, 1.0);
                for (int c : st.b_set) lp.add_term(row, yvar[static_cast<std::size_t>(c)], 1.0);
            }
        }
        const VertexSolution sol = solve_to_vertex(lp);
        y_out.assign(static_cast<std::size_t>(ncopy_), 0.0);
        for (int c = 0; c < ncopy_; ++c) y_out[static_cast<std::size_t>(c)] = sol.value(yvar[static_cast<std::size_t>(c)]);
        obj_out = sol.objective_value;
    }

    double ball_mass(const ClientState& st, const std::vector<double>& y) const {
        double s = 0.0;
        for (int c : st.b_set) s += y[static_cast<std::size_t>(c)];
        return s;
    }

    std::vector<int> tight_clients(const std::vector<double>& y) const {
        std::vector<int> out;
        for (int i : scan_order_) {
            const ClientState& st = states_[static_cast<std::size_t>(i)];
            if (st.representative || settled_[static_cast<std::size_t>(i)]) continue;
            if (ball_mass(st, y) >= 1.0 - 1e-6) out.push_back(i);
        }
        return out;
    }

    void shrink(int i) {
        ClientState& st = states_[static_cast<std::size_t>(i)];
        if (st.radius > 0.0) {
            st.f_set = st.b_set;
            st.radius /= 1.0 + lambda_;
            recompute_ball(i);
        }
        update_representatives(i);
        if (!st.representative && st.radius <= 0.0) settled_[static_cast<std::size_t>(i)] = 1;
    }

    // The shrunk client joins the representatives when every conflicting
    // representative has a strictly larger radius; those get demoted and are
    // represented by the new member from now on.
    void update_representatives(int i) {
        ClientState& st = states_[static_cast<std::size_t>(i)];
        std::vector<int> conflicts;
        for (int c : st.f_set) {
            const int o = owner_[static_cast<std::size_t>(c)];
            if (o >= 0 && o != i &&
                std::find(conflicts.begin(), conflicts.end(), o) == conflicts.end())
                conflicts.push_back(o);
        }
        for (int o : conflicts)
            if (states_[static_cast<std::size_t>(o)].radius <= st.radius) return;  // i stays represented
        for (int o : conflicts) {
            ClientState& rep = states_[static_cast<std::size_t>(o)];
            rep.representative = false;
            for (int c : rep.f_set) owner_[static_cast<std::size_t>(c)] = -1;
            recompute_ball(o);
        }
        st.representative = true;
        for (int c : st.f_set) {
            if (owner_[static_cast<std::size_t>(c)] >= 0) invariant_failure("claimed copy still owned");
            owner_[static_cast<std::size_t>(c)] = i;
        }
    }

    int support_size(const std::vector<double>& y) const {
        std::vector<PointId> originals;
        for (int c = 0; c < ncopy_; ++c)
            if (y[static_cast<std::size_t>(c)] > 1e-6)
                originals.push_back(split_.copies[static_cast<std::size_t>(c)].original);
        std::sort(originals.begin(), originals.end());
        originals.erase(std::unique(originals.begin(), originals.end()), originals.end());
        return static_cast<int>(originals.size());
    }

    void check_coverage(const std::vector<double>& y, const std::vector<double>& completion) const {
        const int n = inst_.num_points();
        const double factor = 1.0 + 2.0 * (1.0 + lambda_) / lambda_;
        for (int i = 0; i < nc_; ++i) {
            const ClientState& st = states_[static_cast<std::size_t>(i)];
            if (st.representative) continue;
            const double radius = factor * st.radius * (1.0 + 1e-9);
            double mass = 0.0;
            for (int c = 0; c < ncopy_; ++c) {
                const double dc = completion[static_cast<std::size_t>(st.client) * n +
                                             split_.copies[static_cast<std::size_t>(c)].original];
                if (dc <= radius) mass += y[static_cast<std::size_t>(c)];
            }
            if (mass < 1.0 - 1e-6) invariant_failure("coverage shortfall for a non-representative client");
        }
    }

    void check_disjoint() const {
        std::vector<char> seen(static_cast<std::size_t>(ncopy_), 0);
        for (int i = 0; i < nc_; ++i) {
            const ClientState& st = states_[static_cast<std::size_t>(i)];
            if (!st.representative) continue;
            for (int c : st.f_set) {
                if (seen[static_cast<std::size_t>(c)]) invariant_failure("representative candidate sets overlap");
                seen[static_cast<std::size_t>(c)] = 1;
            }
        }
    }

    PseudoSolution extract(const std::vector<double>& y) const {
        std::vector<PointId> originals;
        for (int c = 0; c < ncopy_; ++c)
            if (y[static_cast<std::size_t>(c)] > 1e-6)
                originals.push_back(split_.copies[static_cast<std::size_t>(c)].original);
        PseudoSolution out;
        out.centers = CenterSet::of(std::move(originals));
        out.size_bound_witness = inst_.k() + inst_.num_groups();
        if (static_cast<int>(out.centers.size()) > out.size_bound_witness)
            invariant_failure("support exceeds k+m originals");
        out.cost = evaluate(inst_, out.centers);
        out.lp_lower_bound = lp1_.lower_bound;
        return out;
    }
};

}  // namespace

PseudoSolution iterative_round(const Instance& inst, const RoundingOptions& opts) {
    Lp1Solution local;
    const Lp1Solution* lp1 = opts.lp1_solution;
    if (lp1 == nullptr) {
        local = solve_lp1(inst, opts.lp1);
        lp1 = &local;
    }
    RoundingLoop loop(inst, opts, *lp1);
    return loop.run();
}

}  // namespace fairclust
