#include "fairclust/convert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "fairclust/lp.hpp"
#include "fairclust/sparsify.hpp"

namespace fairclust {

CenterSet best_k_subset(const Instance& inst, const CenterSet& s, std::uint64_t subset_cap) {
    const int n = static_cast<int>(s.ids.size());
    const int k = inst.k();
    if (n <= k) return s;
    if (binomial(n, k) > subset_cap) throw std::runtime_error("instance too large for oracle");

    std::vector<int> comb(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
    CenterSet best;
    double best_obj = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<PointId> ids(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) ids[static_cast<std::size_t>(i)] = s.ids[static_cast<std::size_t>(comb[static_cast<std::size_t>(i)])];
        CenterSet cand = CenterSet::of(std::move(ids));
        const double obj = evaluate(inst, cand).objective;
        if (obj < best_obj || (obj == best_obj && cand < best)) {
            best = std::move(cand);
            best_obj = obj;
        }
        int i = k - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

namespace {

double selection_value(const MinMaxAssignmentProblem& prob, const std::vector<int>& sel) {
    double worst = 0.0;
    for (int g = 0; g < prob.num_groups(); ++g) {
        double s = 0.0;
        for (int j = 0; j < prob.num_parts(); ++j)
            s += prob.costs[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)][static_cast<std::size_t>(sel[static_cast<std::size_t>(j)])];
        worst = std::max(worst, s);
    }
    return worst;
}

void validate(const MinMaxAssignmentProblem& prob) {
    if (prob.costs.empty()) throw std::invalid_argument("no groups");
    const std::size_t parts = prob.costs[0].size();
    if (parts == 0) throw std::invalid_argument("no parts");
    for (const auto& g : prob.costs) {
        if (g.size() != parts) throw std::invalid_argument("ragged cost tensor");
        for (std::size_t j = 0; j < parts; ++j) {
            if (g[j].empty()) throw std::invalid_argument("empty part");
            if (g[j].size() != prob.costs[0][j].size())
                throw std::invalid_argument("ragged cost tensor");
            for (double v : g[j])
                if (!(v >= 0.0)) throw std::invalid_argument("negative cost");
        }
    }
    if (!(prob.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

}  // namespace

MinMaxResult minmax_assign(const MinMaxAssignmentProblem& prob, std::uint64_t budget) {
    validate(prob);
    const int m = prob.num_groups();
    const int k = prob.num_parts();
    auto part_size = [&](int j) { return static_cast<int>(prob.costs[0][static_cast<std::size_t>(j)].size()); };

    MinMaxResult best;
    best.value = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<int>& sel) {
        const double v = selection_value(prob, sel);
        if (v < best.value || (v == best.value && sel < best.selection)) {
            best.selection = sel;
            best.value = v;
        }
    };

    if (m == 1) {
        // Separable: the per-part argmin is exact.
        std::vector<int> sel(static_cast<std::size_t>(k), 0);
        for (int j = 0; j < k; ++j) {
            int arg = 0;
            for (int v = 1; v < part_size(j); ++v)
                if (prob.costs[0][static_cast<std::size_t>(j)][static_cast<std::size_t>(v)] <
                    prob.costs[0][static_cast<std::size_t>(j)][static_cast<std::size_t>(arg)])
                    arg = v;
            sel[static_cast<std::size_t>(j)] = arg;
        }
        consider(sel);
        return best;
    }

    // Large-cost part guesses: |T_g| <= m/eps per group, so the union has at
    // most m^2/eps parts. Enumerating candidate unions T directly covers every
    // per-group guess combination.
    const int t_union_max =
        std::min(k, static_cast<int>(std::ceil(m * m / prob.epsilon + 1e-9)));
    std::uint64_t used = 0;

    std::vector<int> t_set;
    std::vector<std::vector<int>> t_sets;
    // All subsets of [k] with size <= t_union_max, ordered by size then lex.
    for (int size = 0; size <= t_union_max; ++size) {
        std::vector<int> comb(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) comb[static_cast<std::size_t>(i)] = i;
        if (size == 0) {
            t_sets.push_back({});
            continue;
        }
        while (true) {
            t_sets.push_back(comb);
            int i = size - 1;
            while (i >= 0 && comb[static_cast<std::size_t>(i)] == k - size + i) --i;
            if (i < 0) break;
            ++comb[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < size; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    for (const auto& T : t_sets) {
        std::vector<char> in_t(static_cast<std::size_t>(k), 0);
        for (int j : T) in_t[static_cast<std::size_t>(j)] = 1;
        // Enumerate fixed choices on T.
        std::vector<int> fixed(T.size(), 0);
        while (true) {
            if (++used > budget) throw std::runtime_error("subproblem too large");

            // LP over the free parts with the fixed contributions as constants.
            LinearProgram lp;
            const int theta = lp.add_variable(1.0);
            std::vector<std::vector<int>> xvar(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) {
                if (in_t[static_cast<std::size_t>(j)]) continue;
                for (int v = 0; v < part_size(j); ++v)
                    xvar[static_cast<std::size_t>(j)].push_back(lp.add_variable(0.0, 1.0));
            }
            for (int g = 0; g < m; ++g) {
                double fixed_cost = 0.0;
                for (std::size_t ti = 0; ti < T.size(); ++ti)
                    fixed_cost += prob.costs[static_cast<std::size_t>(g)][static_cast<std::size_t>(T[ti])]
                                            [static_cast<std::size_t>(fixed[ti])];
                const int row = lp.add_row(Relation::GreaterEq, fixed_cost);
                lp.add_term(row, theta, 1.0);
                for (int j = 0; j < k; ++j) {
                    if (in_t[static_cast<std::size_t>(j)]) continue;
                    for (int v = 0; v < part_size(j); ++v) {
                        const double c = prob.costs[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)][static_cast<std::size_t>(v)];
                        if (c != 0.0) lp.add_term(row, xvar[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)], -c);
                    }
                }
            }
            for (int j = 0; j < k; ++j) {
                if (in_t[static_cast<std::size_t>(j)]) continue;
                const int row = lp.add_row(Relation::Eq, 1.0);
                for (int var : xvar[static_cast<std::size_t>(j)]) lp.add_term(row, var, 1.0);
            }
            const VertexSolution sol = solve_to_vertex(lp);

            // Fractional parts: each contributes >= 2 support entries, so the
            // vertex support bound k+m caps them at m.
            std::vector<int> fractional;
            std::vector<int> integral_choice(static_cast<std::size_t>(k), -1);
            for (int j = 0; j < k; ++j) {
                if (in_t[static_cast<std::size_t>(j)]) continue;
                bool frac = true;
                for (int v = 0; v < part_size(j); ++v) {
                    if (sol.value(xvar[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)]) > 1.0 - 1e-6) {
                        integral_choice[static_cast<std::size_t>(j)] = v;
                        frac = false;
                        break;
                    }
                }
                if (frac) fractional.push_back(j);
            }
            if (static_cast<int>(fractional.size()) > m)
                throw std::logic_error("vertex has more than m fractional parts");

            // Enumerate completions on the fractional parts.
            std::vector<int> sel(static_cast<std::size_t>(k), 0);
            for (int j = 0; j < k; ++j)
                if (integral_choice[static_cast<std::size_t>(j)] >= 0) sel[static_cast<std::size_t>(j)] = integral_choice[static_cast<std::size_t>(j)];
            for (std::size_t ti = 0; ti < T.size(); ++ti) sel[static_cast<std::size_t>(T[ti])] = fixed[ti];

            std::vector<int> completion(fractional.size(), 0);
            while (true) {
                if (++used > budget) throw std::runtime_error("subproblem too large");
                for (std::size_t fi = 0; fi < fractional.size(); ++fi)
                    sel[static_cast<std::size_t>(fractional[fi])] = completion[fi];
                consider(sel);
                std::size_t pos = 0;
                while (pos < completion.size()) {
                    if (++completion[pos] < part_size(fractional[pos])) break;
                    completion[pos] = 0;
                    ++pos;
                }
                if (pos == completion.size()) break;
            }

            // Advance the fixed-choice odometer on T.
            std::size_t pos = 0;
            while (pos < fixed.size()) {
                if (++fixed[pos] < part_size(T[pos])) break;
                fixed[pos] = 0;
                ++pos;
            }
            if (pos == fixed.size()) break;
        }
    }
    return best;
}

std::string ConversionReport::to_json() const {
    char buf[256];
    std::string out = "{\"path\":\"" + path + "\",";
    std::snprintf(buf, sizeof(buf), "\"beta\":%.17g,\"candidates_tried\":%llu,\"truncated\":%s,",
                  beta, static_cast<unsigned long long>(candidates_tried),
                  truncated ? "true" : "false");
    out += buf;
    out += "\"group_costs\":[";
    for (std::size_t s = 0; s < cost.per_group.size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%s%.17g", s ? "," : "", cost.per_group[s]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "],\"objective\":%.17g}", cost.objective);
    out += buf;
    return out;
}

namespace {

// Subsets of the facility pool of a given size, emitted in ascending order of
// total weight (here: total distance to the pruned pseudo-solution). Standard
// best-first expansion over combinations of a weight-sorted pool.
class SubsetByWeightEnumerator {
public:
    SubsetByWeightEnumerator(std::vector<std::pair<double, PointId>> pool, int size)
        : pool_(std::move(pool)), size_(size) {
        std::sort(pool_.begin(), pool_.end());
        if (size_ == 0) {
            exhausted_emitted_empty_ = false;
            return;
        }
        if (static_cast<int>(pool_.size()) < size_) return;
        std::vector<int> first(static_cast<std::size_t>(size_));
        for (int i = 0; i < size_; ++i) first[static_cast<std::size_t>(i)] = i;
        push(std::move(first));
    }

    std::optional<std::vector<PointId>> next() {
        if (size_ == 0) {
            if (exhausted_emitted_empty_) return std::nullopt;
            exhausted_emitted_empty_ = true;
            return std::vector<PointId>{};
        }
        if (heap_.empty()) return std::nullopt;
        Node top = heap_.top();
        heap_.pop();
        // Successors: bump each index to the next unused slot, canonical form
        // keeps the frontier duplicate-free (only bump positions whose next
        // index precedes the following position's index).
        for (int i = size_ - 1; i >= 0; --i) {
            std::vector<int> succ = top.idx;
            const int nxt = succ[static_cast<std::size_t>(i)] + 1;
            if (nxt >= static_cast<int>(pool_.size())) continue;
            if (i + 1 < size_ && nxt >= succ[static_cast<std::size_t>(i + 1)]) continue;
            succ[static_cast<std::size_t>(i)] = nxt;
            push(std::move(succ));
        }
        std::vector<PointId> out(static_cast<std::size_t>(size_));
        for (int i = 0; i < size_; ++i) out[static_cast<std::size_t>(i)] = pool_[static_cast<std::size_t>(top.idx[static_cast<std::size_t>(i)])].second;
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct Node {
        double weight;
        std::vector<int> idx;
        bool operator>(const Node& o) const {
            if (weight != o.weight) return weight > o.weight;
            return idx > o.idx;
        }
    };

    void push(std::vector<int> idx) {
        if (!visited_.insert(idx).second) return;
        double w = 0.0;
        for (int i : idx) w += pool_[static_cast<std::size_t>(i)].first;
        heap_.push(Node{w, std::move(idx)});
    }

    std::vector<std::pair<double, PointId>> pool_;
    int size_ = 0;
    bool exhausted_emitted_empty_ = true;
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap_;
    std::set<std::vector<int>> visited_;
};

double min_distance_to(const Instance& inst, PointId q, const std::vector<PointId>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (PointId j : set) best = std::min(best, inst.distance(q, j));
    return best;
}

}  // namespace

ConversionResult convert(const Instance& inst, const PseudoSolution& pseudo,
                         const ConversionConfig& cfg) {
    const int k = inst.k();
    const int m = inst.num_groups();
    const double p = inst.p();

    ConversionResult result;
    result.report.beta = cfg.beta;

    // Greedy pruning: drop centers whose removal costs at most beta.
    std::vector<PointId> pruned = pseudo.centers.ids;
    double pruned_cost = evaluate(inst, CenterSet::of(pruned)).objective;
    while (static_cast<int>(pruned.size()) > k) {
        int removed = -1;
        for (std::size_t i = 0; i < pruned.size(); ++i) {
            std::vector<PointId> trial = pruned;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
            const double c = evaluate(inst, CenterSet::of(trial)).objective;
            if (c <= pruned_cost + cfg.beta + 1e-12 * (1.0 + pruned_cost)) {
                removed = static_cast<int>(i);
                pruned_cost = c;
                break;  // ids are sorted; the first removable is the lowest id
            }
        }
        if (removed < 0) break;
        pruned.erase(pruned.begin() + removed);
    }
    if (static_cast<int>(pruned.size()) <= k) {
        result.centers = CenterSet::of(pruned);
        result.report.path = "early-exit";
        result.report.cost = evaluate(inst, result.centers);
        return result;
    }

    // Enumerate (D subset of the pruned set, V subset of facilities) with
    // |D| + |V| = k and |V| < m^2 t.
    CenterSet best;
    double best_obj = std::numeric_limits<double>::infinity();
    std::uint64_t tried = 0;
    bool truncated = false;

    const auto& fac = inst.facilities();
    const int v_max = std::min({k, m * m * cfg.t - 1, static_cast<int>(fac.size())});

    std::vector<std::pair<double, PointId>> v_pool;
    for (PointId f : fac) v_pool.emplace_back(min_distance_to(inst, f, pruned), f);

    for (int v_size = 0; v_size <= v_max && !truncated; ++v_size) {
        const int d_size = k - v_size;
        if (d_size < 0 || d_size > static_cast<int>(pruned.size())) continue;

        // D-combinations, lexicographic over the sorted pruned ids.
        std::vector<int> comb(static_cast<std::size_t>(d_size));
        for (int i = 0; i < d_size; ++i) comb[static_cast<std::size_t>(i)] = i;
        while (!truncated) {
            std::vector<PointId> d_set(static_cast<std::size_t>(d_size));
            for (int i = 0; i < d_size; ++i) d_set[static_cast<std::size_t>(i)] = pruned[static_cast<std::size_t>(comb[static_cast<std::size_t>(i)])];

            SubsetByWeightEnumerator venum(v_pool, v_size);
            while (auto v_set = venum.next()) {
                if (tried >= cfg.candidate_cap) {
                    truncated = true;
                    break;
                }
                ++tried;

                // Per kept center: candidates inside the small ball around it,
                // scored on inner-ball clients against the best of (candidate,
                // V) service.
                std::vector<double> l_radius(d_set.size());
                bool skip = false;
                MinMaxAssignmentProblem sub;
                sub.epsilon = cfg.epsilon_prime;
                std::vector<std::vector<PointId>> parts(d_set.size());
                for (std::size_t di = 0; di < d_set.size(); ++di) {
                    std::vector<PointId> others = pruned;
                    others.erase(std::find(others.begin(), others.end(), d_set[di]));
                    l_radius[di] = min_distance_to(inst, d_set[di], others);
                    parts[di] = fball(inst, d_set[di], cfg.delta * l_radius[di]);
                    if (parts[di].empty()) {
                        skip = true;
                        break;
                    }
                }
                if (skip) continue;

                std::vector<PointId> chosen;
                if (!d_set.empty()) {
                    sub.costs.assign(static_cast<std::size_t>(m), {});
                    for (int g = 0; g < m; ++g) {
                        auto& rows = sub.costs[static_cast<std::size_t>(g)];
                        rows.resize(d_set.size());
                        for (std::size_t di = 0; di < d_set.size(); ++di) {
                            rows[di].resize(parts[di].size());
                            for (std::size_t vi = 0; vi < parts[di].size(); ++vi) {
                                double alpha = 0.0;
                                for (const auto& mem : inst.groups()[static_cast<std::size_t>(g)].members) {
                                    if (inst.distance(d_set[di], mem.client) >= l_radius[di] / 3.0)
                                        continue;
                                    const double to_f =
                                        pow_p(inst.distance(mem.client, parts[di][vi]), p);
                                    double to_v = std::numeric_limits<double>::infinity();
                                    for (PointId vf : *v_set)
                                        to_v = std::min(to_v, inst.distance(mem.client, vf));
                                    to_v = v_set->empty() ? std::numeric_limits<double>::infinity()
                                                          : pow_p(to_v, p);
                                    alpha += mem.weight * std::min(to_f, to_v);
                                }
                                rows[di][vi] = alpha;
                            }
                        }
                    }
                    MinMaxResult mm;
                    try {
                        mm = minmax_assign(sub, cfg.minmax_budget);
                    } catch (const std::runtime_error&) {
                        continue;  // budget exceeded for this candidate; skip
                    }
                    for (std::size_t di = 0; di < d_set.size(); ++di)
                        chosen.push_back(parts[di][static_cast<std::size_t>(mm.selection[di])]);
                }

                std::vector<PointId> sel = *v_set;
                sel.insert(sel.end(), chosen.begin(), chosen.end());
                CenterSet cand = CenterSet::of(std::move(sel));
                // Collisions between V and the ball choices can shrink the
                // set; pad deterministically, never exceeding k.
                for (PointId f : fac) {
                    if (static_cast<int>(cand.ids.size()) >= std::min(k, static_cast<int>(fac.size())))
                        break;
                    if (!cand.contains(f)) {
                        cand.ids.push_back(f);
                        std::sort(cand.ids.begin(), cand.ids.end());
                    }
                }
                const double obj = evaluate(inst, cand).objective;
                if (obj < best_obj || (obj == best_obj && cand < best)) {
                    best = std::move(cand);
                    best_obj = obj;
                }
            }

            int i = d_size - 1;
            while (i >= 0 && comb[static_cast<std::size_t>(i)] == static_cast<int>(pruned.size()) - d_size + i) --i;
            if (i < 0) break;
            ++comb[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < d_size; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
            if (d_size == 0) break;
        }
    }

    result.report.candidates_tried = tried;
    result.report.truncated = truncated;
    if (best.ids.empty()) {
        result.centers = best_k_subset(inst, CenterSet::of(pruned), cfg.subset_cap);
        result.report.path = "fallback";
    } else {
        result.centers = best;
        result.report.path = "enumeration";
    }
    result.report.cost = evaluate(inst, result.centers);
    return result;
}

ConversionResult convert_with_beta_search(const Instance& inst, const PseudoSolution& pseudo,
                                          const ConversionConfig& cfg) {
    const int m = inst.num_groups();
    const double cost_t = pseudo.cost.objective;
    const double c1 = pow_p(1.0 + 3.0 / cfg.delta, inst.p());

    if (static_cast<int>(pseudo.centers.size()) <= inst.k()) {
        ConversionConfig one = cfg;
        one.beta = 0.0;
        return convert(inst, pseudo, one);
    }

    // Doubling grid of optimum guesses. The pseudo-solution has more centers
    // than k, so the true optimum can exceed its cost; a cheap exhaustive
    // k-subset bounds it from above.
    double g_min = std::numeric_limits<double>::infinity();
    for (int s = 0; s < m; ++s)
        for (const auto& mem : inst.groups()[static_cast<std::size_t>(s)].members)
            for (PointId j : inst.facilities()) {
                const double v = mem.weight * pow_p(inst.distance(mem.client, j), inst.p());
                if (v > 0.0) g_min = std::min(g_min, v);
            }
    double g_max = cost_t;
    try {
        g_max = std::max(g_max, evaluate(inst, best_k_subset(inst, pseudo.centers, cfg.subset_cap)).objective);
    } catch (const std::runtime_error&) {
        // subset cap; the grid still covers up to cost_t
    }
    std::vector<double> guesses{0.0};
    if (std::isfinite(g_min) && g_min > 0.0)
        for (double g = g_min; g <= g_max * 2.0; g *= 2.0) guesses.push_back(g);

    ConversionResult best;
    double best_obj = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double g : guesses) {
        ConversionConfig run_cfg = cfg;
        run_cfg.beta = 2.0 / (m * cfg.t) * (g + c1 * cost_t);
        ConversionResult r;
        try {
            r = convert(inst, pseudo, run_cfg);
        } catch (const std::runtime_error&) {
            continue;
        }
        any = true;
        const double obj = r.report.cost.objective;
        if (obj < best_obj || (obj == best_obj && r.centers < best.centers)) {
            best = std::move(r);
            best_obj = obj;
        }
    }
    if (!any) {
        ConversionResult r;
        r.centers = best_k_subset(inst, pseudo.centers, cfg.subset_cap);
        r.report.path = "fallback";
        r.report.cost = evaluate(inst, r.centers);
        return r;
    }
    return best;
}

}  // namespace fairclust
