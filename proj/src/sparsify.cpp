#include "fairclust/sparsify.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>

namespace fairclust {

std::vector<PointId> fball(const Instance& inst, PointId q, double r) {
    std::vector<PointId> out;
    for (PointId j : inst.facilities())
        if (inst.distance(q, j) < r) out.push_back(j);
    return out;
}

double cball_mass(const Instance& inst, int group, PointId q, double r) {
    double mass = 0.0;
    for (const auto& mem : inst.groups()[static_cast<std::size_t>(group)].members)
        if (inst.distance(q, mem.client) < r) mass += mem.weight;
    return mass;
}

bool groups_disjoint(const Instance& inst) {
    std::set<PointId> seen;
    for (const Group& g : inst.groups()) {
        std::set<PointId> mine;
        for (const auto& mem : g.members) mine.insert(mem.client);
        for (PointId c : mine)
            if (!seen.insert(c).second) return false;
    }
    return true;
}

SparsifyStream::SparsifyStream(const Instance& base, int t, SparsifyCaps caps)
    : base_(base), t_(t), caps_(caps) {
    if (t_ < 1) throw std::invalid_argument("t must be >= 1");
    max_len_ = base_.num_groups() * base_.num_groups() * t_;
    if (!groups_disjoint(base_)) {
        overlap_warning_ = true;
        std::fprintf(stderr,
                     "fairclust: warning: sparsify guarantee assumes disjoint groups; "
                     "this instance has overlapping groups\n");
    }
}

bool SparsifyStream::advance_odometer() {
    // Sequences of pair indices in base |F|^2, lexicographic, lengths 1..max_len_.
    const int npairs = static_cast<int>(base_.facilities().size() * base_.facilities().size());
    if (cur_len_ == 0) {
        cur_len_ = 1;
        digits_.assign(1, 0);
        return max_len_ >= 1;
    }
    int pos = cur_len_ - 1;
    while (pos >= 0) {
        if (++digits_[static_cast<std::size_t>(pos)] < npairs) return true;
        digits_[static_cast<std::size_t>(pos)] = 0;
        --pos;
    }
    if (cur_len_ + 1 > max_len_) return false;
    ++cur_len_;
    digits_.assign(static_cast<std::size_t>(cur_len_), 0);
    return true;
}

std::optional<SparsifiedInstance> SparsifyStream::next() {
    const auto& fac = base_.facilities();
    const int nf = static_cast<int>(fac.size());
    while (!done_) {
        if (generated_ >= caps_.max_candidates) {
            truncated_ = true;
            done_ = true;
            break;
        }
        if (cur_len_ == 0 && generated_ == 0) {
            // The t'=0 emission: already-sparse instances need the unmodified
            // candidate for the guarantee to hold.
            ++generated_;
            if (!advance_odometer()) done_ = true;
            return SparsifiedInstance{base_, SparsifyJob{t_, {}}};
        }
        ++generated_;
        SparsifyJob job{t_, {}};
        for (int d : digits_) job.pair_sequence.emplace_back(fac[static_cast<std::size_t>(d / nf)],
                                                             fac[static_cast<std::size_t>(d % nf)]);
        const bool more = advance_odometer();

        std::vector<char> removed(static_cast<std::size_t>(base_.num_points()), 0);
        for (const auto& [j, jp] : job.pair_sequence)
            for (PointId v : fball(base_, j, base_.distance(j, jp)))
                removed[static_cast<std::size_t>(v)] = 1;
        std::vector<PointId> surviving;
        for (PointId j : fac)
            if (!removed[static_cast<std::size_t>(j)]) surviving.push_back(j);
        if (!more) done_ = true;
        if (static_cast<int>(surviving.size()) < base_.k()) continue;  // infeasible, discard
        return SparsifiedInstance{base_.with_facilities(std::move(surviving)), std::move(job)};
    }
    return std::nullopt;
}

bool is_alpha_sparse(const Instance& inst, double alpha, const CenterSet& opt_centers) {
    const double tol = 1e-12 * std::max(1.0, alpha);
    for (PointId j : inst.facilities()) {
        double d_opt = std::numeric_limits<double>::infinity();
        for (PointId o : opt_centers.ids) d_opt = std::min(d_opt, inst.distance(j, o));
        if (d_opt == 0.0) continue;  // facilities of the optimum are never dense
        const double scale = pow_p(2.0 / 3.0 * d_opt, inst.p());
        for (int s = 0; s < inst.num_groups(); ++s) {
            if (scale * cball_mass(inst, s, j, d_opt / 3.0) > alpha + tol) return false;
        }
    }
    return true;
}

}  // namespace fairclust
