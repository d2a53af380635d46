#ifndef FAIRCLUST_SPARSIFY_HPP
#define FAIRCLUST_SPARSIFY_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fairclust/instance.hpp"

namespace fairclust {

/// Facilities strictly inside the ball of radius r around point q.
std::vector<PointId> fball(const Instance& inst, PointId q, double r);

/// Total weight of group s clients strictly inside the ball of radius r at q.
double cball_mass(const Instance& inst, int group, PointId q, double r);

/// True iff every client of every group is in at most one group.
bool groups_disjoint(const Instance& inst);

struct SparsifyJob {
    int t = 1;
    std::vector<std::pair<PointId, PointId>> pair_sequence;  // empty = unmodified
};

struct SparsifiedInstance {
    Instance instance;
    SparsifyJob provenance;
};

struct SparsifyCaps {
    std::uint64_t max_candidates = 10'000;  // generated sequences, pre-discard
};

/// Candidate generator: emits the unmodified instance first, then every
/// ordered pair sequence of length 1..m^2*t in deterministic order, removing
/// the facilities inside each pair's ball. Candidates whose surviving
/// facility set has fewer than k members are discarded. Cap exhaustion ends
/// the stream and sets the truncation flag.
class SparsifyStream {
public:
    SparsifyStream(const Instance& base, int t, SparsifyCaps caps = {});

    std::optional<SparsifiedInstance> next();
    bool truncated() const { return truncated_; }
    std::uint64_t generated() const { return generated_; }
    bool overlapping_groups_warning() const { return overlap_warning_; }

private:
    bool advance_odometer();

    const Instance& base_;
    int t_ = 1;
    SparsifyCaps caps_;
    int max_len_ = 0;
    int cur_len_ = 0;          // 0 = the unmodified emission
    std::vector<int> digits_;  // current pair indices, length cur_len_
    std::uint64_t generated_ = 0;
    bool done_ = false;
    bool truncated_ = false;
    bool overlap_warning_ = false;
};

/// Test oracle for the sparsity definition: checks that no facility packs more
/// than alpha worth of (2/3 d(j,OPT))^p-scaled client mass in its inner ball.
bool is_alpha_sparse(const Instance& inst, double alpha, const CenterSet& opt_centers);

}  // namespace fairclust

#endif  // FAIRCLUST_SPARSIFY_HPP
