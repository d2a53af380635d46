#ifndef FAIRCLUST_ROUNDING_HPP
#define FAIRCLUST_ROUNDING_HPP

#include <cmath>
#include <string>
#include <vector>

#include "fairclust/instance.hpp"
#include "fairclust/lp1.hpp"

namespace fairclust {

/// Default shrink factor: the value minimizing the bicriteria approximation
/// factor ((1 + 2(1+l)/l)(1+l))^p, namely sqrt(2/3).
inline double default_lambda() { return std::sqrt(2.0 / 3.0); }

/// Bicriteria cost factor ((1 + 2(1+l)/l)(1+l))^p for a given lambda.
inline double bicriteria_factor(double lambda, double p) {
    return pow_p((1.0 + 2.0 * (1.0 + lambda) / lambda) * (1.0 + lambda), p);
}

/// Nonzero distances snap to the nearest power of (1+lambda); zero stays zero.
double round_to_grid(double d, double lambda);

/// One copy of an original facility created by the level split. Capacities of
/// all copies of one original sum to its fractional opening.
struct SplitFacility {
    PointId original = 0;
    int copy_index = 0;
    double capacity = 0.0;
};

/// Outcome of splitting facilities at the unique nonzero assignment levels:
/// per-client candidate copies F_i (every copy fully used or unused) and the
/// per-client maximum candidate distance.
struct SplitOutcome {
    std::vector<SplitFacility> copies;
    std::vector<std::vector<int>> f_sets;  // per client position: copy indices
    std::vector<double> d_max;             // per client position: max d(i, F_i)
};

SplitOutcome split_facilities(const Instance& inst, const Lp1Solution& lp1);

/// Client bookkeeping for the rounding loop: candidate copies, inner-ball
/// copies, current radius, and representative status.
struct ClientState {
    PointId client = 0;
    std::vector<int> f_set;
    std::vector<int> b_set;
    double radius = 0.0;
    bool representative = false;
};

/// Greedy maximal representative selection: clients in increasing (radius, id)
/// order enter the representative set while their candidate copies stay
/// disjoint from all previously claimed copies.
void init_representatives(std::vector<ClientState>& states);

struct RoundingTraceRow {
    int iteration = 0;
    double lp_objective = 0.0;
    int num_representatives = 0;
    int num_nonrepresentatives = 0;
    int shrunk_client = -1;  // -1 on the terminal iteration
    int support_size = 0;    // distinct original facilities in the LP support
};

struct RoundingOptions {
    double lambda = default_lambda();
    /// One shrink per LP re-solve (the default) or all currently-tight clients
    /// per round. Batching preserves every loop invariant and cuts the number
    /// of LP solves roughly by the number of simultaneously tight clients.
    bool batch_shrinks = false;
    bool check_invariants = true;
    double iteration_cap_constant = 64.0;
    std::vector<RoundingTraceRow>* trace = nullptr;
    Lp1Options lp1;
    const Lp1Solution* lp1_solution = nullptr;  // reuse a cached relaxation solve
};

/// A center set of size at most k+m with its exact cost profile and the LP
/// lower bound it was rounded from.
struct PseudoSolution {
    CenterSet centers;
    int size_bound_witness = 0;  // k + m
    CostProfile cost;
    double lp_lower_bound = 0.0;
};

/// The iterative rounding pipeline: solve the relaxation, split facilities,
/// pick representatives, then repeatedly re-solve the representative LP to a
/// vertex while shrinking tight clients. Opens every original facility in the
/// final support.
PseudoSolution iterative_round(const Instance& inst, const RoundingOptions& opts = {});

}  // namespace fairclust

#endif  // FAIRCLUST_ROUNDING_HPP
