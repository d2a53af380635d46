#ifndef FAIRCLUST_CONVERT_HPP
#define FAIRCLUST_CONVERT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fairclust/instance.hpp"
#include "fairclust/rounding.hpp"

namespace fairclust {

/// Cheapest k-subset of a center set by exhaustive search; ties broken by
/// lexicographic center ids. Throws "instance too large for oracle" when
/// C(|S|, k) exceeds the cap.
CenterSet best_k_subset(const Instance& inst, const CenterSet& s,
                        std::uint64_t subset_cap = 2'000'000);

/// Pick one item from each of k disjoint parts minimizing the maximum over
/// groups of the summed per-part costs.
struct MinMaxAssignmentProblem {
    /// costs[g][j][v]: cost of item v of part j under group g. All parts
    /// nonempty, all costs nonnegative.
    std::vector<std::vector<std::vector<double>>> costs;
    double epsilon = 0.5;

    int num_groups() const { return static_cast<int>(costs.size()); }
    int num_parts() const { return costs.empty() ? 0 : static_cast<int>(costs[0].size()); }
};

struct MinMaxResult {
    std::vector<int> selection;  // chosen item index per part
    double value = 0.0;
};

/// (1+epsilon)-approximate solver: guesses the parts carrying large optimal
/// cost and the items chosen there, fixes them in the partition-matroid LP,
/// solves to a vertex (at most m fractional parts remain), and enumerates
/// completions of the fractional parts. Exact for m = 1. Throws
/// "subproblem too large" past the guess budget.
MinMaxResult minmax_assign(const MinMaxAssignmentProblem& prob, std::uint64_t budget = 200'000);

struct ConversionConfig {
    double epsilon_prime = 0.9;
    double delta = 0.05;
    int t = 1;
    double beta = 0.0;                     // convert() pruning slack
    std::uint64_t candidate_cap = 10'000;  // (D, V) pairs per convert call
    std::uint64_t minmax_budget = 200'000;
    std::uint64_t subset_cap = 2'000'000;
};

struct ConversionReport {
    std::string path;  // "early-exit" | "enumeration" | "fallback"
    double beta = 0.0;
    std::uint64_t candidates_tried = 0;
    bool truncated = false;
    CostProfile cost;

    std::string to_json() const;
};

struct ConversionResult {
    CenterSet centers;
    ConversionReport report;
};

/// Turn a pseudo-solution (<= k+m centers) into exactly k centers: greedy
/// beta-pruning with an early exit, then enumeration of (kept subset D,
/// replacement set V) candidates scored through minmax_assign; falls back to
/// best_k_subset when no candidate survives the caps.
ConversionResult convert(const Instance& inst, const PseudoSolution& pseudo,
                         const ConversionConfig& cfg);

/// Runs convert for beta values derived from a doubling grid of optimum
/// guesses and keeps the cheapest feasible result.
ConversionResult convert_with_beta_search(const Instance& inst, const PseudoSolution& pseudo,
                                          const ConversionConfig& cfg);

}  // namespace fairclust

#endif  // FAIRCLUST_CONVERT_HPP
