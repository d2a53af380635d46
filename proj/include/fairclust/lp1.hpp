#ifndef FAIRCLUST_LP1_HPP
#define FAIRCLUST_LP1_HPP

#include <string>
#include <utility>
#include <vector>

#include "fairclust/instance.hpp"

namespace fairclust {

/// A feasible solution of the standard relaxation: fractional openings y over
/// the candidate facilities, fractional assignments x per client, and the
/// min-max objective value z. `lower_bound` is a certified lower bound on the
/// relaxation optimum (equal to z up to the solver gap), hence also a lower
/// bound on the integral optimum.
struct Lp1Solution {
    std::vector<double> y;  // aligned with Instance::facilities()
    std::vector<std::vector<std::pair<PointId, double>>> x;  // per client position: (facility id, value)
    double z = 0.0;
    double lower_bound = 0.0;
    double gap = 0.0;
    bool vertex = false;  // true when the full LP was solved to a basic solution
};

struct Lp1Options {
    /// Build the full LP (one assignment variable per client-facility pair)
    /// only when clients*facilities stays at or below this; larger instances
    /// use the exact cutting-plane decomposition.
    int direct_limit = 2000;
    double gap_tol = 1e-9;     // relative termination gap for the decomposition
    int max_iterations = 600;  // decomposition outer-iteration cap
    bool force_direct = false;
    bool force_decomposition = false;
    std::string dump_lp_path;  // when set, dump the (direct) LP in LP format
};

Lp1Solution solve_lp1(const Instance& inst, const Lp1Options& opts = {});

}  // namespace fairclust

#endif  // FAIRCLUST_LP1_HPP
