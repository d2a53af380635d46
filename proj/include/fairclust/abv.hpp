#ifndef FAIRCLUST_ABV_HPP
#define FAIRCLUST_ABV_HPP

#include "fairclust/instance.hpp"
#include "fairclust/lp1.hpp"

namespace fairclust {

struct FilteringParams {
    double epsilon = 0.5;  // in (0, 1)
    Lp1Options lp1;
    const Lp1Solution* lp1_solution = nullptr;  // reuse a cached relaxation solve
};

/// Filtering rounding of the relaxation: clients are processed by increasing
/// fractional radius R_i = sum_j x_ij d(i,j)^p; each selected client opens the
/// nearest facility inside its (R_i/eps)^(1/p)-ball and suppresses every
/// client within twice that client's own ball radius. Opens at most
/// ceil(k/(1-eps)) centers.
CenterSet abv_filtering(const Instance& inst, const FilteringParams& params);

}  // namespace fairclust

#endif  // FAIRCLUST_ABV_HPP
