#include "fairclust/abv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fairclust {

CenterSet abv_filtering(const Instance& inst, const FilteringParams& params) {
    const double eps = params.epsilon;
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("epsilon must be in (0, 1)");

    Lp1Solution local;
    const Lp1Solution* lp1 = params.lp1_solution;
    if (lp1 == nullptr) {
        local = solve_lp1(inst, params.lp1);
        lp1 = &local;
    }

    const auto& clients = inst.clients();
    const int nc = static_cast<int>(clients.size());
    const double p = inst.p();

    std::vector<double> radius_p(static_cast<std::size_t>(nc), 0.0);
    for (int i = 0; i < nc; ++i)
        for (const auto& [fid, v] : lp1->x[static_cast<std::size_t>(i)])
            radius_p[static_cast<std::size_t>(i)] += v * pow_p(inst.distance(clients[i], fid), p);

    std::vector<int> order(static_cast<std::size_t>(nc));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (radius_p[static_cast<std::size_t>(a)] != radius_p[static_cast<std::size_t>(b)])
            return radius_p[static_cast<std::size_t>(a)] < radius_p[static_cast<std::size_t>(b)];
        return clients[a] < clients[b];
    });

    // Filtered ball radius of client i: (R_i / eps)^(1/p).
    std::vector<double> ball_r(static_cast<std::size_t>(nc));
    for (int i = 0; i < nc; ++i)
        ball_r[static_cast<std::size_t>(i)] = std::pow(radius_p[static_cast<std::size_t>(i)] / eps, 1.0 / p);

    std::vector<char> suppressed(static_cast<std::size_t>(nc), 0);
    std::vector<PointId> opened;
    std::vector<int> selected;
    for (int i : order) {
        if (suppressed[static_cast<std::size_t>(i)]) continue;
        selected.push_back(i);
        // Nearest facility inside the ball; the LP puts at least 1-eps
        // assignment mass there, so it is nonempty.
        PointId best_f = -1;
        double best_d = std::numeric_limits<double>::infinity();
        const double r = ball_r[static_cast<std::size_t>(i)] * (1.0 + 1e-12);
        for (PointId j : inst.facilities()) {
            const double d = inst.distance(clients[i], j);
            if (d <= r && (d < best_d || (d == best_d && j < best_f))) {
                best_d = d;
                best_f = j;
            }
        }
        if (best_f < 0) {
            // Degenerate numerics; fall back to the overall nearest facility.
            for (PointId j : inst.facilities()) {
                const double d = inst.distance(clients[i], j);
                if (d < best_d || (d == best_d && j < best_f)) {
                    best_d = d;
                    best_f = j;
                }
            }
        }
        opened.push_back(best_f);
        // Suppress every client within twice its own ball radius; later
        // clients have no smaller radius, making selected balls disjoint.
        for (int j = 0; j < nc; ++j) {
            if (suppressed[static_cast<std::size_t>(j)]) continue;
            if (inst.distance(clients[i], clients[j]) <=
                2.0 * ball_r[static_cast<std::size_t>(j)] * (1.0 + 1e-12))
                suppressed[static_cast<std::size_t>(j)] = 1;
        }
        if (!suppressed[static_cast<std::size_t>(i)])
            throw std::logic_error("filtering failed to suppress the selected client");
    }

    // The filtering invariant: selected clients' balls are pairwise disjoint.
    for (std::size_t a = 0; a < selected.size(); ++a)
        for (std::size_t b = a + 1; b < selected.size(); ++b) {
            const double d = inst.distance(clients[static_cast<std::size_t>(selected[a])],
                                           clients[static_cast<std::size_t>(selected[b])]);
            if (d <= ball_r[static_cast<std::size_t>(selected[a])] + ball_r[static_cast<std::size_t>(selected[b])] - 1e-9)
                throw std::logic_error("filtered balls overlap");
        }
    const auto cap = static_cast<std::size_t>(std::ceil(inst.k() / (1.0 - eps) - 1e-9));
    if (selected.size() > cap) throw std::logic_error("filtering opened too many centers");

    return CenterSet::of(std::move(opened));
}

}  // namespace fairclust
