#ifndef FAIRCLUST_INSTANCE_HPP
#define FAIRCLUST_INSTANCE_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace fairclust {

using PointId = int;

/// d^p with fast paths for the common k-median / k-means exponents.
inline double pow_p(double base, double p) {
    if (p == 1.0) return base;
    if (p == 2.0) return base * base;
    return std::pow(base, p);
}

/// One demographic group: weighted client ids. Groups may overlap.
struct Group {
    struct Member {
        PointId client = 0;
        double weight = 0.0;
    };
    std::string label;
    std::vector<Member> members;
};

/// Per-group clustering costs plus their maximum (the min-max objective).
struct CostProfile {
    std::vector<double> per_group;
    double objective = 0.0;
};

/// A nonempty subset of facilities, kept sorted and deduplicated.
struct CenterSet {
    std::vector<PointId> ids;

    static CenterSet of(std::vector<PointId> raw);
    bool contains(PointId j) const;
    std::size_t size() const { return ids.size(); }

    friend bool operator==(const CenterSet&, const CenterSet&) = default;
    // Order used for deterministic tie-breaking.
    friend bool operator<(const CenterSet& a, const CenterSet& b) { return a.ids < b.ids; }
};

/// Dense symmetric distance matrix over all points of an instance.
struct DistanceMatrix {
    int n = 0;
    std::vector<double> d;  // row-major n*n

    double operator()(PointId a, PointId b) const { return d[static_cast<std::size_t>(a) * n + b]; }
};

struct InstanceOptions {
    bool check_metric = true;    // symmetry + triangle inequality on construction
    double metric_tol = 1e-9;
};

/// A socially fair (l_p, k)-clustering instance. Immutable after construction;
/// copies share the distance matrix.
class Instance {
public:
    Instance(std::vector<PointId> clients, std::vector<PointId> facilities,
             std::shared_ptr<const DistanceMatrix> dist, std::vector<Group> groups,
             int k, double p, InstanceOptions opts = {});

    /// Euclidean metric over coordinate rows; keeps the coordinates for dumps.
    static Instance from_points(const std::vector<std::vector<double>>& points,
                                std::vector<PointId> clients, std::vector<PointId> facilities,
                                std::vector<Group> groups, int k, double p,
                                InstanceOptions opts = {});

    static Instance from_json_text(const std::string& text, InstanceOptions opts = {});
    static Instance from_json_file(const std::string& path, InstanceOptions opts = {});
    std::string to_json_text() const;

    const std::vector<PointId>& clients() const { return clients_; }
    const std::vector<PointId>& facilities() const { return facilities_; }
    const std::vector<Group>& groups() const { return groups_; }
    int num_groups() const { return static_cast<int>(groups_.size()); }
    int num_points() const { return dist_->n; }
    int k() const { return k_; }
    double p() const { return p_; }
    double distance(PointId a, PointId b) const { return (*dist_)(a, b); }
    const std::shared_ptr<const DistanceMatrix>& matrix() const { return dist_; }

    /// Largest client-facility distance (0 if degenerate).
    double diameter() const;
    /// Smallest nonzero client-facility distance (0 if all zero).
    double min_positive_distance() const;

    /// Same instance with a different k.
    Instance with_k(int k) const;
    /// Same instance restricted to a facility subset (must be nonempty, >= k).
    Instance with_facilities(std::vector<PointId> facilities) const;

private:
    Instance() = default;

    std::vector<PointId> clients_;
    std::vector<PointId> facilities_;
    std::shared_ptr<const DistanceMatrix> dist_;
    std::vector<Group> groups_;
    int k_ = 1;
    double p_ = 1.0;
    std::vector<std::vector<double>> coords_;  // optional, only for JSON round trips
};

/// Exact socially fair cost of a center set: per_group[s] = sum w_s(i) * d(i,F)^p,
/// objective = max over groups. Throws "no centers" on an empty set.
CostProfile evaluate(const Instance& inst, const CenterSet& centers);

/// Exhaustive optimum over all k-subsets of the facilities. Ties broken by
/// lexicographic center ids. Throws "instance too large for oracle" if
/// C(|F|, k) exceeds the cap.
std::pair<CenterSet, CostProfile> brute_force_opt(const Instance& inst,
                                                  std::uint64_t subset_cap = 2'000'000);

/// C(n, r) with saturation, used for enumeration guards.
std::uint64_t binomial(std::uint64_t n, std::uint64_t r);

}  // namespace fairclust

#endif  // FAIRCLUST_INSTANCE_HPP
