#include "fairclust/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fairclust {

CenterSet CenterSet::of(std::vector<PointId> raw) {
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    return CenterSet{std::move(raw)};
}

bool CenterSet::contains(PointId j) const {
    return std::binary_search(ids.begin(), ids.end(), j);
}

namespace {

void check_metric(const DistanceMatrix& m, double tol) {
    const int n = m.n;
    for (int i = 0; i < n; ++i) {
        if (std::abs(m(i, i)) > tol)
            throw std::invalid_argument("distance matrix has nonzero diagonal at " + std::to_string(i));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (m(i, j) < -tol)
                throw std::invalid_argument("negative distance");
            if (std::abs(m(i, j) - m(j, i)) > tol * (1.0 + std::abs(m(i, j))))
                throw std::invalid_argument("distance matrix not symmetric");
        }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double dab = m(a, b);
            for (int c = 0; c < n; ++c) {
                if (dab > m(a, c) + m(c, b) + tol * (1.0 + dab))
                    throw std::invalid_argument("triangle inequality violated");
            }
        }
}

}  // namespace

Instance::Instance(std::vector<PointId> clients, std::vector<PointId> facilities,
                   std::shared_ptr<const DistanceMatrix> dist, std::vector<Group> groups,
                   int k, double p, InstanceOptions opts)
    : clients_(std::move(clients)),
      facilities_(std::move(facilities)),
      dist_(std::move(dist)),
      groups_(std::move(groups)),
      k_(k),
      p_(p) {
    if (!dist_ || dist_->n <= 0) throw std::invalid_argument("empty distance matrix");
    if (static_cast<std::size_t>(dist_->n) * dist_->n != dist_->d.size())
        throw std::invalid_argument("distance matrix shape mismatch");
    auto in_range = [&](PointId id) { return id >= 0 && id < dist_->n; };
    if (clients_.empty()) throw std::invalid_argument("no clients");
    if (facilities_.empty()) throw std::invalid_argument("no facilities");
    for (PointId c : clients_)
        if (!in_range(c)) throw std::invalid_argument("client id out of range");
    for (PointId f : facilities_)
        if (!in_range(f)) throw std::invalid_argument("facility id out of range");
    if (k_ < 1 || k_ > static_cast<int>(facilities_.size()))
        throw std::invalid_argument("k must be in [1, |facilities|]");
    if (!(p_ >= 1.0)) throw std::invalid_argument("p must be >= 1");
    if (groups_.empty()) throw std::invalid_argument("need at least one group");
    for (const Group& g : groups_) {
        if (g.members.empty()) throw std::invalid_argument("empty group");
        for (const Group::Member& mem : g.members) {
            if (!in_range(mem.client)) throw std::invalid_argument("group member out of range");
            if (!(mem.weight >= 0.0)) throw std::invalid_argument("negative group weight");
        }
    }
    if (opts.check_metric) check_metric(*dist_, opts.metric_tol);
}

Instance Instance::from_points(const std::vector<std::vector<double>>& points,
                               std::vector<PointId> clients, std::vector<PointId> facilities,
                               std::vector<Group> groups, int k, double p, InstanceOptions opts) {
    const int n = static_cast<int>(points.size());
    auto m = std::make_shared<DistanceMatrix>();
    m->n = n;
    m->d.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (points[i].size() != points[0].size())
            throw std::invalid_argument("ragged point coordinates");
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < points[i].size(); ++t) {
                const double diff = points[i][t] - points[j][t];
                s += diff * diff;
            }
            const double dij = std::sqrt(s);
            m->d[static_cast<std::size_t>(i) * n + j] = dij;
            m->d[static_cast<std::size_t>(j) * n + i] = dij;
        }
    }
    opts.check_metric = false;  // exact by construction
    Instance inst(std::move(clients), std::move(facilities), std::move(m), std::move(groups), k, p,
                  opts);
    inst.coords_ = points;
    return inst;
}

double Instance::diameter() const {
    double best = 0.0;
    for (PointId i : clients_)
        for (PointId j : facilities_) best = std::max(best, distance(i, j));
    return best;
}

double Instance::min_positive_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (PointId i : clients_)
        for (PointId j : facilities_) {
            const double d = distance(i, j);
            if (d > 0.0) best = std::min(best, d);
        }
    return std::isfinite(best) ? best : 0.0;
}

Instance Instance::with_k(int k) const {
    Instance out = *this;
    if (k < 1 || k > static_cast<int>(facilities_.size()))
        throw std::invalid_argument("k must be in [1, |facilities|]");
    out.k_ = k;
    return out;
}

Instance Instance::with_facilities(std::vector<PointId> facilities) const {
    Instance out = *this;
    if (facilities.empty()) throw std::invalid_argument("no facilities");
    for (PointId f : facilities)
        if (f < 0 || f >= num_points()) throw std::invalid_argument("facility id out of range");
    if (static_cast<int>(facilities.size()) < k_)
        throw std::invalid_argument("fewer facilities than k");
    out.facilities_ = std::move(facilities);
    return out;
}

Instance Instance::from_json_text(const std::string& text, InstanceOptions opts) {
    const nlohmann::json j = nlohmann::json::parse(text);
    std::vector<Group> groups;
    for (const auto& jg : j.at("groups")) {
        Group g;
        g.label = jg.value("label", std::string{});
        const auto ids = jg.at("ids").get<std::vector<PointId>>();
        std::vector<double> weights;
        if (jg.contains("weights")) weights = jg.at("weights").get<std::vector<double>>();
        if (!weights.empty() && weights.size() != ids.size())
            throw std::invalid_argument("group weights length mismatch");
        for (std::size_t t = 0; t < ids.size(); ++t) {
            const double w = weights.empty() ? 1.0 / static_cast<double>(ids.size()) : weights[t];
            g.members.push_back({ids[t], w});
        }
        groups.push_back(std::move(g));
    }
    auto facilities = j.at("facilities").get<std::vector<PointId>>();
    const int k = j.at("k").get<int>();
    const double p = j.at("p").get<double>();

    if (j.contains("distance_matrix")) {
        const auto rows = j.at("distance_matrix").get<std::vector<std::vector<double>>>();
        auto m = std::make_shared<DistanceMatrix>();
        m->n = static_cast<int>(rows.size());
        for (const auto& r : rows) {
            if (r.size() != rows.size()) throw std::invalid_argument("distance matrix not square");
            m->d.insert(m->d.end(), r.begin(), r.end());
        }
        std::vector<PointId> clients;
        if (j.contains("clients"))
            clients = j.at("clients").get<std::vector<PointId>>();
        else
            for (int i = 0; i < m->n; ++i) clients.push_back(i);
        return Instance(std::move(clients), std::move(facilities), std::move(m), std::move(groups),
                        k, p, opts);
    }

    const auto points = j.at("points").get<std::vector<std::vector<double>>>();
    std::vector<PointId> clients;
    if (j.contains("clients"))
        clients = j.at("clients").get<std::vector<PointId>>();
    else
        for (std::size_t i = 0; i < points.size(); ++i) clients.push_back(static_cast<PointId>(i));
    return from_points(points, std::move(clients), std::move(facilities), std::move(groups), k, p,
                       opts);
}

Instance Instance::from_json_file(const std::string& path, InstanceOptions opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), opts);
}

std::string Instance::to_json_text() const {
    nlohmann::json j;
    if (!coords_.empty()) {
        j["points"] = coords_;
    } else {
        std::vector<std::vector<double>> rows(num_points(), std::vector<double>(num_points()));
        for (int a = 0; a < num_points(); ++a)
            for (int b = 0; b < num_points(); ++b) rows[a][b] = distance(a, b);
        j["distance_matrix"] = rows;
    }
    j["clients"] = clients_;
    j["facilities"] = facilities_;
    j["k"] = k_;
    j["p"] = p_;
    nlohmann::json jgroups = nlohmann::json::array();
    for (const Group& g : groups_) {
        nlohmann::json jg;
        if (!g.label.empty()) jg["label"] = g.label;
        std::vector<PointId> ids;
        std::vector<double> weights;
        for (const auto& mem : g.members) {
            ids.push_back(mem.client);
            weights.push_back(mem.weight);
        }
        jg["ids"] = ids;
        jg["weights"] = weights;
        jgroups.push_back(std::move(jg));
    }
    j["groups"] = std::move(jgroups);
    return j.dump(2);
}

CostProfile evaluate(const Instance& inst, const CenterSet& centers) {
    if (centers.ids.empty()) throw std::invalid_argument("no centers");
    const int n_points = inst.num_points();
    std::vector<double> nearest_p(static_cast<std::size_t>(n_points),
                                  std::numeric_limits<double>::infinity());
    // d(i, F)^p for every point that appears as a client.
    for (PointId i : inst.clients()) {
        double best = std::numeric_limits<double>::infinity();
        for (PointId j : centers.ids) best = std::min(best, inst.distance(i, j));
        nearest_p[static_cast<std::size_t>(i)] = pow_p(best, inst.p());
    }
    CostProfile out;
    out.per_group.reserve(inst.groups().size());
    for (const Group& g : inst.groups()) {
        double cost = 0.0;
        for (const auto& mem : g.members)
            cost += mem.weight * nearest_p[static_cast<std::size_t>(mem.client)];
        out.per_group.push_back(cost);
    }
    out.objective = *std::max_element(out.per_group.begin(), out.per_group.end());
    return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    std::uint64_t result = 1;
    for (std::uint64_t t = 1; t <= r; ++t) {
        // result * (n - r + t) / t stays integral; guard overflow by saturating.
        const std::uint64_t num = n - r + t;
        if (result > std::numeric_limits<std::uint64_t>::max() / num)
            return std::numeric_limits<std::uint64_t>::max();
        result = result * num / t;
    }
    return result;
}

std::pair<CenterSet, CostProfile> brute_force_opt(const Instance& inst, std::uint64_t subset_cap) {
    const auto& fac = inst.facilities();
    const int nf = static_cast<int>(fac.size());
    const int k = inst.k();
    if (binomial(nf, k) > subset_cap) throw std::runtime_error("instance too large for oracle");

    std::vector<PointId> sorted_fac = fac;
    std::sort(sorted_fac.begin(), sorted_fac.end());

    std::vector<int> comb(k);
    for (int i = 0; i < k; ++i) comb[i] = i;

    CenterSet best_set;
    CostProfile best_cost;
    bool have = false;
    auto consider = [&]() {
        std::vector<PointId> ids(k);
        for (int i = 0; i < k; ++i) ids[i] = sorted_fac[comb[i]];
        CenterSet cs = CenterSet::of(std::move(ids));
        CostProfile cp = evaluate(inst, cs);
        if (!have || cp.objective < best_cost.objective ||
            (cp.objective == best_cost.objective && cs < best_set)) {
            best_set = std::move(cs);
            best_cost = std::move(cp);
            have = true;
        }
    };
    consider();
    while (true) {
        int i = k - 1;
        while (i >= 0 && comb[i] == nf - k + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
        consider();
    }
    return {best_set, best_cost};
}

}  // namespace fairclust
