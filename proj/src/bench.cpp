#include "fairclust/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "fairclust/abv.hpp"
#include "fairclust/convert.hpp"
#include "fairclust/lp1.hpp"
#include "fairclust/sparsify.hpp"

namespace fairclust {

namespace {

std::string fmt(double v, const char* spec = "%.9g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    for (const auto& ji : j.at("instances")) {
        InstanceSource src;
        if (ji.contains("dataset_spec")) {
            src.dataset = DatasetSpec::from_json_file(ji.at("dataset_spec").get<std::string>());
            src.name = ji.value("name", src.dataset->name);
        } else {
            src.instance_path = ji.at("instance").get<std::string>();
            src.name = ji.value("name", src.instance_path);
        }
        cfg.instances.push_back(std::move(src));
    }
    cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    cfg.k_list = j.at("k_list").get<std::vector<int>>();
    if (j.contains("lambda_list")) cfg.lambda_list = j.at("lambda_list").get<std::vector<double>>();
    if (j.contains("epsilon_list")) cfg.epsilon_list = j.at("epsilon_list").get<std::vector<double>>();
    cfg.sparsify_t = j.value("t", cfg.sparsify_t);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.epsilon_prime = j.value("epsilon_prime", cfg.epsilon_prime);
    cfg.sparsify_cap = j.value("sparsify_cap", cfg.sparsify_cap);
    cfg.brute_force_cap = j.value("brute_force_cap", cfg.brute_force_cap);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.trace = j.value("trace", cfg.trace);
    cfg.fixed_runtime = j.value("fixed_runtime", cfg.fixed_runtime);
    cfg.svg = j.value("svg", cfg.svg);
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experiment config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

bool ExperimentReport::any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failed; });
}

std::string ExperimentReport::to_csv(bool fixed_runtime) const {
    std::string out = "dataset,algorithm,k,params,group_costs,objective,num_centers,runtime_ms\n";
    for (const ReportRow& r : rows) {
        out += r.dataset + ',' + r.algorithm + ',' + std::to_string(r.k) + ',' + r.params + ',';
        for (std::size_t s = 0; s < r.group_costs.size(); ++s) {
            if (s) out += ';';
            out += fmt(r.group_costs[s]);
        }
        out += ',';
        out += r.failed ? "nan" : fmt(r.objective);
        out += ',' + std::to_string(r.num_centers) + ',';
        out += fixed_runtime ? std::string("0") : fmt(r.runtime_ms, "%.3f");
        out += '\n';
    }
    return out;
}

namespace {

struct RowJob {
    int instance_index = 0;
    int k = 0;
    std::string algorithm;
    std::string params;
    double lambda = 0.3;
    double epsilon = 0.5;
};

// Relaxation solves are shared between rows of one (instance, k) cell.
class Lp1Cache {
public:
    const Lp1Solution& get(int instance_index, int k, const Instance& inst) {
        Cell* cell;
        {
            std::lock_guard<std::mutex> lock(mu_);
            cell = &cells_[{instance_index, k}];
        }
        std::call_once(cell->once, [&] { cell->solution = solve_lp1(inst); });
        return cell->solution;
    }

private:
    struct Cell {
        std::once_flag once;
        Lp1Solution solution;
    };
    std::mutex mu_;
    std::map<std::pair<int, int>, Cell> cells_;
};

constexpr int kBatchThreshold = 2000;  // clients*facilities above which shrinks batch

ReportRow execute(const RowJob& job, const Instance& base, const ExperimentConfig& cfg,
                  Lp1Cache& cache) {
    ReportRow row;
    row.dataset = cfg.instances[static_cast<std::size_t>(job.instance_index)].name;
    row.algorithm = job.algorithm;
    row.k = job.k;
    row.params = job.params;

    const Instance inst = base.with_k(job.k);
    const bool large = static_cast<long long>(inst.clients().size()) *
                           static_cast<long long>(inst.facilities().size()) >
                       kBatchThreshold;

    const auto t0 = std::chrono::steady_clock::now();
    try {
        CenterSet centers;
        if (job.algorithm == "iterative_rounding" || job.algorithm == "best_k_subset_pipeline") {
            RoundingOptions ro;
            ro.lambda = job.lambda;
            ro.batch_shrinks = large;
            const Lp1Solution& lp1 = cache.get(job.instance_index, job.k, inst);
            ro.lp1_solution = &lp1;
            if (cfg.trace && job.algorithm == "iterative_rounding") ro.trace = &row.trace;
            PseudoSolution pseudo = iterative_round(inst, ro);
            if (job.algorithm == "best_k_subset_pipeline")
                centers = best_k_subset(inst, pseudo.centers, cfg.brute_force_cap);
            else
                centers = pseudo.centers;
        } else if (job.algorithm == "abv") {
            FilteringParams fp;
            fp.epsilon = job.epsilon;
            const Lp1Solution& lp1 = cache.get(job.instance_index, job.k, inst);
            fp.lp1_solution = &lp1;
            centers = abv_filtering(inst, fp);
        } else if (job.algorithm == "sparse_pipeline") {
            ConversionConfig cc;
            cc.delta = cfg.delta;
            cc.epsilon_prime = cfg.epsilon_prime;
            cc.t = cfg.sparsify_t;
            double best = std::numeric_limits<double>::infinity();
            SparsifyStream stream(inst, cfg.sparsify_t, SparsifyCaps{cfg.sparsify_cap});
            while (auto cand = stream.next()) {
                RoundingOptions ro;
                ro.lambda = job.lambda;
                ro.batch_shrinks = large;
                PseudoSolution pseudo = iterative_round(cand->instance, ro);
                ConversionResult res = convert_with_beta_search(cand->instance, pseudo, cc);
                const double obj = evaluate(inst, res.centers).objective;
                if (obj < best || (obj == best && res.centers < centers)) {
                    best = obj;
                    centers = res.centers;
                }
            }
            if (centers.ids.empty()) throw std::runtime_error("no sparsifier candidate succeeded");
        } else if (job.algorithm == "brute_force") {
            centers = brute_force_opt(inst, cfg.brute_force_cap).first;
        } else {
            throw std::invalid_argument("unknown algorithm: " + job.algorithm);
        }

        const CostProfile cost = evaluate(inst, centers);
        row.centers = centers.ids;
        row.group_costs = cost.per_group;
        row.objective = cost.objective;
        row.num_centers = static_cast<int>(centers.size());

        const int m = inst.num_groups();
        if (job.algorithm == "iterative_rounding" && row.num_centers > job.k + m)
            throw std::logic_error("center count exceeds k+m");
        if (job.algorithm == "abv" &&
            row.num_centers > static_cast<int>(std::ceil(job.k / (1.0 - job.epsilon) - 1e-9)))
            throw std::logic_error("center count exceeds the filtering bound");
        if ((job.algorithm == "brute_force" || job.algorithm == "best_k_subset_pipeline" ||
             job.algorithm == "sparse_pipeline") &&
            row.num_centers > job.k)
            throw std::logic_error("exact algorithm returned more than k centers");
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    row.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
}

}  // namespace

ExperimentReport run(const ExperimentConfig& cfg) {
    // Instances load up front; load time never counts toward row runtimes.
    std::vector<Instance> instances;
    for (const InstanceSource& src : cfg.instances) {
        if (src.dataset)
            instances.push_back(load(*src.dataset));
        else
            instances.push_back(Instance::from_json_file(src.instance_path));
    }

    std::vector<RowJob> jobs;
    for (int ii = 0; ii < static_cast<int>(instances.size()); ++ii) {
        for (const std::string& alg : cfg.algorithms) {
            for (int k : cfg.k_list) {
                if (k < 1 || k > static_cast<int>(instances[static_cast<std::size_t>(ii)].facilities().size()))
                    throw std::invalid_argument("k outside [1, |facilities|] for " +
                                                cfg.instances[static_cast<std::size_t>(ii)].name);
                if (alg == "iterative_rounding" || alg == "best_k_subset_pipeline" ||
                    alg == "sparse_pipeline") {
                    for (double lambda : cfg.lambda_list) {
                        RowJob job{ii, k, alg, "lambda=" + fmt(lambda, "%.6g"), lambda, 0.0};
                        if (alg == "sparse_pipeline")
                            job.params += ";t=" + std::to_string(cfg.sparsify_t) +
                                          ";delta=" + fmt(cfg.delta, "%.6g") +
                                          ";eps_prime=" + fmt(cfg.epsilon_prime, "%.6g");
                        jobs.push_back(std::move(job));
                    }
                } else if (alg == "abv") {
                    for (double eps : cfg.epsilon_list)
                        jobs.push_back(RowJob{ii, k, alg, "epsilon=" + fmt(eps, "%.6g"), 0.0, eps});
                } else {
                    jobs.push_back(RowJob{ii, k, alg, "", 0.0, 0.0});
                }
            }
        }
    }

    ExperimentReport report;
    report.rows.resize(jobs.size());
    Lp1Cache cache;

    const int threads = std::max(1, cfg.threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            report.rows[i] = execute(jobs[i], instances[static_cast<std::size_t>(jobs[i].instance_index)],
                                     cfg, cache);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return report;
}

std::string render_svg_chart(const ExperimentReport& report, const std::string& dataset,
                             int num_groups) {
    struct Series {
        std::string label;
        std::vector<std::pair<int, double>> points;        // (k, objective)
        std::vector<std::pair<int, double>> minima;        // (k, min group cost)
    };
    std::map<std::string, Series> series;
    double ymax = 0.0;
    int kmin = 1 << 30, kmax = 0;
    for (const ReportRow& r : report.rows) {
        if (r.dataset != dataset || r.failed) continue;
        const std::string key = r.algorithm + (r.params.empty() ? "" : " " + r.params);
        Series& s = series[key];
        s.label = key;
        s.points.emplace_back(r.k, r.objective);
        double mn = r.objective;
        for (double g : r.group_costs) mn = std::min(mn, g);
        s.minima.emplace_back(r.k, mn);
        ymax = std::max(ymax, r.objective);
        kmin = std::min(kmin, r.k);
        kmax = std::max(kmax, r.k);
    }
    if (series.empty()) return {};
    if (kmax == kmin) ++kmax;
    ymax = ymax <= 0.0 ? 1.0 : ymax * 1.05;

    const double W = 860, H = 520, L = 70, R = 660, T = 30, B = 470;
    auto xs = [&](double k) { return L + (k - kmin) / double(kmax - kmin) * (R - L); };
    auto ys = [&](double v) { return B - v / ymax * (B - T); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' ' << H
        << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    svg << "<text x=\"" << L << "\" y=\"18\" font-size=\"15\">" << dataset
        << " - objective vs k</text>\n";
    // Axes and ticks.
    svg << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << R << "\" y2=\"" << B
        << "\" stroke=\"#333\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << B
        << "\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = ymax * t / 5.0;
        svg << "<text x=\"" << L - 8 << "\" y=\"" << fmt(ys(v) + 4, "%.1f")
            << "\" text-anchor=\"end\">" << fmt(v, "%.3g") << "</text>\n";
        svg << "<line x1=\"" << L << "\" y1=\"" << fmt(ys(v), "%.1f") << "\" x2=\"" << R
            << "\" y2=\"" << fmt(ys(v), "%.1f") << "\" stroke=\"#ddd\"/>\n";
    }
    std::vector<int> kticks;
    for (const auto& [key, s] : series)
        for (const auto& [k, v] : s.points) kticks.push_back(k);
    std::sort(kticks.begin(), kticks.end());
    kticks.erase(std::unique(kticks.begin(), kticks.end()), kticks.end());
    for (int k : kticks) {
        svg << "<text x=\"" << fmt(xs(k), "%.1f") << "\" y=\"" << B + 18
            << "\" text-anchor=\"middle\">" << k << "</text>\n";
    }
    svg << "<text x=\"" << (L + R) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\">k</text>\n";

    int color = 0, legend_y = 40;
    for (auto& [key, s] : series) {
        std::sort(s.points.begin(), s.points.end());
        std::sort(s.minima.begin(), s.minima.end());
        const char* c = palette[color % 10];
        if (num_groups > 2) {
            // Shaded band between the max (objective) and min group costs.
            std::ostringstream poly;
            for (const auto& [k, v] : s.points) poly << fmt(xs(k), "%.1f") << ',' << fmt(ys(v), "%.1f") << ' ';
            for (auto it = s.minima.rbegin(); it != s.minima.rend(); ++it)
                poly << fmt(xs(it->first), "%.1f") << ',' << fmt(ys(it->second), "%.1f") << ' ';
            svg << "<polygon points=\"" << poly.str() << "\" fill=\"" << c
                << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
            std::ostringstream mins;
            for (const auto& [k, v] : s.minima) mins << fmt(xs(k), "%.1f") << ',' << fmt(ys(v), "%.1f") << ' ';
            svg << "<polyline points=\"" << mins.str() << "\" fill=\"none\" stroke=\"" << c
                << "\" stroke-dasharray=\"4 3\"/>\n";
        }
        std::ostringstream pts;
        for (const auto& [k, v] : s.points) pts << fmt(xs(k), "%.1f") << ',' << fmt(ys(v), "%.1f") << ' ';
        svg << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << c
            << "\" stroke-width=\"1.8\"/>\n";
        svg << "<rect x=\"" << R + 12 << "\" y=\"" << legend_y - 9 << "\" width=\"12\" height=\"12\" fill=\""
            << c << "\"/>\n";
        svg << "<text x=\"" << R + 30 << "\" y=\"" << legend_y + 2 << "\">" << key << "</text>\n";
        legend_y += 20;
        ++color;
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_outputs(const ExperimentReport& report, const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream out(cfg.out_dir + "/report.csv");
        out << report.to_csv(cfg.fixed_runtime);
    }
    if (cfg.svg) {
        for (const InstanceSource& src : cfg.instances) {
            int num_groups = 0;
            for (const ReportRow& r : report.rows)
                if (r.dataset == src.name && !r.failed)
                    num_groups = std::max(num_groups, static_cast<int>(r.group_costs.size()));
            const std::string chart = render_svg_chart(report, src.name, num_groups);
            if (chart.empty()) continue;
            std::ofstream out(cfg.out_dir + "/" + sanitize(src.name) + "_objective.svg");
            out << chart;
        }
    }
    if (cfg.trace) {
        for (const ReportRow& r : report.rows) {
            if (r.trace.empty()) continue;
            std::ofstream out(cfg.out_dir + "/trace_" + sanitize(r.dataset) + "_" +
                              sanitize(r.algorithm) + "_k" + std::to_string(r.k) + "_" +
                              sanitize(r.params) + ".jsonl");
            for (const RoundingTraceRow& t : r.trace) {
                out << "{\"iteration\":" << t.iteration << ",\"lp_objective\":" << fmt(t.lp_objective, "%.17g")
                    << ",\"num_representatives\":" << t.num_representatives
                    << ",\"num_nonrepresentatives\":" << t.num_nonrepresentatives
                    << ",\"shrunk_client\":" << t.shrunk_client
                    << ",\"support_size\":" << t.support_size << "}\n";
            }
        }
    }
}

}  // namespace fairclust
