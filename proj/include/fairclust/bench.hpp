#ifndef FAIRCLUST_BENCH_HPP
#define FAIRCLUST_BENCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairclust/dataset.hpp"
#include "fairclust/instance.hpp"
#include "fairclust/rounding.hpp"

namespace fairclust {

struct InstanceSource {
    std::string name;
    std::optional<DatasetSpec> dataset;  // either a dataset spec...
    std::string instance_path;           // ...or an instance JSON file
};

struct ExperimentConfig {
    std::vector<InstanceSource> instances;
    /// Any of: iterative_rounding, abv, best_k_subset_pipeline, sparse_pipeline,
    /// brute_force.
    std::vector<std::string> algorithms;
    std::vector<int> k_list;
    std::vector<double> lambda_list{0.3};
    std::vector<double> epsilon_list{0.5};
    int sparsify_t = 1;
    double delta = 0.05;
    double epsilon_prime = 0.9;
    std::uint64_t sparsify_cap = 200;
    std::uint64_t brute_force_cap = 2'000'000;
    std::string out_dir = "bench_out";
    int threads = 1;
    bool trace = false;
    bool fixed_runtime = false;  // write runtime_ms as 0 for byte-stable output
    bool svg = true;

    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);
};

struct ReportRow {
    std::string dataset;
    std::string algorithm;
    int k = 0;
    std::string params;
    std::vector<double> group_costs;
    double objective = 0.0;
    int num_centers = 0;
    double runtime_ms = 0.0;
    bool failed = false;
    std::string error;
    std::vector<PointId> centers;             // not serialized
    std::vector<RoundingTraceRow> trace;      // populated when tracing
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    bool any_failed() const;
    /// Exact schema: dataset,algorithm,k,params,group_costs,objective,num_centers,runtime_ms
    std::string to_csv(bool fixed_runtime = false) const;
};

ExperimentReport run(const ExperimentConfig& config);

/// CSV, SVG charts, and trace files under config.out_dir.
void write_outputs(const ExperimentReport& report, const ExperimentConfig& config);

/// Polyline chart of objective vs k per (algorithm, params) series; datasets
/// with more than two groups additionally get per-group max/min bands.
std::string render_svg_chart(const ExperimentReport& report, const std::string& dataset,
                             int num_groups);

}  // namespace fairclust

#endif  // FAIRCLUST_BENCH_HPP
