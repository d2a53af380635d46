// Command-line harness: benchmark sweeps, the brute-force oracle, the
// acceptance battery, and synthetic fixture generation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fairclust/acceptance.hpp"
#include "fairclust/bench.hpp"
#include "fairclust/dataset.hpp"
#include "fairclust/instance.hpp"

int main(int argc, char** argv) {
    CLI::App app{"socially fair (l_p, k)-clustering solver and benchmark harness"};
    app.require_subcommand(1);

    // run
    std::string config_path, out_dir;
    int threads = 0;
    bool trace = false, fixed_runtime = false;
    auto* run_cmd = app.add_subcommand("run", "run an experiment config and write CSV/SVG reports");
    run_cmd->add_option("config", config_path, "experiment config JSON")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides the config)");
    run_cmd->add_option("--threads", threads, "worker threads (overrides the config)");
    run_cmd->add_flag("--trace", trace, "write per-iteration rounding traces (JSON lines)");
    run_cmd->add_flag("--fixed-runtime", fixed_runtime,
                      "write runtime_ms as 0 for byte-stable output");

    // oracle
    std::string instance_path;
    std::uint64_t oracle_cap = 2'000'000;
    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force optimum of an instance JSON");
    oracle_cmd->add_option("instance", instance_path, "instance JSON file")->required();
    oracle_cmd->add_option("--cap", oracle_cap, "max number of k-subsets to enumerate");

    // accept
    std::string accept_out = "accept_out";
    int accept_threads = 2;
    bool quiet = false;
    auto* accept_cmd = app.add_subcommand("accept", "run the acceptance suites");
    accept_cmd->add_option("--out", accept_out, "output directory for reports and artifacts");
    accept_cmd->add_option("--threads", accept_threads, "worker threads");
    accept_cmd->add_flag("--quiet", quiet, "suppress progress notes on stderr");

    // synth
    std::string synth_dir;
    auto* synth_cmd =
        app.add_subcommand("synth", "write the synthetic stand-in datasets and their specs");
    synth_cmd->add_option("dir", synth_dir, "output directory")->required();

    // dump
    std::string dump_spec, dump_out;
    auto* dump_cmd = app.add_subcommand("dump", "load a dataset spec and dump the instance JSON");
    dump_cmd->add_option("spec", dump_spec, "dataset spec JSON")->required();
    dump_cmd->add_option("--out", dump_out, "output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            fairclust::ExperimentConfig cfg = fairclust::ExperimentConfig::from_json_file(config_path);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (threads > 0) cfg.threads = threads;
            if (trace) cfg.trace = true;
            if (fixed_runtime) cfg.fixed_runtime = true;
            const fairclust::ExperimentReport report = fairclust::run(cfg);
            fairclust::write_outputs(report, cfg);
            int failed = 0;
            for (const auto& row : report.rows)
                if (row.failed) {
                    ++failed;
                    std::fprintf(stderr, "row failed: %s %s k=%d %s: %s\n", row.dataset.c_str(),
                                 row.algorithm.c_str(), row.k, row.params.c_str(), row.error.c_str());
                }
            std::printf("%zu rows (%d failed) -> %s/report.csv\n", report.rows.size(), failed,
                        cfg.out_dir.c_str());
            return failed == 0 ? 0 : 1;
        }
        if (*oracle_cmd) {
            const fairclust::Instance inst = fairclust::Instance::from_json_file(instance_path);
            const auto [centers, cost] = fairclust::brute_force_opt(inst, oracle_cap);
            std::printf("{\"centers\":[");
            for (std::size_t i = 0; i < centers.ids.size(); ++i)
                std::printf("%s%d", i ? "," : "", centers.ids[i]);
            std::printf("],\"group_costs\":[");
            for (std::size_t s = 0; s < cost.per_group.size(); ++s)
                std::printf("%s%.17g", s ? "," : "", cost.per_group[s]);
            std::printf("],\"objective\":%.17g}\n", cost.objective);
            return 0;
        }
        if (*accept_cmd) {
            fairclust::AcceptanceOptions opts;
            opts.out_dir = accept_out;
            opts.threads = accept_threads;
            opts.verbose = !quiet;
            const fairclust::AcceptanceReport report = fairclust::run_acceptance(opts);
            std::fputs(report.to_text().c_str(), stdout);
            return report.all_pass() ? 0 : 1;
        }
        if (*dump_cmd) {
            const fairclust::DatasetSpec spec = fairclust::DatasetSpec::from_json_file(dump_spec);
            const fairclust::Instance inst = fairclust::load(spec);
            const std::string text = inst.to_json_text();
            if (dump_out.empty()) {
                std::fputs(text.c_str(), stdout);
                std::fputc('\n', stdout);
            } else {
                std::ofstream out(dump_out);
                out << text;
            }
            return 0;
        }
        if (*synth_cmd) {
            std::filesystem::create_directories(synth_dir);
            const std::pair<fairclust::SyntheticKind, const char*> kinds[] = {
                {fairclust::SyntheticKind::Credit, "credit_500"},
                {fairclust::SyntheticKind::Compas, "compas_500"},
                {fairclust::SyntheticKind::Adult, "adult_500"},
            };
            for (const auto& [kind, stem] : kinds) {
                const std::string csv = synth_dir + "/" + stem + ".csv";
                const fairclust::DatasetSpec spec = fairclust::write_synthetic_dataset(kind, csv);
                std::ofstream out(synth_dir + "/" + stem + ".spec.json");
                out << spec.to_json_text();
                std::printf("wrote %s and %s.spec.json\n", csv.c_str(), stem);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
