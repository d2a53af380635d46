// Acceptance suite driver: one PASS/FAIL line per criterion, exit code 0 only
// when every criterion holds.

#include <cstdio>
#include <cstring>

#include "fairclust/acceptance.hpp"

int main(int argc, char** argv) {
    fairclust::AcceptanceOptions opts;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
            opts.out_dir = argv[++i];
        } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
            opts.threads = std::atoi(argv[++i]);
        } else if (std::strcmp(argv[i], "--quiet") == 0) {
            opts.verbose = false;
        } else {
            std::fprintf(stderr, "usage: %s [--out DIR] [--threads N] [--quiet]\n", argv[0]);
            return 2;
        }
    }
    const fairclust::AcceptanceReport report = fairclust::run_acceptance(opts);
    std::fputs(report.to_text().c_str(), stdout);
    return report.all_pass() ? 0 : 1;
}
