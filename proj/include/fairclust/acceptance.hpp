#ifndef FAIRCLUST_ACCEPTANCE_HPP
#define FAIRCLUST_ACCEPTANCE_HPP

#include <string>
#include <vector>

namespace fairclust {

struct AcceptanceOptions {
    std::string out_dir = "accept_out";
    int threads = 2;
    bool verbose = true;  // progress notes on stderr
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;

    bool all_pass() const;
    std::string to_text() const;  // one PASS/FAIL line per criterion
};

/// Runs the full verification battery: approximation-guarantee checks against
/// brute-force oracles at micro scale, LP vertex-support checks, the
/// sparsify/convert pipeline bound, benchmark trend and center-count
/// reproduction, and an end-to-end determinism re-run. Artifacts (report,
/// benchmark CSVs, charts) land in out_dir.
AcceptanceReport run_acceptance(const AcceptanceOptions& opts);

}  // namespace fairclust

#endif  // FAIRCLUST_ACCEPTANCE_HPP
