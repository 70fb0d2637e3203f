#pragma once

#include "dacd/acquisition.hpp"
#include "dacd/active_loop.hpp"
#include "dacd/simulate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dacd {

struct EvalReport {
    int tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    double margin = 0.0;  // grid units
};

struct MatchCounts {
    int tp = 0, fp = 0, fn = 0;
};

/// Greedy nearest-first one-to-one matching: candidate pairs ordered by
/// distance, accepted while both endpoints are unmatched and the distance
/// is within the margin.
MatchCounts match_changepoints(const std::vector<double>& predicted,
                               const std::vector<double>& truth,
                               double margin);

/// Precision/recall/F1 from the greedy matching; all 0/0 cases yield 0.
EvalReport f1_score(const std::vector<double>& predicted,
                    const std::vector<double>& truth,
                    double margin);

struct BenchmarkConfig {
    std::vector<std::string> scenarios;   // builtin registry names
    std::vector<AcquisitionSpec> methods;

    std::optional<int> runs_override;
    std::optional<int> budget_override;

    /// Margin s in grid indices; default 5% of the grid length. Reported
    /// alongside every F1.
    std::optional<double> margin_indices;
    double margin_fraction = 0.05;

    std::uint64_t base_seed = 1;
    int workers = 0;  // 0 -> hardware concurrency

    int init_count = 8;
    bool boundary_init = true;
    int refit_every = 1;

    void validate() const;
};

struct RunRecord {
    std::string scenario;
    std::string method;
    int run = 0;
    std::uint64_t seed = 0;
    double f1 = 0.0;
    std::vector<double> predicted;  // grid indices
    std::vector<double> truth;      // grid indices
    bool failed = false;
    std::string error;
};

struct CellStats {
    double mean_f1 = 0.0;
    double stderr_f1 = 0.0;
    int runs_ok = 0;
    int runs_failed = 0;
};

struct BenchmarkResult {
    std::vector<std::string> scenario_names;
    std::vector<std::string> method_labels;
    std::vector<std::vector<CellStats>> cells;  // [method][scenario]
    std::vector<RunRecord> runs;                // ordered by (scenario, method, run)
    double margin_fraction = 0.0;
};

/// The full sweep: nine acquisition settings (EI xi in {.001, .01, .1},
/// PI xi in {.075, .5, 1}, UCB lambda in {2, 4, 8}) across all seven
/// scenarios, with per-scenario run counts and budgets.
BenchmarkConfig default_benchmark_config();

/// Monte-Carlo sweep: simulate -> run_dacd -> detect -> f1 per
/// (scenario, method, run), aggregated to mean F1 and standard error.
/// Runs execute on a worker pool; aggregation order is deterministic.
/// Per-run failures are recorded and excluded from the mean; more than 20%
/// failures abort the sweep.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

/// Methods x scenarios table as delimited text (mean or mean with stderr).
std::string format_table(const BenchmarkResult& result, bool with_stderr = false);

}  // namespace dacd
