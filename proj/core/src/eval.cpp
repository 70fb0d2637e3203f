#include "dacd/eval.hpp"

#include "dacd/detect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dacd {

namespace {

constexpr std::uint64_t kLoopStream = 0x5EED;

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

MatchCounts match_changepoints(const std::vector<double>& predicted,
                               const std::vector<double>& truth, double margin) {
    if (!(margin > 0.0)) {
        throw std::invalid_argument("match_changepoints: margin must be > 0");
    }
    struct Pair {
        double dist;
        std::size_t pred, truth;
    };
    std::vector<Pair> pairs;
    pairs.reserve(predicted.size() * truth.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        for (std::size_t j = 0; j < truth.size(); ++j) {
            pairs.push_back({std::abs(predicted[i] - truth[j]), i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.pred != b.pred) return a.pred < b.pred;
        return a.truth < b.truth;
    });

    std::vector<bool> pred_used(predicted.size(), false);
    std::vector<bool> truth_used(truth.size(), false);
    MatchCounts counts;
    for (const auto& p : pairs) {
        if (p.dist > margin) break;
        if (pred_used[p.pred] || truth_used[p.truth]) continue;
        pred_used[p.pred] = true;
        truth_used[p.truth] = true;
        ++counts.tp;
    }
    counts.fp = static_cast<int>(predicted.size()) - counts.tp;
    counts.fn = static_cast<int>(truth.size()) - counts.tp;
    return counts;
}

EvalReport f1_score(const std::vector<double>& predicted, const std::vector<double>& truth,
                    double margin) {
    const MatchCounts counts = match_changepoints(predicted, truth, margin);
    EvalReport report;
    report.tp = counts.tp;
    report.fp = counts.fp;
    report.fn = counts.fn;
    report.margin = margin;
    report.precision = safe_ratio(counts.tp, counts.tp + counts.fp);
    report.recall = safe_ratio(counts.tp, counts.tp + counts.fn);
    report.f1 = safe_ratio(2.0 * report.precision * report.recall,
                           report.precision + report.recall);
    return report;
}

void BenchmarkConfig::validate() const {
    if (scenarios.empty()) throw std::invalid_argument("BenchmarkConfig: no scenarios");
    if (methods.empty()) throw std::invalid_argument("BenchmarkConfig: no methods");
    if (runs_override && *runs_override < 1) {
        throw std::invalid_argument("BenchmarkConfig: runs must be >= 1");
    }
    const auto& registry = builtin_scenarios();
    for (const auto& name : scenarios) {
        if (registry.find(name) == registry.end()) {
            throw std::invalid_argument("BenchmarkConfig: unknown scenario '" + name + "'");
        }
    }
    for (const auto& m : methods) m.validate();
}

BenchmarkConfig default_benchmark_config() {
    BenchmarkConfig config;
    config.scenarios = {"mjd_t_no", "mjd_t_up", "mjd_t_inv", "mjd_t_down",
                        "mjd_p_no", "mjd_p_up", "mcp"};
    for (const char* m : {"ei:0.001", "ei:0.01", "ei:0.1", "pi:0.075", "pi:0.5", "pi:1",
                          "ucb:2", "ucb:4", "ucb:8"}) {
        config.methods.push_back(parse_acquisition(m));
    }
    return config;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
    config.validate();
    const auto& registry = builtin_scenarios();

    struct Task {
        std::size_t scenario_idx, method_idx;
        int run;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        const auto& defaults = registry.at(config.scenarios[s]);
        const int runs = config.runs_override.value_or(defaults.runs);
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            for (int r = 0; r < runs; ++r) tasks.push_back({s, m, r});
        }
    }

    std::vector<RunRecord> records(tasks.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t t = cursor.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            const auto& defaults = registry.at(config.scenarios[task.scenario_idx]);

            RunRecord rec;
            rec.scenario = config.scenarios[task.scenario_idx];
            rec.method = config.methods[task.method_idx].str();
            rec.run = task.run;
            rec.seed = config.base_seed + static_cast<std::uint64_t>(task.run);
            try {
                ScenarioSpec spec = defaults.spec;
                spec.seed = rec.seed;
                const SimulatedSeries series = simulate(spec);
                const Eigen::Index n = series.values.size();

                LoopConfig loop;
                loop.budget = config.budget_override.value_or(defaults.budget);
                loop.init_count = config.init_count;
                loop.boundary_init = config.boundary_init;
                loop.refit_every = config.refit_every;
                loop.acquisition = config.methods[task.method_idx];
                // One loop seed per run, shared by every method: paired design.
                loop.seed = mix_seed(rec.seed, kLoopStream);

                const Mat grid = as_column(series.grid);
                const Oracle oracle = [&series](std::size_t i) {
                    return series.values[static_cast<Eigen::Index>(i)];
                };
                const LoopResult result = run_dacd(oracle, grid, loop);

                const DetectionResult detection = detect_changepoints(
                    result.final_slice.mean, series.grid, defaults.window,
                    defaults.changepoints);

                for (const std::size_t idx : detection.indices) {
                    rec.predicted.push_back(static_cast<double>(idx));
                }
                for (const double tau : series.true_changepoints) {
                    rec.truth.push_back(tau / spec.dt - 1.0);  // grid t_j = (j+1) dt
                }
                const double margin = config.margin_indices.value_or(
                    config.margin_fraction * static_cast<double>(n));
                rec.f1 = f1_score(rec.predicted, rec.truth, margin).f1;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
            }
            records[t] = std::move(rec);
        }
    };

    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t n_workers =
        std::min<std::size_t>(tasks.size(),
                              config.workers > 0 ? static_cast<std::size_t>(config.workers)
                                                 : std::max(1u, hw));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    BenchmarkResult result;
    result.scenario_names = config.scenarios;
    result.margin_fraction = config.margin_fraction;
    for (const auto& m : config.methods) result.method_labels.push_back(m.str());
    result.runs = std::move(records);

    result.cells.assign(config.methods.size(),
                        std::vector<CellStats>(config.scenarios.size()));
    std::size_t failed_total = 0;
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            std::vector<double> scores;
            int failed = 0;
            for (const auto& rec : result.runs) {
                if (rec.scenario != config.scenarios[s] ||
                    rec.method != result.method_labels[m]) {
                    continue;
                }
                if (rec.failed) {
                    ++failed;
                } else {
                    scores.push_back(rec.f1);
                }
            }
            CellStats& cell = result.cells[m][s];
            cell.runs_ok = static_cast<int>(scores.size());
            cell.runs_failed = failed;
            failed_total += static_cast<std::size_t>(failed);
            if (!scores.empty()) {
                double mean = 0.0;
                for (const double v : scores) mean += v;
                mean /= static_cast<double>(scores.size());
                cell.mean_f1 = mean;
                if (scores.size() > 1) {
                    double ss = 0.0;
                    for (const double v : scores) ss += (v - mean) * (v - mean);
                    cell.stderr_f1 = std::sqrt(ss / static_cast<double>(scores.size() - 1)) /
                                     std::sqrt(static_cast<double>(scores.size()));
                }
            }
        }
    }
    if (failed_total * 5 > result.runs.size()) {
        throw std::runtime_error("run_benchmark: more than 20% of runs failed (" +
                                 std::to_string(failed_total) + " of " +
                                 std::to_string(result.runs.size()) + ")");
    }
    return result;
}

std::string format_table(const BenchmarkResult& result, bool with_stderr) {
    std::ostringstream out;
    out << "method";
    for (const auto& s : result.scenario_names) out << '\t' << s;
    out << '\n';
    for (std::size_t m = 0; m < result.method_labels.size(); ++m) {
        out << result.method_labels[m];
        for (std::size_t s = 0; s < result.scenario_names.size(); ++s) {
            const CellStats& cell = result.cells[m][s];
            out << '\t' << fmt6(cell.mean_f1);
            if (with_stderr) out << "±" << fmt6(cell.stderr_f1);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace dacd
