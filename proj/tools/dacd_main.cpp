// dacd: active-learning change-point detection on expensive-to-sample
// series. Subcommands: simulate, run, bench, export-plots.

#include <CLI11.hpp>
#include <json.hpp>

#include "dacd/active_loop.hpp"
#include "dacd/detect.hpp"
#include "dacd/eval.hpp"
#include "dacd/io.hpp"
#include "dacd/simulate.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path output_root() {
    if (const char* env = std::getenv("DACD_OUTPUT_ROOT")) return fs::path(env);
    return fs::path("dacd-out");
}

fs::path resolve_out(const std::string& out_flag, const std::string& default_leaf) {
    return out_flag.empty() ? output_root() / default_leaf : fs::path(out_flag);
}

void write_file(const fs::path& dir, const std::string& name, const std::string& content,
                bool force) {
    fs::create_directories(dir);
    dacd::write_text_file(dir / name, content, force);
}

const dacd::ScenarioDefaults& lookup_scenario(const std::string& name) {
    const auto& registry = dacd::builtin_scenarios();
    const auto it = registry.find(name);
    if (it == registry.end()) {
        std::string known;
        for (const auto& [key, value] : registry) {
            (void)value;
            known += known.empty() ? key : ", " + key;
        }
        throw std::runtime_error("unknown scenario '" + name + "' (known: " + known +
                                 ", test2d)");
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& scenario, std::uint64_t seed, const std::string& out_flag,
                 bool force) {
    const auto& defaults = lookup_scenario(scenario);
    dacd::ScenarioSpec spec = defaults.spec;
    spec.seed = seed;
    const dacd::SimulatedSeries series = dacd::simulate(spec);

    const fs::path out = resolve_out(out_flag, "simulate-" + scenario + "-seed" +
                                                   std::to_string(seed));
    std::ostringstream series_tsv;
    dacd::write_series_tsv(series_tsv, series);
    write_file(out, "series.tsv", series_tsv.str(), force);

    std::ostringstream cps;
    cps << "# tau\n";
    for (const double tau : series.true_changepoints) cps << dacd::fmt6(tau) << '\n';
    write_file(out, "changepoints.tsv", cps.str(), force);

    write_file(out, "scenario.json", dacd::to_json(spec).dump(2) + "\n", force);

    std::cout << "wrote " << (out / "series.tsv").string() << " (" << series.values.size()
              << " points, " << series.true_changepoints.size() << " change points)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunInputs {
    dacd::Mat grid;          // GP input space
    dacd::Vec locations;     // labels for reporting (time or sample index)
    dacd::Oracle oracle;
    int budget = 20;
    int init_count = 8;
    bool boundary_init = true;
    std::size_t window = 100;
    std::size_t k = 1;
    json provenance;
};

int cmd_run(const std::string& scenario, const std::string& data_file, const std::string& acq,
            std::optional<int> budget, std::optional<int> k_flag, std::size_t window,
            std::size_t knn, int refit_every, std::uint64_t seed, const std::string& out_flag,
            bool force) {
    const dacd::AcquisitionSpec acquisition = dacd::parse_acquisition(acq);

    RunInputs in;
    std::string label;
    bool two_d = false;
    std::shared_ptr<dacd::SimulatedSeries> series;  // keep the oracle's data alive

    if (!data_file.empty()) {
        const dacd::SampleSet measurements = dacd::load_welllog(data_file);
        const Eigen::Index n = measurements.size();
        // GP inputs rescaled to [0, 1]; reported locations stay in sample
        // indices.
        in.grid = dacd::Mat(n, 1);
        in.grid.col(0) =
            dacd::Vec::LinSpaced(n, 0.0, 1.0);
        in.locations = measurements.inputs().col(0);
        const dacd::Vec values = measurements.targets();
        in.oracle = [values](std::size_t i) { return values[static_cast<Eigen::Index>(i)]; };
        in.budget = budget.value_or(100);
        in.window = window;
        in.k = static_cast<std::size_t>(k_flag.value_or(8));
        in.provenance = {{"data", data_file}};
        label = fs::path(data_file).stem().string();
    } else if (scenario == "test2d") {
        two_d = true;
        in.grid = dacd::make_grid_2d();
        in.oracle = dacd::make_test2d_oracle(in.grid, 0.1, seed);
        in.budget = budget.value_or(200);
        in.init_count = 100;
        in.boundary_init = false;
        in.k = static_cast<std::size_t>(k_flag.value_or(5));
        in.provenance = {{"scenario", "test2d"}, {"noise_variance", 0.1}};
        label = "test2d";
    } else {
        const auto& defaults = lookup_scenario(scenario);
        dacd::ScenarioSpec spec = defaults.spec;
        spec.seed = seed;
        series = std::make_shared<dacd::SimulatedSeries>(dacd::simulate(spec));
        in.grid = dacd::as_column(series->grid);
        in.locations = series->grid;
        in.oracle = [series](std::size_t i) {
            return series->values[static_cast<Eigen::Index>(i)];
        };
        in.budget = budget.value_or(defaults.budget);
        in.window = window == 0 ? defaults.window : window;
        in.k = static_cast<std::size_t>(k_flag.value_or(static_cast<int>(defaults.changepoints)));
        in.provenance = {{"scenario", dacd::to_json(spec)}};
        label = scenario;
    }
    if (in.window == 0) in.window = 100;

    dacd::LoopConfig loop;
    loop.budget = in.budget;
    loop.init_count = in.init_count;
    loop.boundary_init = in.boundary_init;
    loop.acquisition = acquisition;
    loop.refit_every = refit_every;
    loop.seed = seed;

    const dacd::LoopResult result = dacd::run_dacd(in.oracle, in.grid, loop);

    json detection_json;
    std::string summary;
    if (two_d) {
        const auto points = dacd::knn_slope_2d(result.samples, knn, in.k);
        json pts = json::array(), slopes = json::array();
        for (const auto& p : points) {
            pts.push_back({p.point[0], p.point[1]});
            slopes.push_back(p.slope);
        }
        detection_json = {{"kind", "knn_slope_2d"},
                          {"k_neighbors", knn},
                          {"points", std::move(pts)},
                          {"slopes", std::move(slopes)}};
        summary = std::to_string(points.size()) + " slope maxima";
    } else {
        const dacd::DetectionResult detection = dacd::detect_changepoints(
            result.final_slice.mean, in.locations, in.window, in.k);
        detection_json = dacd::to_json(detection);
        detection_json["kind"] = "filtered_derivative";
        std::ostringstream ss;
        for (const double loc : detection.locations) ss << ' ' << dacd::fmt6(loc);
        summary = "change points at" + ss.str();
    }

    const fs::path out = resolve_out(out_flag, "run-" + label + "-seed" + std::to_string(seed));

    json manifest = {{"subcommand", "run"},
                     {"acquisition", acquisition.str()},
                     {"budget", in.budget},
                     {"init_count", in.init_count},
                     {"boundary_init", in.boundary_init},
                     {"refit_every", refit_every},
                     {"window", in.window},
                     {"k", in.k},
                     {"seed", seed},
                     {"output_dir", out.string()},
                     {"source", in.provenance}};
    write_file(out, "manifest.json", manifest.dump(2) + "\n", force);

    std::ostringstream trace;
    dacd::write_trace_jsonl(trace, result.trace);
    write_file(out, "trace.jsonl", trace.str(), force);

    write_file(out, "posterior.json", dacd::to_json(result.final_slice).dump() + "\n", force);
    write_file(out, "detection.json", detection_json.dump(2) + "\n", force);

    std::ostringstream samples;
    dacd::write_samples_tsv(samples, result.samples);
    write_file(out, "samples.tsv", samples.str(), force);

    std::cout << "run complete: " << summary << "\n"
              << "artifacts in " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const std::string& config_path, std::optional<int> runs,
              std::optional<int> budget, std::optional<std::uint64_t> seed, int workers,
              const std::string& out_flag, bool force) {
    dacd::BenchmarkConfig config;
    if (config_path.empty()) {
        config = dacd::default_benchmark_config();
    } else {
        config = dacd::benchmark_config_from_json(json::parse(dacd::read_text_file(config_path)));
    }
    if (runs) config.runs_override = *runs;
    if (budget) config.budget_override = *budget;
    if (seed) config.base_seed = *seed;
    if (workers > 0) config.workers = workers;

    const dacd::BenchmarkResult result = dacd::run_benchmark(config);

    const fs::path out = resolve_out(out_flag, "bench-seed" + std::to_string(config.base_seed));
    write_file(out, "config.json", dacd::to_json(config).dump(2) + "\n", force);
    write_file(out, "bench_table.tsv", dacd::format_table(result, false), force);
    write_file(out, "bench_table_stderr.tsv", dacd::format_table(result, true), force);
    write_file(out, "bench_table.json", dacd::to_json(result).dump(2) + "\n", force);

    std::ostringstream runs_log;
    for (const auto& rec : result.runs) {
        json j = {{"scenario", rec.scenario}, {"method", rec.method},  {"run", rec.run},
                  {"seed", rec.seed},         {"f1", rec.f1},          {"failed", rec.failed},
                  {"predicted", rec.predicted}, {"truth", rec.truth}};
        if (rec.failed) j["error"] = rec.error;
        runs_log << j.dump() << '\n';
    }
    write_file(out, "runs.jsonl", runs_log.str(), force);

    std::cout << dacd::format_table(result, false) << "artifacts in " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// export-plots

int cmd_export_plots(const std::string& run_dir, const std::string& out_flag, bool force) {
    const fs::path dir(run_dir);
    const fs::path posterior_path = dir / "posterior.json";
    if (!fs::exists(posterior_path)) {
        throw std::runtime_error("missing artifact: " + posterior_path.string() +
                                 " (is this a completed run directory?)");
    }
    const dacd::PosteriorSlice slice =
        dacd::slice_from_json(json::parse(dacd::read_text_file(posterior_path)));

    const fs::path out = out_flag.empty() ? dir : fs::path(out_flag);
    fs::create_directories(out);

    if (slice.dim() == 1) {
        std::ostringstream posterior;
        posterior << "# x\tmean\tlower95\tupper95\tdmean\tdvar\n";
        for (Eigen::Index i = 0; i < slice.size(); ++i) {
            const double band = 1.96 * std::sqrt(slice.var[i]);
            posterior << dacd::fmt6(slice.grid(i, 0)) << '\t' << dacd::fmt6(slice.mean[i])
                      << '\t' << dacd::fmt6(slice.mean[i] - band) << '\t'
                      << dacd::fmt6(slice.mean[i] + band) << '\t' << dacd::fmt6(slice.dmean(i, 0))
                      << '\t' << dacd::fmt6(slice.dvar(i, 0)) << '\n';
        }
        dacd::write_text_file(out / "plot_posterior.tsv", posterior.str(), force);
    } else {
        std::ostringstream mean_grid, dnorm_grid;
        mean_grid << "# x1\tx2\tmean\n";
        dnorm_grid << "# x1\tx2\tdmean_norm\n";
        for (Eigen::Index i = 0; i < slice.size(); ++i) {
            const double dnorm = slice.dmean.row(i).norm();
            mean_grid << dacd::fmt6(slice.grid(i, 0)) << '\t' << dacd::fmt6(slice.grid(i, 1))
                      << '\t' << dacd::fmt6(slice.mean[i]) << '\n';
            dnorm_grid << dacd::fmt6(slice.grid(i, 0)) << '\t' << dacd::fmt6(slice.grid(i, 1))
                       << '\t' << dacd::fmt6(dnorm) << '\n';
        }
        dacd::write_text_file(out / "plot_mean_grid.tsv", mean_grid.str(), force);
        dacd::write_text_file(out / "plot_dnorm_grid.tsv", dnorm_grid.str(), force);
    }

    if (fs::exists(dir / "samples.tsv")) {
        dacd::write_text_file(out / "plot_samples.tsv",
                              dacd::read_text_file(dir / "samples.tsv"), force);
    }

    const fs::path detection_path = dir / "detection.json";
    if (fs::exists(detection_path)) {
        const json det = json::parse(dacd::read_text_file(detection_path));
        std::ostringstream cps;
        if (det.value("kind", std::string{}) == "knn_slope_2d") {
            cps << "# x1\tx2\tslope\n";
            const auto& pts = det.at("points");
            const auto& slopes = det.at("slopes");
            for (std::size_t i = 0; i < pts.size(); ++i) {
                cps << dacd::fmt6(pts[i][0].get<double>()) << '\t'
                    << dacd::fmt6(pts[i][1].get<double>()) << '\t'
                    << dacd::fmt6(slopes[i].get<double>()) << '\n';
            }
        } else {
            const dacd::DetectionResult detection = dacd::detection_from_json(det);
            cps << "# location\n";
            for (const double loc : detection.locations) cps << dacd::fmt6(loc) << '\n';
            std::ostringstream dtrace;
            dtrace << "# k\tD\n";
            for (std::size_t i = 0; i < detection.trace.values.size(); ++i) {
                dtrace << detection.trace.first_k + i << '\t'
                       << dacd::fmt6(detection.trace.values[i]) << '\n';
            }
            dacd::write_text_file(out / "plot_dtrace.tsv", dtrace.str(), force);
        }
        dacd::write_text_file(out / "plot_changepoints.tsv", cps.str(), force);
    }

    std::cout << "plot data in " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Derivative-aware active-learning change-point detection"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a jump-diffusion scenario realization");
    std::string sim_scenario;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    bool sim_force = false;
    sim->add_option("--scenario", sim_scenario, "Scenario name")->required();
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--out", sim_out, "Output directory");
    sim->add_flag("--force", sim_force, "Overwrite existing files");

    // run
    auto* run = app.add_subcommand("run", "One active-learning detection experiment");
    std::string run_scenario, run_data, run_acq = "ei:0.001", run_out;
    std::optional<int> run_budget, run_k;
    std::size_t run_window = 0, run_knn = 10;
    int run_refit = 1;
    std::uint64_t run_seed = 1;
    bool run_force = false;
    run->add_option("--scenario", run_scenario, "Scenario name (or test2d)");
    run->add_option("--data", run_data, "Measurement file (e.g. well-log)");
    run->add_option("--acq", run_acq, "Acquisition spec kind:param[:signed], e.g. pi:0.075");
    run->add_option("--budget", run_budget, "Query budget B");
    run->add_option("--k", run_k, "Number of change points to report");
    run->add_option("--window", run_window, "Filtered-derivative window A");
    run->add_option("--knn", run_knn, "Neighbors for 2-D slope fits");
    run->add_option("--refit-every", run_refit, "Refit hyperparameters every r iterations");
    run->add_option("--seed", run_seed, "RNG seed");
    run->add_option("--out", run_out, "Output directory");
    run->add_flag("--force", run_force, "Overwrite existing files");

    // bench
    auto* bench = app.add_subcommand("bench", "Monte-Carlo F1 benchmark sweep");
    std::string bench_config, bench_out;
    std::optional<int> bench_runs, bench_budget;
    std::optional<std::uint64_t> bench_seed;
    int bench_workers = 0;
    bool bench_force = false;
    bench->add_option("--config", bench_config, "Benchmark config JSON");
    bench->add_option("--runs", bench_runs, "Override runs per scenario");
    bench->add_option("--budget", bench_budget, "Override loop budget");
    bench->add_option("--seed", bench_seed, "Base seed");
    bench->add_option("--workers", bench_workers, "Worker threads (default: logical cores)");
    bench->add_option("--out", bench_out, "Output directory");
    bench->add_flag("--force", bench_force, "Overwrite existing files");

    // export-plots
    auto* plots = app.add_subcommand("export-plots", "Plot-ready text files from a run directory");
    std::string plots_dir, plots_out;
    bool plots_force = false;
    plots->add_option("--run-dir", plots_dir, "Completed run directory")->required();
    plots->add_option("--out", plots_out, "Output directory (default: run dir)");
    plots->add_flag("--force", plots_force, "Overwrite existing files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_scenario, sim_seed, sim_out, sim_force);
        if (run->parsed()) {
            if (run_scenario.empty() == run_data.empty()) {
                throw std::runtime_error("run: need exactly one of --scenario or --data");
            }
            return cmd_run(run_scenario, run_data, run_acq, run_budget, run_k, run_window,
                           run_knn, run_refit, run_seed, run_out, run_force);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_config, bench_runs, bench_budget, bench_seed, bench_workers,
                             bench_out, bench_force);
        }
        if (plots->parsed()) return cmd_export_plots(plots_dir, plots_out, plots_force);
    } catch (const std::exception& e) {
        std::cerr << "dacd: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
