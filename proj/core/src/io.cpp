#include "dacd/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace dacd {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vec vec_from_json(const json& arr) {
    Vec v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index i = 0;
    for (const auto& x : arr) v[i++] = x.get<double>();
    return v;
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) return Mat(0, 0);
    const auto d = static_cast<Eigen::Index>(rows.front().size());
    Mat m(n, d);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (const auto& x : row) m(i, j++) = x.get<double>();
        ++i;
    }
    return m;
}

}  // namespace

json to_json(const KernelParams& p) {
    return {{"output_scale", p.output_scale},
            {"lengthscale", p.lengthscale},
            {"noise_std", p.noise_std}};
}

KernelParams kernel_params_from_json(const json& j) {
    KernelParams p;
    p.output_scale = j.at("output_scale").get<double>();
    p.lengthscale = j.at("lengthscale").get<double>();
    p.noise_std = j.at("noise_std").get<double>();
    p.validate();
    return p;
}

json to_json(const PosteriorSlice& slice) {
    return {{"grid", mat_to_json(slice.grid)},
            {"mean", vec_to_json(slice.mean)},
            {"var", vec_to_json(slice.var)},
            {"dmean", mat_to_json(slice.dmean)},
            {"dvar", mat_to_json(slice.dvar)}};
}

PosteriorSlice slice_from_json(const json& j) {
    PosteriorSlice slice;
    slice.grid = mat_from_json(j.at("grid"));
    slice.mean = vec_from_json(j.at("mean"));
    slice.var = vec_from_json(j.at("var"));
    slice.dmean = mat_from_json(j.at("dmean"));
    slice.dvar = mat_from_json(j.at("dvar"));
    return slice;
}

json to_json(const DetectionResult& result) {
    return {{"window", result.window},
            {"indices", result.indices},
            {"locations", result.locations},
            {"trace", {{"first_k", result.trace.first_k}, {"values", result.trace.values}}}};
}

DetectionResult detection_from_json(const json& j) {
    DetectionResult result;
    result.window = j.at("window").get<std::size_t>();
    result.indices = j.at("indices").get<std::vector<std::size_t>>();
    result.locations = j.at("locations").get<std::vector<double>>();
    result.trace.first_k = j.at("trace").at("first_k").get<std::size_t>();
    result.trace.values = j.at("trace").at("values").get<std::vector<double>>();
    result.trace.window = result.window;
    return result;
}

json to_json(const ScenarioSpec& spec) {
    json j = {{"name", spec.name},
              {"kind", spec.kind == SdeKind::LinearExact ? "linear_exact" : "nonlinear_euler"},
              {"mu_pre", spec.mu_pre},
              {"mu_post", spec.mu_post},
              {"sigma", spec.sigma},
              {"jump_intensity", spec.jump_intensity},
              {"jump_mean", spec.jump_mean},
              {"jump_std", spec.jump_std},
              {"s0", spec.s0},
              {"horizon", spec.horizon},
              {"dt", spec.dt},
              {"seed", spec.seed}};
    if (spec.kind == SdeKind::NonlinearEuler) {
        j["nonlinear"] = {{"logistic", spec.nonlinear.logistic},
                          {"time_slope", spec.nonlinear.time_slope},
                          {"sqrt_diffusion", spec.nonlinear.sqrt_diffusion},
                          {"jump_height", spec.nonlinear.jump_height}};
    }
    if (spec.required_jumps) j["required_jumps"] = *spec.required_jumps;
    if (!spec.forced_jumps.empty()) {
        json jumps = json::array();
        for (const auto& [t, y] : spec.forced_jumps) jumps.push_back({t, y});
        j["forced_jumps"] = std::move(jumps);
    }
    return j;
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec spec;
    spec.name = j.value("name", std::string{});
    const std::string kind = j.value("kind", std::string{"linear_exact"});
    if (kind == "linear_exact") {
        spec.kind = SdeKind::LinearExact;
    } else if (kind == "nonlinear_euler") {
        spec.kind = SdeKind::NonlinearEuler;
    } else {
        throw std::invalid_argument("scenario_from_json: unknown kind '" + kind + "'");
    }
    spec.mu_pre = j.value("mu_pre", 0.0);
    spec.mu_post = j.value("mu_post", spec.mu_pre);
    spec.sigma = j.value("sigma", 0.0);
    spec.jump_intensity = j.value("jump_intensity", 0.0);
    spec.jump_mean = j.value("jump_mean", 0.0);
    spec.jump_std = j.value("jump_std", 0.0);
    spec.s0 = j.value("s0", 1.0);
    spec.horizon = j.value("horizon", 10.0);
    spec.dt = j.value("dt", 1e-2);
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("nonlinear")) {
        const auto& c = j.at("nonlinear");
        spec.nonlinear.logistic = c.value("logistic", 0.0);
        spec.nonlinear.time_slope = c.value("time_slope", 0.0);
        spec.nonlinear.sqrt_diffusion = c.value("sqrt_diffusion", 0.0);
        spec.nonlinear.jump_height = c.value("jump_height", 0.0);
    }
    if (j.contains("required_jumps") && !j.at("required_jumps").is_null()) {
        spec.required_jumps = j.at("required_jumps").get<int>();
    }
    if (j.contains("forced_jumps")) {
        for (const auto& pair : j.at("forced_jumps")) {
            spec.forced_jumps.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
    }
    spec.validate();
    return spec;
}

void write_trace_jsonl(std::ostream& out, const LoopTrace& trace) {
    int i = 0;
    for (const auto& rec : trace.iterations) {
        json j = {{"iteration", i++},
                  {"chosen_index", rec.chosen_index},
                  {"response", rec.response},
                  {"params", to_json(rec.params)},
                  {"refit", rec.refit},
                  {"fit_failed", rec.fit_failed}};
        if (rec.slice) j["slice"] = to_json(*rec.slice);
        out << j.dump() << '\n';
    }
}

LoopTrace read_trace_jsonl(std::istream& in) {
    LoopTrace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        IterationRecord rec;
        rec.chosen_index = j.at("chosen_index").get<std::size_t>();
        rec.response = j.at("response").get<double>();
        rec.params = kernel_params_from_json(j.at("params"));
        rec.refit = j.value("refit", false);
        rec.fit_failed = j.value("fit_failed", false);
        if (j.contains("slice")) rec.slice = slice_from_json(j.at("slice"));
        trace.iterations.push_back(std::move(rec));
    }
    return trace;
}

void write_series_tsv(std::ostream& out, const SimulatedSeries& series) {
    out << "# t\tvalue\n";
    for (Eigen::Index i = 0; i < series.grid.size(); ++i) {
        out << fmt6(series.grid[i]) << '\t' << fmt6(series.values[i]) << '\n';
    }
}

void write_samples_tsv(std::ostream& out, const SampleSet& samples) {
    out << "#";
    for (Eigen::Index d = 0; d < samples.dim(); ++d) out << " x" << d + 1 << '\t';
    out << "y\n";
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        for (Eigen::Index d = 0; d < samples.dim(); ++d) {
            out << fmt6(samples.inputs()(i, d)) << '\t';
        }
        out << fmt6(samples.targets()[i]) << '\n';
    }
}

BenchmarkConfig benchmark_config_from_json(const json& j) {
    BenchmarkConfig config = default_benchmark_config();
    if (j.contains("scenarios")) {
        config.scenarios = j.at("scenarios").get<std::vector<std::string>>();
    }
    if (j.contains("methods")) {
        config.methods.clear();
        for (const auto& m : j.at("methods")) {
            config.methods.push_back(parse_acquisition(m.get<std::string>()));
        }
    }
    if (j.contains("runs")) config.runs_override = j.at("runs").get<int>();
    if (j.contains("budget")) config.budget_override = j.at("budget").get<int>();
    if (j.contains("margin_indices")) {
        config.margin_indices = j.at("margin_indices").get<double>();
    }
    config.margin_fraction = j.value("margin_fraction", config.margin_fraction);
    config.base_seed = j.value("base_seed", config.base_seed);
    config.workers = j.value("workers", config.workers);
    config.init_count = j.value("init_count", config.init_count);
    config.boundary_init = j.value("boundary_init", config.boundary_init);
    config.refit_every = j.value("refit_every", config.refit_every);
    config.validate();
    return config;
}

json to_json(const BenchmarkConfig& config) {
    json methods = json::array();
    for (const auto& m : config.methods) methods.push_back(m.str());
    json j = {{"scenarios", config.scenarios},
              {"methods", std::move(methods)},
              {"margin_fraction", config.margin_fraction},
              {"base_seed", config.base_seed},
              {"workers", config.workers},
              {"init_count", config.init_count},
              {"boundary_init", config.boundary_init},
              {"refit_every", config.refit_every}};
    if (config.runs_override) j["runs"] = *config.runs_override;
    if (config.budget_override) j["budget"] = *config.budget_override;
    if (config.margin_indices) j["margin_indices"] = *config.margin_indices;
    return j;
}

json to_json(const BenchmarkResult& result) {
    json cells = json::array();
    for (std::size_t m = 0; m < result.method_labels.size(); ++m) {
        json row = json::array();
        for (std::size_t s = 0; s < result.scenario_names.size(); ++s) {
            const CellStats& c = result.cells[m][s];
            row.push_back({{"mean_f1", c.mean_f1},
                           {"stderr_f1", c.stderr_f1},
                           {"runs_ok", c.runs_ok},
                           {"runs_failed", c.runs_failed}});
        }
        cells.push_back(std::move(row));
    }
    return {{"scenarios", result.scenario_names},
            {"methods", result.method_labels},
            {"margin_fraction", result.margin_fraction},
            {"cells", std::move(cells)}};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content,
                     bool overwrite) {
    if (!overwrite && std::filesystem::exists(path)) {
        throw std::runtime_error(path.string() + " already exists (use --force to overwrite)");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace dacd
