#include "dacd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace dacd {

namespace {

constexpr int kRejectionLimit = 10000;
constexpr double kSqrtFloor = 1e-6;

struct JumpDraw {
    std::vector<double> times;  // sorted
    std::vector<double> sizes;  // aligned with times
};

JumpDraw sample_jump_process(const ScenarioSpec& spec, std::mt19937_64& rng) {
    JumpDraw draw;
    if (!spec.forced_jumps.empty()) {
        auto jumps = spec.forced_jumps;
        std::sort(jumps.begin(), jumps.end());
        for (const auto& [time, size] : jumps) {
            draw.times.push_back(time);
            draw.sizes.push_back(size);
        }
        return draw;
    }

    std::poisson_distribution<int> poisson(spec.jump_intensity * spec.horizon);
    std::uniform_real_distribution<double> uniform_time(0.0, spec.horizon);
    std::normal_distribution<double> size_dist(spec.jump_mean, spec.jump_std);

    if (!spec.required_jumps) {
        const int n = poisson(rng);
        for (int i = 0; i < n; ++i) draw.times.push_back(uniform_time(rng));
        std::sort(draw.times.begin(), draw.times.end());
        for (int i = 0; i < n; ++i) draw.sizes.push_back(size_dist(rng));
        return draw;
    }

    // Rejection-resample until exactly the required count lands inside
    // (0.1 T, 0.9 T); keeps ground-truth change points interior.
    const int required = *spec.required_jumps;
    const double lo = 0.1 * spec.horizon;
    const double hi = 0.9 * spec.horizon;
    for (int attempt = 0; attempt < kRejectionLimit; ++attempt) {
        const int n = poisson(rng);
        if (n != required) continue;
        std::vector<double> times(static_cast<std::size_t>(n));
        for (auto& t : times) t = uniform_time(rng);
        if (std::any_of(times.begin(), times.end(),
                        [&](double t) { return t <= lo || t >= hi; })) {
            continue;
        }
        std::sort(times.begin(), times.end());
        draw.times = std::move(times);
        for (int i = 0; i < n; ++i) draw.sizes.push_back(size_dist(rng));
        return draw;
    }
    throw std::runtime_error("simulate: jump conditioning hit the rejection limit");
}

}  // namespace

Eigen::Index ScenarioSpec::grid_size() const {
    return static_cast<Eigen::Index>(std::llround(horizon / dt));
}

void ScenarioSpec::validate() const {
    if (!(sigma >= 0.0) || !(jump_std >= 0.0) || !(jump_intensity >= 0.0)) {
        throw std::invalid_argument("ScenarioSpec: sigma, jump_std, jump_intensity must be >= 0");
    }
    if (!(horizon > 0.0) || !(dt > 0.0) || !(dt < horizon)) {
        throw std::invalid_argument("ScenarioSpec: require 0 < dt < horizon");
    }
    if (required_jumps && *required_jumps < 0) {
        throw std::invalid_argument("ScenarioSpec: required_jumps must be >= 0");
    }
    for (const auto& [time, size] : forced_jumps) {
        (void)size;
        if (time <= 0.0 || time >= horizon) {
            throw std::invalid_argument("ScenarioSpec: forced jump time outside (0, T)");
        }
    }
}

SimulatedSeries simulate_linear(const ScenarioSpec& spec) {
    if (spec.kind != SdeKind::LinearExact) {
        throw std::invalid_argument("simulate_linear: spec kind is not linear_exact");
    }
    spec.validate();
    const Eigen::Index n = spec.grid_size();
    std::mt19937_64 rng(spec.seed);
    const JumpDraw jumps = sample_jump_process(spec, rng);

    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sqrt_dt = std::sqrt(spec.dt);

    SimulatedSeries series;
    series.grid.resize(n);
    series.values.resize(n);
    series.true_changepoints = jumps.times;

    // Drift switches to mu_post from the first jump time onward; scenarios
    // with equal drifts never switch.
    const bool switches = spec.mu_pre != spec.mu_post && !jumps.times.empty();
    const double tau1 = switches ? jumps.times.front() : 0.0;

    double brownian = 0.0;
    std::size_t next_jump = 0;
    double jump_sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double t = static_cast<double>(j + 1) * spec.dt;
        brownian += sqrt_dt * gauss(rng);
        while (next_jump < jumps.times.size() && jumps.times[next_jump] <= t) {
            jump_sum += jumps.sizes[next_jump];
            ++next_jump;
        }
        const double drift = switches
                                 ? spec.mu_pre * std::min(t, tau1) +
                                       spec.mu_post * std::max(0.0, t - tau1)
                                 : spec.mu_pre * t;
        series.grid[j] = t;
        series.values[j] = spec.s0 * std::exp(drift + spec.sigma * brownian -
                                              0.5 * spec.sigma * spec.sigma * t + jump_sum);
    }
    return series;
}

SimulatedSeries simulate_nonlinear(const ScenarioSpec& spec) {
    if (spec.kind != SdeKind::NonlinearEuler) {
        throw std::invalid_argument("simulate_nonlinear: spec kind is not nonlinear_euler");
    }
    spec.validate();
    const Eigen::Index n = spec.grid_size();
    std::mt19937_64 rng(spec.seed);
    const JumpDraw jumps = sample_jump_process(spec, rng);

    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sqrt_dt = std::sqrt(spec.dt);
    const auto& c = spec.nonlinear;

    SimulatedSeries series;
    series.grid.resize(n);
    series.values.resize(n);
    series.true_changepoints = jumps.times;

    double state = spec.s0;
    std::size_t next_jump = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) * spec.dt;       // step start
        const double t_next = static_cast<double>(j + 1) * spec.dt;

        const double drift = c.logistic * state * (1.0 - state) + c.time_slope * t;
        const double diffusion = c.sqrt_diffusion * std::sqrt(std::max(state, kSqrtFloor));
        double jump_increment = 0.0;
        while (next_jump < jumps.times.size() && jumps.times[next_jump] <= t_next) {
            jump_increment += jumps.sizes[next_jump];
            ++next_jump;
        }
        state += drift * spec.dt + diffusion * sqrt_dt * gauss(rng) +
                 c.jump_height * jump_increment;
        if (!std::isfinite(state)) {
            throw std::runtime_error("simulate_nonlinear: state became non-finite");
        }
        series.grid[j] = t_next;
        series.values[j] = state;
    }
    return series;
}

SimulatedSeries simulate(const ScenarioSpec& spec) {
    return spec.kind == SdeKind::LinearExact ? simulate_linear(spec) : simulate_nonlinear(spec);
}

double test_function_2d(double x1, double x2) {
    return std::sin(2.0 * x1) * std::cos(2.0 * x2);
}

Mat make_grid_2d(const Grid2DSpec& spec) {
    Mat grid(spec.nx * spec.ny, 2);
    const Vec x1 = Vec::LinSpaced(spec.nx, spec.x1_lo, spec.x1_hi);
    const Vec x2 = Vec::LinSpaced(spec.ny, spec.x2_lo, spec.x2_hi);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < spec.nx; ++i) {
        for (Eigen::Index j = 0; j < spec.ny; ++j) {
            grid(row, 0) = x1[i];
            grid(row, 1) = x2[j];
            ++row;
        }
    }
    return grid;
}

std::function<double(std::size_t)> make_test2d_oracle(const Mat& grid, double noise_variance,
                                                      std::uint64_t seed) {
    if (grid.cols() != 2) {
        throw std::invalid_argument("make_test2d_oracle: grid must be 2-D");
    }
    const double noise_std = std::sqrt(noise_variance);
    const Mat points = grid;
    return [points, noise_std, seed](std::size_t index) {
        if (index >= static_cast<std::size_t>(points.rows())) {
            throw std::out_of_range("test2d oracle: index outside the grid");
        }
        std::mt19937_64 rng(mix_seed(seed, index));
        std::normal_distribution<double> gauss(0.0, noise_std);
        const auto i = static_cast<Eigen::Index>(index);
        return test_function_2d(points(i, 0), points(i, 1)) + gauss(rng);
    };
}

SampleSet load_welllog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_welllog: cannot open " + path.string());
    }

    std::vector<double> values;
    std::string line;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        for (char& ch : line) {
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        }
        std::istringstream fields(line);
        std::vector<double> row;
        std::string token;
        bool parse_failed = false;
        while (fields >> token) {
            try {
                std::size_t used = 0;
                const double v = std::stod(token, &used);
                if (used != token.size()) throw std::invalid_argument("trailing");
                row.push_back(v);
            } catch (const std::exception&) {
                parse_failed = true;
                break;
            }
        }
        if (row.empty() && !parse_failed) continue;  // blank line
        if (parse_failed) {
            if (first_content_line) {  // header row
                first_content_line = false;
                continue;
            }
            throw std::runtime_error("load_welllog: non-numeric line in " + path.string());
        }
        first_content_line = false;
        values.push_back(row.back());  // last column is the measurement
    }
    if (values.empty()) {
        throw std::runtime_error("load_welllog: no measurements in " + path.string());
    }
    if (values.size() != 4050) {
        std::cerr << "load_welllog: expected 4050 measurements, got " << values.size()
                  << "; proceeding\n";
    }

    Mat inputs(static_cast<Eigen::Index>(values.size()), 1);
    Vec targets(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        inputs(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
        targets[static_cast<Eigen::Index>(i)] = values[i];
    }
    return SampleSet(std::move(inputs), std::move(targets));
}

const std::map<std::string, ScenarioDefaults>& builtin_scenarios() {
    static const std::map<std::string, ScenarioDefaults> registry = [] {
        std::map<std::string, ScenarioDefaults> m;

        auto linear = [](std::string name, double mu_pre, double mu_post, double sigma,
                         double lambda, double alpha, double delta) {
            ScenarioSpec s;
            s.name = std::move(name);
            s.kind = SdeKind::LinearExact;
            s.mu_pre = mu_pre;
            s.mu_post = mu_post;
            s.sigma = sigma;
            s.jump_intensity = lambda;
            s.jump_mean = alpha;
            s.jump_std = delta;
            s.horizon = 10.0;
            s.dt = 1e-2;
            s.required_jumps = 1;
            return s;
        };
        auto single = [](ScenarioSpec s) {
            return ScenarioDefaults{std::move(s), 20, 100, 100, 1};
        };

        m["mjd_t_no"] = single(linear("mjd_t_no", 0.00, 0.00, 0.10, 0.18, 0.20, 0.35));
        m["mjd_t_up"] = single(linear("mjd_t_up", 0.10, 0.10, 0.08, 0.18, 0.30, 0.35));
        m["mjd_t_inv"] = single(linear("mjd_t_inv", 0.10, -0.05, 0.08, 0.18, 0.60, 0.01));
        m["mjd_t_down"] = single(linear("mjd_t_down", 0.06, 0.06, 0.08, 0.18, -0.50, 0.01));

        ScenarioSpec mcp = linear("mcp", 0.30, -0.40, 0.30, 0.90, -0.10, 0.70);
        mcp.horizon = 4.0;
        mcp.dt = 1e-3;
        mcp.required_jumps = 4;
        m["mcp"] = ScenarioDefaults{std::move(mcp), 100, 30, 100, 4};

        // Nonlinear rows list f, g, h only; jump sizes are normalized to
        // N(1, 0.1^2) so jump_height is the shift magnitude.
        auto nonlinear = [](std::string name, NonlinearCoeffs c) {
            ScenarioSpec s;
            s.name = std::move(name);
            s.kind = SdeKind::NonlinearEuler;
            s.nonlinear = c;
            s.jump_intensity = 0.18;
            s.jump_mean = 1.0;
            s.jump_std = 0.1;
            s.horizon = 10.0;
            s.dt = 1e-2;
            s.required_jumps = 1;
            return s;
        };
        m["mjd_p_no"] = single(nonlinear("mjd_p_no", {0.01, 0.0, 0.1, 0.60}));
        m["mjd_p_up"] = single(nonlinear("mjd_p_up", {0.1, 0.041, 0.14, 0.50}));
        return m;
    }();
    return registry;
}

}  // namespace dacd
