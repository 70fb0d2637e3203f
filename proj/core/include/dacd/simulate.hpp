#pragma once

#include "dacd/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dacd {

enum class SdeKind { LinearExact, NonlinearEuler };

/// Coefficients of the nonlinear jump-diffusion family used by the
/// benchmark scenarios:
///   dS = (logistic S (1 - S) + time_slope t) dt + sqrt_diffusion sqrt(S) dW
///        + jump_height dJ
struct NonlinearCoeffs {
    double logistic = 0.0;
    double time_slope = 0.0;
    double sqrt_diffusion = 0.0;
    double jump_height = 0.0;
};

struct ScenarioSpec {
    std::string name;
    SdeKind kind = SdeKind::LinearExact;

    // Linear (exact-solution) parameters. When mu_pre != mu_post the drift
    // switches to mu_post from the first jump time onward.
    double mu_pre = 0.0;
    double mu_post = 0.0;
    double sigma = 0.0;

    // Compound-Poisson jump process; jump sizes ~ N(jump_mean, jump_std^2).
    double jump_intensity = 0.0;
    double jump_mean = 0.0;
    double jump_std = 0.0;

    double s0 = 1.0;
    double horizon = 10.0;  // T
    double dt = 1e-2;

    NonlinearCoeffs nonlinear;  // used when kind == NonlinearEuler

    /// When set, the jump process is rejection-resampled until exactly this
    /// many jumps occur, all inside (0.1 T, 0.9 T).
    std::optional<int> required_jumps;

    /// Pinned (time, size) jumps; bypasses Poisson sampling entirely.
    std::vector<std::pair<double, double>> forced_jumps;

    std::uint64_t seed = 0;

    Eigen::Index grid_size() const;  // round(T / dt)
    void validate() const;
};

struct SimulatedSeries {
    Vec grid;    // times t_j = j dt, j = 0..n-1
    Vec values;  // realized S on the grid
    std::vector<double> true_changepoints;  // jump times, sorted
};

SimulatedSeries simulate_linear(const ScenarioSpec& spec);
SimulatedSeries simulate_nonlinear(const ScenarioSpec& spec);
SimulatedSeries simulate(const ScenarioSpec& spec);  // dispatch on kind

/// f(x1, x2) = sin(2 x1) cos(2 x2); the 2-D benchmark surface.
double test_function_2d(double x1, double x2);

/// Row-major 50 x 50 (by default) mesh over [x1_lo, x1_hi] x [x2_lo, x2_hi].
struct Grid2DSpec {
    double x1_lo = -0.1, x1_hi = 3.1;
    double x2_lo = 0.9, x2_hi = 4.1;
    Eigen::Index nx = 50, ny = 50;
};
Mat make_grid_2d(const Grid2DSpec& spec = {});

/// Seeded evaluation oracle over a 2-D grid: test_function_2d plus
/// independent N(0, noise_variance) per grid point, stable under query order.
std::function<double(std::size_t)> make_test2d_oracle(const Mat& grid,
                                                      double noise_variance,
                                                      std::uint64_t seed);

/// Single- or two-column delimited text; a non-numeric first line is
/// treated as a header. x = 0-based sample index, y = measurement.
SampleSet load_welllog(const std::filesystem::path& path);

/// Per-scenario experiment defaults (loop budget, runs, detection window
/// and change-point count), keyed by scenario name.
struct ScenarioDefaults {
    ScenarioSpec spec;
    int budget = 20;
    int runs = 100;
    std::size_t window = 100;   // filtered-derivative A
    std::size_t changepoints = 1;
};

/// The seven benchmark scenarios with their published parameters.
const std::map<std::string, ScenarioDefaults>& builtin_scenarios();

}  // namespace dacd
