#pragma once

#include "dacd/acquisition.hpp"
#include "dacd/gp.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace dacd {

/// Query interface: grid index -> response. The loop never queries the
/// same index twice.
using Oracle = std::function<double(std::size_t)>;

struct LoopConfig {
    int budget = 20;  // B
    int init_count = 8;
    bool boundary_init = true;  // 2 boundary points + rest random
    AcquisitionSpec acquisition;
    int refit_every = 1;
    std::uint64_t seed = 0;

    int fit_restarts = 8;    // restarts for the first hyperparameter fit
    int refit_restarts = 2;  // fresh restarts on warm-started refits
    std::optional<KernelParams> fixed_params;  // skip fitting entirely
    bool record_slices = false;

    void validate() const;
};

struct IterationRecord {
    std::size_t chosen_index = 0;
    double response = 0.0;
    KernelParams params;      // hyperparameters in effect (standardized units)
    bool refit = false;
    bool fit_failed = false;  // fit fell back to the previous parameters
    std::optional<PosteriorSlice> slice;
};

struct LoopTrace {
    std::vector<IterationRecord> iterations;
};

/// Initial design over grid indices: with boundary_init the first and last
/// index plus seeded-uniform distinct fills, otherwise all seeded-uniform.
std::vector<std::size_t> init_design(std::size_t grid_size, const LoopConfig& config);

struct LoopResult {
    SampleSet samples;
    LoopTrace trace;
    PosteriorSlice final_slice;  // refit on all collected data, data units
    KernelParams final_params;
    std::vector<std::size_t> init_indices;
    std::vector<std::size_t> queried_indices;  // init + chosen, in order
};

/// The DACD loop: fit -> derivative posterior -> acquire -> query -> append,
/// for exactly `budget` iterations. Targets are standardized before every
/// fit; the acquisition sees the standardized slice (so xi and lambda keep
/// a data-independent meaning) and exported slices are in data units.
LoopResult run_dacd(const Oracle& oracle, const Mat& grid, const LoopConfig& config);

}  // namespace dacd
