#include "dacd/active_loop.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace dacd {

namespace {

constexpr std::uint64_t kInitStream = 0x11;
constexpr std::uint64_t kRandomAcqStream = 0x22;
constexpr std::uint64_t kRefitStreamBase = 0x1000;

std::size_t pick_uniform_unsampled(std::mt19937_64& rng, const std::vector<bool>& mask) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) open.push_back(i);
    }
    if (open.empty()) {
        throw std::runtime_error("run_dacd: query budget exhausted, every grid index sampled");
    }
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    return open[pick(rng)];
}

}  // namespace

void LoopConfig::validate() const {
    if (budget < 1) throw std::invalid_argument("LoopConfig: budget must be >= 1");
    if (init_count < 1) throw std::invalid_argument("LoopConfig: init_count must be >= 1");
    if (boundary_init && init_count < 2) {
        throw std::invalid_argument("LoopConfig: boundary_init needs init_count >= 2");
    }
    if (refit_every < 1) throw std::invalid_argument("LoopConfig: refit_every must be >= 1");
    if (fit_restarts < 1) throw std::invalid_argument("LoopConfig: fit_restarts must be >= 1");
    if (refit_restarts < 0) throw std::invalid_argument("LoopConfig: refit_restarts must be >= 0");
    acquisition.validate();
    if (fixed_params) fixed_params->validate();
}

std::vector<std::size_t> init_design(std::size_t grid_size, const LoopConfig& config) {
    config.validate();
    const auto count = static_cast<std::size_t>(config.init_count);
    if (grid_size < count) {
        throw std::invalid_argument("init_design: grid smaller than init_count");
    }

    std::vector<std::size_t> indices;
    std::vector<bool> taken(grid_size, false);
    if (config.boundary_init) {
        indices.push_back(0);
        taken[0] = true;
        if (grid_size > 1) {
            indices.push_back(grid_size - 1);
            taken[grid_size - 1] = true;
        }
    }
    std::mt19937_64 rng(mix_seed(config.seed, kInitStream));
    std::uniform_int_distribution<std::size_t> pick(0, grid_size - 1);
    while (indices.size() < count) {
        const std::size_t idx = pick(rng);
        if (taken[idx]) continue;
        taken[idx] = true;
        indices.push_back(idx);
    }
    return indices;
}

LoopResult run_dacd(const Oracle& oracle, const Mat& grid, const LoopConfig& config) {
    config.validate();
    const std::size_t n = static_cast<std::size_t>(grid.rows());

    LoopResult result;
    result.init_indices = init_design(n, config);

    std::vector<bool> sampled(n, false);
    SampleSet data;
    for (const std::size_t idx : result.init_indices) {
        data.append(grid.row(static_cast<Eigen::Index>(idx)).transpose(), oracle(idx));
        sampled[idx] = true;
        result.queried_indices.push_back(idx);
    }

    std::mt19937_64 random_acq_rng(mix_seed(config.seed, kRandomAcqStream));
    KernelParams params;
    bool have_params = false;

    auto fit_model = [&](int iteration, bool* fit_failed) -> std::pair<GPState, Standardizer> {
        const Standardizer z = Standardizer::fit(data.targets());
        const SampleSet zdata = z.forward(data);

        if (config.fixed_params) {
            params = *config.fixed_params;  // standardized-target units
            have_params = true;
        } else {
            const bool refit_now =
                !have_params || iteration < 0 || iteration % config.refit_every == 0;
            if (refit_now) {
                FitOptions options;
                options.seed = mix_seed(config.seed,
                                        kRefitStreamBase + static_cast<std::uint64_t>(
                                                               iteration < 0 ? config.budget
                                                                             : iteration));
                if (have_params) {
                    options.warm_start = params;
                    options.restarts = 1 + config.refit_restarts;
                } else {
                    options.restarts = config.fit_restarts;
                }
                try {
                    params = fit_hyperparams(zdata, options);
                    if (fit_failed) *fit_failed = false;
                } catch (const FactorizationError& e) {
                    if (!have_params) {
                        throw std::runtime_error(
                            std::string("run_dacd: initial hyperparameter fit failed: ") +
                            e.what());
                    }
                    if (fit_failed) *fit_failed = true;  // keep the previous optimum
                }
                have_params = true;
            }
        }
        return {fit(zdata, params), z};
    };

    for (int iteration = 0; iteration < config.budget; ++iteration) {
        bool fit_failed = false;
        std::pair<GPState, Standardizer> model;
        try {
            model = fit_model(iteration, &fit_failed);
        } catch (const std::exception& e) {
            throw std::runtime_error("run_dacd: iteration " + std::to_string(iteration) + ": " +
                                     e.what());
        }
        const PosteriorSlice slice = make_slice(model.first, grid);

        std::size_t next;
        if (config.acquisition.kind == AcquisitionKind::Random) {
            next = pick_uniform_unsampled(random_acq_rng, sampled);
        } else {
            next = select_next(slice, config.acquisition, sampled);
        }

        const double response = oracle(next);
        data.append(grid.row(static_cast<Eigen::Index>(next)).transpose(), response);
        sampled[next] = true;
        result.queried_indices.push_back(next);

        IterationRecord record;
        record.chosen_index = next;
        record.response = response;
        record.params = params;
        record.refit = !config.fixed_params && iteration % config.refit_every == 0;
        record.fit_failed = fit_failed;
        if (config.record_slices) {
            record.slice = model.second.unstandardize(slice);
        }
        result.trace.iterations.push_back(std::move(record));
    }

    // Final model over all collected data, hyperparameters refreshed.
    bool final_fit_failed = false;
    auto final_model = fit_model(-1, &final_fit_failed);
    result.final_slice = final_model.second.unstandardize(make_slice(final_model.first, grid));
    result.final_params = params;
    result.samples = std::move(data);
    return result;
}

}  // namespace dacd
