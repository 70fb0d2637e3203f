#pragma once

#include "dacd/types.hpp"

#include <optional>
#include <stdexcept>

namespace dacd {

/// RBF kernel hyperparameters. All optimization happens on (log s, log l,
/// log sigma_n); the exp/log round trip is exact for IEEE doubles
/// (including sigma_n = 0, which maps through -inf).
struct KernelParams {
    double output_scale = 1.0;  // s, units of the response
    double lengthscale = 1.0;   // l, units of the input
    double noise_std = 0.0;     // sigma_n, units of the response

    Eigen::Vector3d to_log() const;
    static KernelParams from_log(const Eigen::Vector3d& log_params);

    void validate() const;  // throws std::invalid_argument
};

/// k(x, x') = s^2 exp(-|x - x'|^2 / (2 l^2))
double rbf(const Vec& x, const Vec& xp, const KernelParams& p);

/// d k / d x'_p = ((x_p - x'_p) / l^2) k(x, x')
Vec rbf_grad_xprime(const Vec& x, const Vec& xp, const KernelParams& p);

/// d^2 k / (d x_i d x'_j) = (l^2 d_ij - (x_i - x'_i)(x_j - x'_j)) k / l^4
Mat rbf_hess_mixed(const Vec& x, const Vec& xp, const KernelParams& p);

struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pairwise squared distances between rows of X.
Mat squared_distance_matrix(const Mat& X);

/// Kernel Gram matrix K (without noise or jitter).
Mat rbf_gram(const Mat& X, const KernelParams& p);

/// Cholesky of K + (sigma_n^2 + jitter) I. Jitter starts at 1e-8 s^2 and
/// escalates by x10 up to 1e-2 s^2; beyond that a FactorizationError is
/// thrown.
struct GramCholesky {
    Mat lower;      // L with L L^T = K + (sigma_n^2 + jitter) I
    double jitter;  // the jitter actually applied, proportional to s^2
};
GramCholesky cholesky_with_jitter(const Mat& gram, const KernelParams& p);

/// Negative log marginal likelihood and its exact gradient with respect to
/// the log-parameters. The jitter term is part of the objective, so the
/// gradient matches finite differences of `value` to machine precision.
struct NlmlResult {
    double value = 0.0;
    Eigen::Vector3d grad_log = Eigen::Vector3d::Zero();
    double jitter = 0.0;
};
NlmlResult nlml(const KernelParams& p, const SampleSet& data);
NlmlResult nlml_with_sqdist(const KernelParams& p, const Mat& sqdist, const Vec& y);

/// Box constraints for the log-parameters, scaled to the data:
/// l in [1e-3, 10] x domain length, s in [1e-3, 1e3] x target std,
/// sigma_n in [1e-4, 1] x target std.
struct HyperBounds {
    Eigen::Vector3d lower_log;
    Eigen::Vector3d upper_log;
    static HyperBounds from_data(const SampleSet& data);
    Eigen::Vector3d clamp(const Eigen::Vector3d& log_params) const;
};

struct FitOptions {
    int restarts = 8;
    std::uint64_t seed = 0;
    std::optional<KernelParams> warm_start;  // replaces the heuristic first start
    int max_iterations = 200;
    double gradient_tolerance = 1e-6;
};

/// Multi-start quasi-Newton minimization of the NLML in log-space.
/// Returns the best parameters found; the achieved NLML never exceeds the
/// NLML of any start point. Throws FactorizationError only if every
/// restart fails.
KernelParams fit_hyperparams(const SampleSet& data, const FitOptions& options);
KernelParams fit_hyperparams(const SampleSet& data, int restarts, std::uint64_t seed = 0);

}  // namespace dacd
