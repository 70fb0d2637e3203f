#pragma once

#include "dacd/kernel.hpp"
#include "dacd/types.hpp"

namespace dacd {

/// Fitted exact-GP model: training data, lower Cholesky factor of
/// C = K + sigma_n^2 I (+ jitter), and the solve alpha = C^-1 y.
/// Immutable after fit; predictions may run concurrently on a shared state.
struct GPState {
    SampleSet data;
    KernelParams params;
    Mat chol;       // lower triangular
    Vec alpha;
    double jitter = 0.0;
};

GPState fit(const SampleSet& data, const KernelParams& params);

struct ValuePosterior {
    Vec mean;
    Vec var;  // latent-f variance, clamped to [0, s^2]
};

struct DerivativePosterior {
    Mat dmean;  // n x D
    Mat dvar;   // n x D, diagonal of the gradient covariance, clamped >= 0
};

ValuePosterior predict(const GPState& state, const Mat& grid);
DerivativePosterior predict_derivative(const GPState& state, const Mat& grid);

/// Value and derivative posterior on a dense evaluation grid.
struct PosteriorSlice {
    Mat grid;   // n x D; strictly increasing in 1-D
    Vec mean;
    Vec var;
    Mat dmean;  // n x D
    Mat dvar;   // n x D

    Eigen::Index size() const { return grid.rows(); }
    Eigen::Index dim() const { return grid.cols(); }
};

PosteriorSlice make_slice(const GPState& state, const Mat& grid);

/// Shift/scale transform for targets: the GP keeps its zero prior mean,
/// trends are absorbed here. A degenerate (constant) target set falls back
/// to scale 1.
struct Standardizer {
    double mean = 0.0;
    double scale = 1.0;

    static Standardizer fit(const Vec& targets);

    double forward(double y) const { return (y - mean) / scale; }
    double inverse(double z) const { return z * scale + mean; }
    SampleSet forward(const SampleSet& data) const;

    /// Map a slice computed on standardized targets back to data units.
    PosteriorSlice unstandardize(PosteriorSlice slice) const;
};

}  // namespace dacd
