#include "dacd/gp.hpp"

#include <cmath>
#include <stdexcept>

namespace dacd {

namespace {

// Cross squared distances between rows of A (N x D) and rows of B (n x D).
Mat cross_squared_distance(const Mat& a, const Mat& b) {
    const Vec an = a.rowwise().squaredNorm();
    const Vec bn = b.rowwise().squaredNorm();
    Mat sq = an.replicate(1, b.rows()) + bn.transpose().replicate(a.rows(), 1) -
             2.0 * a * b.transpose();
    return sq.cwiseMax(0.0);
}

void check_nonnegative(Vec& v, double scale, const char* what) {
    const double tol = -1e-10 * std::max(1.0, scale);
    if ((v.array() < tol).any()) {
        throw std::runtime_error(std::string(what) +
                                 ": posterior variance below the round-off floor");
    }
    v = v.cwiseMax(0.0);
}

}  // namespace

GPState fit(const SampleSet& data, const KernelParams& params) {
    if (data.size() < 1) {
        throw std::invalid_argument("gp::fit: need at least one observation");
    }
    params.validate();

    GPState state;
    state.data = data;
    state.params = params;

    const Mat gram = rbf_gram(data.inputs(), params);
    auto chol = cholesky_with_jitter(gram, params);
    state.jitter = chol.jitter;
    state.chol = std::move(chol.lower);

    state.alpha = data.targets();
    state.chol.triangularView<Eigen::Lower>().solveInPlace(state.alpha);
    state.chol.transpose().triangularView<Eigen::Upper>().solveInPlace(state.alpha);
    return state;
}

ValuePosterior predict(const GPState& state, const Mat& grid) {
    if (grid.cols() != state.data.dim()) {
        throw std::invalid_argument("gp::predict: grid dimension mismatch");
    }
    const double s2 = state.params.output_scale * state.params.output_scale;
    const double inv = -1.0 / (2.0 * state.params.lengthscale * state.params.lengthscale);

    const Mat k_star =
        s2 * (cross_squared_distance(state.data.inputs(), grid) * inv).array().exp().matrix();

    ValuePosterior out;
    out.mean = k_star.transpose() * state.alpha;

    Mat v = k_star;
    state.chol.triangularView<Eigen::Lower>().solveInPlace(v);
    out.var = (s2 - v.colwise().squaredNorm().array()).matrix().transpose();
    check_nonnegative(out.var, s2, "gp::predict");
    out.var = out.var.cwiseMin(s2);
    return out;
}

DerivativePosterior predict_derivative(const GPState& state, const Mat& grid) {
    if (grid.cols() != state.data.dim()) {
        throw std::invalid_argument("gp::predict_derivative: grid dimension mismatch");
    }
    const Eigen::Index n = grid.rows();
    const Eigen::Index dim = grid.cols();
    const double s2 = state.params.output_scale * state.params.output_scale;
    const double l2 = state.params.lengthscale * state.params.lengthscale;

    const Mat k_star =
        s2 * (cross_squared_distance(state.data.inputs(), grid) * (-0.5 / l2))
                 .array()
                 .exp()
                 .matrix();

    DerivativePosterior out;
    out.dmean.resize(n, dim);
    out.dvar.resize(n, dim);
    const double prior_dvar = s2 / l2;

    for (Eigen::Index p = 0; p < dim; ++p) {
        // Cross-covariance between f(x_i) and the p-th derivative at grid
        // points: ((x_i - x*)_p / l^2) k(x_i, x*).
        Mat g = ((state.data.inputs().col(p).replicate(1, n) -
                  grid.col(p).transpose().replicate(state.data.size(), 1)) /
                 l2)
                    .cwiseProduct(k_star);
        out.dmean.col(p) = g.transpose() * state.alpha;
        state.chol.triangularView<Eigen::Lower>().solveInPlace(g);
        Vec dv = (prior_dvar - g.colwise().squaredNorm().array()).matrix().transpose();
        check_nonnegative(dv, prior_dvar, "gp::predict_derivative");
        out.dvar.col(p) = dv;
    }
    return out;
}

PosteriorSlice make_slice(const GPState& state, const Mat& grid) {
    if (grid.cols() == 1) {
        for (Eigen::Index i = 1; i < grid.rows(); ++i) {
            if (!(grid(i, 0) > grid(i - 1, 0))) {
                throw std::invalid_argument("make_slice: 1-D grid must be strictly increasing");
            }
        }
    }
    PosteriorSlice slice;
    slice.grid = grid;
    auto value = predict(state, grid);
    slice.mean = std::move(value.mean);
    slice.var = std::move(value.var);
    auto deriv = predict_derivative(state, grid);
    slice.dmean = std::move(deriv.dmean);
    slice.dvar = std::move(deriv.dvar);
    return slice;
}

Standardizer Standardizer::fit(const Vec& targets) {
    Standardizer z;
    if (targets.size() == 0) return z;
    z.mean = targets.mean();
    const double sd =
        std::sqrt((targets.array() - z.mean).square().sum() / static_cast<double>(targets.size()));
    z.scale = sd > 1e-12 ? sd : 1.0;
    return z;
}

SampleSet Standardizer::forward(const SampleSet& data) const {
    Vec z = (data.targets().array() - mean) / scale;
    return SampleSet(data.inputs(), std::move(z));
}

PosteriorSlice Standardizer::unstandardize(PosteriorSlice slice) const {
    slice.mean = (slice.mean.array() * scale + mean).matrix();
    slice.var *= scale * scale;
    slice.dmean *= scale;
    slice.dvar *= scale * scale;
    return slice;
}

}  // namespace dacd
