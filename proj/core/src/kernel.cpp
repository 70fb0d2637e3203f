#include "dacd/kernel.hpp"

#include "dacd/optim.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace dacd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kJitterStart = 1e-8;  // relative to s^2
constexpr double kJitterMax = 1e-2;

// Floors for data-derived scales so bounds stay usable on degenerate sets.
double floored(double v) { return v > 1e-12 ? v : 1.0; }

}  // namespace

Eigen::Vector3d KernelParams::to_log() const {
    return {std::log(output_scale), std::log(lengthscale), std::log(noise_std)};
}

KernelParams KernelParams::from_log(const Eigen::Vector3d& log_params) {
    return {std::exp(log_params[0]), std::exp(log_params[1]), std::exp(log_params[2])};
}

void KernelParams::validate() const {
    if (!(output_scale > 0.0) || !std::isfinite(output_scale) ||
        !(lengthscale > 0.0) || !std::isfinite(lengthscale) ||
        !(noise_std >= 0.0) || !std::isfinite(noise_std)) {
        throw std::invalid_argument(
            "KernelParams: require output_scale > 0, lengthscale > 0, noise_std >= 0");
    }
}

double rbf(const Vec& x, const Vec& xp, const KernelParams& p) {
    const double sq = (x - xp).squaredNorm();
    return p.output_scale * p.output_scale *
           std::exp(-sq / (2.0 * p.lengthscale * p.lengthscale));
}

Vec rbf_grad_xprime(const Vec& x, const Vec& xp, const KernelParams& p) {
    const double k = rbf(x, xp, p);
    const double inv_l2 = 1.0 / (p.lengthscale * p.lengthscale);
    return (x - xp) * (inv_l2 * k);
}

Mat rbf_hess_mixed(const Vec& x, const Vec& xp, const KernelParams& p) {
    const double k = rbf(x, xp, p);
    const double l2 = p.lengthscale * p.lengthscale;
    const Vec d = x - xp;
    Mat h = -d * d.transpose();
    h.diagonal().array() += l2;
    return h * (k / (l2 * l2));
}

Mat squared_distance_matrix(const Mat& X) {
    const Eigen::Index n = X.rows();
    const Vec norms = X.rowwise().squaredNorm();
    Mat sq = norms.replicate(1, n) + norms.transpose().replicate(n, 1) -
             2.0 * X * X.transpose();
    return sq.cwiseMax(0.0);  // guard tiny negative round-off
}

Mat rbf_gram(const Mat& X, const KernelParams& p) {
    const Mat sq = squared_distance_matrix(X);
    const double s2 = p.output_scale * p.output_scale;
    const double inv = -1.0 / (2.0 * p.lengthscale * p.lengthscale);
    return s2 * (sq * inv).array().exp().matrix();
}

GramCholesky cholesky_with_jitter(const Mat& gram, const KernelParams& p) {
    const double s2 = p.output_scale * p.output_scale;
    const double noise2 = p.noise_std * p.noise_std;
    Mat c = gram;
    c.diagonal().array() += noise2;
    for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-12); rel *= 10.0) {
        const double jitter = rel * s2;
        Mat attempt = c;
        attempt.diagonal().array() += jitter;
        Eigen::LLT<Mat> llt(attempt);
        if (llt.info() == Eigen::Success) {
            return {Mat(llt.matrixL()), jitter};
        }
    }
    throw FactorizationError(
        "cholesky_with_jitter: Gram matrix not positive definite up to jitter 1e-2 s^2");
}

NlmlResult nlml(const KernelParams& p, const SampleSet& data) {
    if (data.size() < 1) {
        throw std::invalid_argument("nlml: need at least one observation");
    }
    return nlml_with_sqdist(p, squared_distance_matrix(data.inputs()), data.targets());
}

NlmlResult nlml_with_sqdist(const KernelParams& p, const Mat& sqdist, const Vec& y) {
    p.validate();
    const Eigen::Index n = y.size();
    const double s2 = p.output_scale * p.output_scale;
    const double l2 = p.lengthscale * p.lengthscale;
    const double noise2 = p.noise_std * p.noise_std;

    const Mat k_mat = s2 * (sqdist * (-1.0 / (2.0 * l2))).array().exp().matrix();
    const auto chol = cholesky_with_jitter(k_mat, p);
    const Mat& lower = chol.lower;

    Vec alpha = y;
    lower.triangularView<Eigen::Lower>().solveInPlace(alpha);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);

    NlmlResult result;
    result.jitter = chol.jitter;
    result.value = 0.5 * y.dot(alpha) + lower.diagonal().array().log().sum() +
                   0.5 * static_cast<double>(n) * std::log(kTwoPi);

    // A = C^-1 - alpha alpha^T; each gradient entry is 0.5 tr(A dC/dtheta).
    Mat c_inv = Mat::Identity(n, n);
    lower.triangularView<Eigen::Lower>().solveInPlace(c_inv);
    c_inv = c_inv.transpose() * c_inv;
    const Mat a = c_inv - alpha * alpha.transpose();

    const double trace_a = a.trace();
    // dC/dlog s = 2K + 2 jitter I (the jitter scales with s^2).
    result.grad_log[0] = a.cwiseProduct(k_mat).sum() + chol.jitter * trace_a;
    // dC/dlog l = K .* sqdist / l^2.
    result.grad_log[1] = 0.5 * a.cwiseProduct(k_mat.cwiseProduct(sqdist)).sum() / l2;
    // dC/dlog sigma_n = 2 sigma_n^2 I.
    result.grad_log[2] = noise2 * trace_a;
    return result;
}

HyperBounds HyperBounds::from_data(const SampleSet& data) {
    const double domain = floored(data.domain_length());
    const double tstd = floored(data.target_std());
    HyperBounds b;
    b.lower_log = Eigen::Vector3d(std::log(1e-3 * tstd), std::log(1e-3 * domain),
                                  std::log(1e-4 * tstd));
    b.upper_log = Eigen::Vector3d(std::log(1e3 * tstd), std::log(10.0 * domain),
                                  std::log(1.0 * tstd));
    return b;
}

Eigen::Vector3d HyperBounds::clamp(const Eigen::Vector3d& log_params) const {
    return log_params.cwiseMax(lower_log).cwiseMin(upper_log);
}

KernelParams fit_hyperparams(const SampleSet& data, const FitOptions& options) {
    if (data.size() < 2) {
        throw std::invalid_argument("fit_hyperparams: need at least two observations");
    }
    if (options.restarts < 1) {
        throw std::invalid_argument("fit_hyperparams: restarts must be >= 1");
    }

    const HyperBounds bounds = HyperBounds::from_data(data);
    const Mat sqdist = squared_distance_matrix(data.inputs());
    const Vec& y = data.targets();

    const ObjectiveFn objective = [&](const Vec& x, Vec& grad) {
        const KernelParams p = KernelParams::from_log(Eigen::Vector3d(x));
        const NlmlResult r = nlml_with_sqdist(p, sqdist, y);
        grad = r.grad_log;
        return r.value;
    };

    std::vector<Eigen::Vector3d> starts;
    starts.reserve(static_cast<std::size_t>(options.restarts));
    if (options.warm_start) {
        starts.push_back(bounds.clamp(options.warm_start->to_log()));
    } else {
        const double tstd = floored(data.target_std());
        const double domain = floored(data.domain_length());
        starts.push_back(bounds.clamp(Eigen::Vector3d(
            std::log(tstd), std::log(0.1 * domain), std::log(0.1 * tstd))));
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 1; r < options.restarts; ++r) {
        Eigen::Vector3d start;
        for (int i = 0; i < 3; ++i) {
            start[i] = bounds.lower_log[i] +
                       unit(rng) * (bounds.upper_log[i] - bounds.lower_log[i]);
        }
        starts.push_back(start);
    }

    LbfgsOptions lbfgs;
    lbfgs.max_iterations = options.max_iterations;
    lbfgs.gradient_tolerance = options.gradient_tolerance;

    bool have_best = false;
    double best_value = std::numeric_limits<double>::infinity();
    Vec best_x;
    std::string last_error = "fit_hyperparams: no restart completed";
    for (const auto& start : starts) {
        try {
            const LbfgsResult res = minimize_lbfgs_box(objective, start, bounds.lower_log,
                                                       bounds.upper_log, lbfgs);
            if (!have_best || res.value < best_value) {
                have_best = true;
                best_value = res.value;
                best_x = res.x;
            }
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    if (!have_best) {
        throw FactorizationError("fit_hyperparams: every restart failed: " + last_error);
    }
    return KernelParams::from_log(Eigen::Vector3d(best_x));
}

KernelParams fit_hyperparams(const SampleSet& data, int restarts, std::uint64_t seed) {
    FitOptions options;
    options.restarts = restarts;
    options.seed = seed;
    return fit_hyperparams(data, options);
}

}  // namespace dacd
