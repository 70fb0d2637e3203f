#include "dacd/optim.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dacd {

namespace {

Vec project(const Vec& x, const Vec& lo, const Vec& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

// Norm of the projected gradient step ||P(x - g) - x||; zero exactly at a
// box-constrained stationary point.
double projected_gradient_norm(const Vec& x, const Vec& g, const Vec& lo, const Vec& hi) {
    return (project(x - g, lo, hi) - x).norm();
}

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;

}  // namespace

LbfgsResult minimize_lbfgs_box(const ObjectiveFn& objective, Vec x0,
                               const Vec& lower, const Vec& upper,
                               const LbfgsOptions& options) {
    const Eigen::Index dim = x0.size();
    if (lower.size() != dim || upper.size() != dim) {
        throw std::invalid_argument("minimize_lbfgs_box: bound dimension mismatch");
    }
    if ((lower.array() > upper.array()).any()) {
        throw std::invalid_argument("minimize_lbfgs_box: lower bound exceeds upper bound");
    }

    Vec x = project(x0, lower, upper);
    Vec grad(dim);
    double f = objective(x, grad);  // a throw here propagates to the caller
    if (!std::isfinite(f)) {
        throw std::invalid_argument("minimize_lbfgs_box: objective not finite at start");
    }

    std::vector<Vec> s_hist, y_hist;
    std::vector<double> rho_hist;

    LbfgsResult result;
    result.x = x;
    result.value = f;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter;
        if (projected_gradient_norm(x, grad, lower, upper) <= options.gradient_tolerance) {
            result.converged = true;
            break;
        }

        // Two-loop recursion for the quasi-Newton direction.
        Vec direction = -grad;
        const std::size_t m = s_hist.size();
        if (m > 0) {
            std::vector<double> alpha(m);
            for (std::size_t i = m; i-- > 0;) {
                alpha[i] = rho_hist[i] * s_hist[i].dot(direction);
                direction -= alpha[i] * y_hist[i];
            }
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            direction *= gamma;
            for (std::size_t i = 0; i < m; ++i) {
                const double beta = rho_hist[i] * y_hist[i].dot(direction);
                direction += (alpha[i] - beta) * s_hist[i];
            }
        }

        bool used_fallback = (m == 0);
        if (direction.dot(grad) >= 0.0) {
            direction = -grad;  // quasi-Newton direction lost descent; fall back
            used_fallback = true;
        }

        // Backtracking Armijo search along the projected path.
        double step = used_fallback ? 1.0 / std::max(1.0, grad.norm()) : 1.0;
        Vec x_new, grad_new(dim);
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
            x_new = project(x + step * direction, lower, upper);
            const Vec dx = x_new - x;
            if (dx.norm() == 0.0) break;  // pinned to the boundary
            double ft;
            try {
                ft = objective(x_new, grad_new);
            } catch (...) {
                ft = std::numeric_limits<double>::infinity();
            }
            if (std::isfinite(ft) && ft <= f + kArmijo * grad.dot(dx)) {
                f_new = ft;
                accepted = true;
                break;
            }
            step *= kBacktrack;
        }

        if (!accepted) {
            if (!used_fallback) {
                // Retry once from steepest descent before giving up.
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                direction = -grad;
                step = 1.0 / std::max(1.0, grad.norm());
                for (int ls = 0; ls < options.max_line_search_steps; ++ls) {
                    x_new = project(x + step * direction, lower, upper);
                    const Vec dx = x_new - x;
                    if (dx.norm() == 0.0) break;
                    double ft;
                    try {
                        ft = objective(x_new, grad_new);
                    } catch (...) {
                        ft = std::numeric_limits<double>::infinity();
                    }
                    if (std::isfinite(ft) && ft <= f + kArmijo * grad.dot(dx)) {
                        f_new = ft;
                        accepted = true;
                        break;
                    }
                    step *= kBacktrack;
                }
            }
            if (!accepted) break;  // no further progress possible
        }

        const Vec s = x_new - x;
        const Vec y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > options.memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }

        x = x_new;
        grad = grad_new;
        f = f_new;
        result.x = x;
        result.value = f;
    }

    result.x = x;
    result.value = f;
    return result;
}

}  // namespace dacd
