#include "dacd/detect.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dacd {

FilteredTrace filtered_derivative(const Vec& series, std::size_t window) {
    const std::size_t n = static_cast<std::size_t>(series.size());
    if (window < 1) {
        throw std::invalid_argument("filtered_derivative: window must be >= 1");
    }
    if (n < 2 * window + 1) {
        throw std::invalid_argument(
            "filtered_derivative: series too short, need length >= 2A + 1");
    }

    FilteredTrace trace;
    trace.first_k = window;
    trace.window = window;
    trace.values.resize(n - 2 * window + 1);

    // Window sums for the first valid k = A: left [0, A), right [A, 2A).
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < window; ++i) left += series[static_cast<Eigen::Index>(i)];
    for (std::size_t i = window; i < 2 * window; ++i) right += series[static_cast<Eigen::Index>(i)];

    const double inv = 1.0 / static_cast<double>(window);
    for (std::size_t k = window;; ++k) {
        trace.values[k - window] = (right - left) * inv;
        if (k == n - window) break;
        const double entering = series[static_cast<Eigen::Index>(k + window)];
        const double crossing = series[static_cast<Eigen::Index>(k)];
        const double leaving = series[static_cast<Eigen::Index>(k - window)];
        right += entering - crossing;
        left += crossing - leaving;
    }
    return trace;
}

std::size_t estimate_single(const Vec& series, std::size_t window) {
    const FilteredTrace trace = filtered_derivative(series, window);
    std::size_t best = trace.first_k;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < trace.values.size(); ++i) {
        const double a = std::abs(trace.values[i]);
        if (a > best_abs) {
            best_abs = a;
            best = trace.first_k + i;
        }
    }
    return best;
}

std::vector<std::size_t> estimate_mcp(const Vec& series, std::size_t window, std::size_t count) {
    if (count < 1) {
        throw std::invalid_argument("estimate_mcp: count must be >= 1");
    }
    const FilteredTrace trace = filtered_derivative(series, window);
    const std::size_t valid = trace.values.size();
    if ((count - 1) * 2 * window + 1 > valid) {
        throw std::invalid_argument(
            "estimate_mcp: valid range cannot host K points pairwise >= 2A apart");
    }

    // Suppression within 2A of a detected point keeps the reported set
    // pairwise >= 2A apart; suppressed entries leave the candidate pool.
    std::vector<bool> suppressed(valid, false);
    std::vector<std::size_t> found;
    found.reserve(count);
    for (std::size_t round = 0; round < count; ++round) {
        bool any = false;
        std::size_t best = 0;
        double best_abs = -1.0;
        for (std::size_t i = 0; i < valid; ++i) {
            if (suppressed[i]) continue;
            const double a = std::abs(trace.values[i]);
            if (!any || a > best_abs) {
                any = true;
                best_abs = a;
                best = i;
            }
        }
        if (!any) {
            throw std::runtime_error(
                "estimate_mcp: suppression exhausted the valid range before K points");
        }
        found.push_back(trace.first_k + best);
        const std::size_t radius = 2 * window;
        const std::size_t lo = best >= radius ? best - radius + 1 : 0;
        const std::size_t hi = std::min(valid, best + radius);
        for (std::size_t i = lo; i < hi; ++i) suppressed[i] = true;
    }
    std::sort(found.begin(), found.end());
    return found;
}

DetectionResult detect_changepoints(const Vec& series, const Vec& grid,
                                    std::size_t window, std::size_t count) {
    if (grid.size() != series.size()) {
        throw std::invalid_argument("detect_changepoints: grid/series length mismatch");
    }
    DetectionResult result;
    result.window = window;
    result.trace = filtered_derivative(series, window);
    result.indices = count == 1 ? std::vector<std::size_t>{estimate_single(series, window)}
                                : estimate_mcp(series, window, count);
    result.locations.reserve(result.indices.size());
    for (const std::size_t idx : result.indices) {
        result.locations.push_back(grid[static_cast<Eigen::Index>(idx)]);
    }
    return result;
}

std::vector<SlopePoint> knn_slope_2d(const SampleSet& samples, std::size_t k_neighbors,
                                     std::size_t count) {
    if (samples.dim() != 2) {
        throw std::invalid_argument("knn_slope_2d: samples must be 2-D");
    }
    if (k_neighbors < 3) {
        throw std::invalid_argument("knn_slope_2d: need k_neighbors >= 3 for a plane fit");
    }
    const std::size_t n = static_cast<std::size_t>(samples.size());
    if (n < k_neighbors + 1) {
        throw std::invalid_argument("knn_slope_2d: need at least k_neighbors + 1 samples");
    }
    if (count < 1) {
        throw std::invalid_argument("knn_slope_2d: count must be >= 1");
    }

    const Mat& x = samples.inputs();
    const Vec& y = samples.targets();

    std::vector<double> nearest(n);
    std::vector<double> slope(n);
    std::vector<std::size_t> order(n);
    std::vector<std::pair<double, std::size_t>> dist(n);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dist[j] = {(x.row(j) - x.row(i)).norm(), j};
        }
        dist[i].first = std::numeric_limits<double>::infinity();  // exclude self
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_neighbors),
                          dist.end());
        nearest[i] = dist[0].first;

        Mat design(k_neighbors, 3);
        Vec target(k_neighbors);
        for (std::size_t j = 0; j < k_neighbors; ++j) {
            const std::size_t idx = dist[j].second;
            design(static_cast<Eigen::Index>(j), 0) = 1.0;
            design(static_cast<Eigen::Index>(j), 1) = x(static_cast<Eigen::Index>(idx), 0);
            design(static_cast<Eigen::Index>(j), 2) = x(static_cast<Eigen::Index>(idx), 1);
            target[static_cast<Eigen::Index>(j)] = y[static_cast<Eigen::Index>(idx)];
        }
        Eigen::ColPivHouseholderQR<Mat> qr(design);
        if (qr.rank() < 3) {
            throw std::runtime_error("knn_slope_2d: degenerate neighborhood (collinear points)");
        }
        const Vec beta = qr.solve(target);
        slope[i] = std::hypot(beta[1], beta[2]);
    }

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (slope[a] != slope[b]) return slope[a] > slope[b];
        return a < b;
    });

    std::vector<double> spacing = nearest;
    std::nth_element(spacing.begin(), spacing.begin() + static_cast<long>(n / 2), spacing.end());
    const double radius = 2.0 * spacing[n / 2];

    std::vector<SlopePoint> picked;
    picked.reserve(count);
    for (const std::size_t i : order) {
        bool separated = true;
        for (const auto& q : picked) {
            if ((x.row(i).transpose() - q.point).norm() < radius) {
                separated = false;
                break;
            }
        }
        if (!separated) continue;
        picked.push_back({x.row(i).transpose(), slope[i]});
        if (picked.size() == count) break;
    }
    if (picked.size() < count) {
        throw std::runtime_error(
            "knn_slope_2d: separation radius exhausted the candidates before K points");
    }
    return picked;
}

}  // namespace dacd
