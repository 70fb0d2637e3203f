#pragma once

#include "dacd/types.hpp"

#include <cstddef>
#include <vector>

namespace dacd {

/// Filtered-derivative trace D(k, A) for k in [A, n - A]:
/// mean of the width-A window right of k minus mean of the window left of k.
struct FilteredTrace {
    std::vector<double> values;  // values[i] = D(first_k + i, A)
    std::size_t first_k = 0;     // == A
    std::size_t window = 0;      // A

    std::size_t size() const { return values.size(); }
    double at_k(std::size_t k) const { return values.at(k - first_k); }
    std::size_t last_k() const { return first_k + values.size() - 1; }
};

/// O(n) running-sum evaluation; throws when n < 2A + 1.
FilteredTrace filtered_derivative(const Vec& series, std::size_t window);

/// argmax_k |D(k, A)|, smallest k on ties.
std::size_t estimate_single(const Vec& series, std::size_t window);

/// Argmax-then-suppress extraction of `count` change points. Suppression
/// zeroes |D| within 2A of each detected point, which keeps reported points
/// pairwise >= 2A apart (the method assumes true change points are at least
/// that far apart). Throws when the valid range cannot host `count` points.
std::vector<std::size_t> estimate_mcp(const Vec& series, std::size_t window, std::size_t count);

struct DetectionResult {
    FilteredTrace trace;
    std::vector<std::size_t> indices;    // ascending
    std::vector<double> locations;       // grid[index]
    std::size_t window = 0;
};

/// Full 1-D detection on a gridded series; locations are read off `grid`.
DetectionResult detect_changepoints(const Vec& series, const Vec& grid,
                                    std::size_t window, std::size_t count);

/// 2-D change localization: per sample, a least-squares plane over its
/// k nearest neighbors; the `count` points with the largest slope
/// magnitude survive, deduplicated by a minimum-separation radius of
/// 2x the median nearest-neighbor spacing.
struct SlopePoint {
    Vec point;
    double slope = 0.0;
};
std::vector<SlopePoint> knn_slope_2d(const SampleSet& samples,
                                     std::size_t k_neighbors,
                                     std::size_t count);

}  // namespace dacd
