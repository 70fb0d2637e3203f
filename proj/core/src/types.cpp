#include "dacd/types.hpp"

#include <cmath>
#include <cstdio>

namespace dacd {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined state
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SampleSet::SampleSet(Mat inputs, Vec targets)
    : inputs_(std::move(inputs)), targets_(std::move(targets)) {
    if (inputs_.rows() != targets_.size()) {
        throw std::invalid_argument("SampleSet: inputs and targets must have equal length");
    }
    for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < inputs_.rows(); ++j) {
            if (inputs_.row(i) == inputs_.row(j)) {
                throw std::invalid_argument("SampleSet: duplicate input points");
            }
        }
    }
}

void SampleSet::append(const Vec& x, double y) {
    if (!x.allFinite() || !std::isfinite(y)) {
        throw std::invalid_argument("SampleSet::append: non-finite sample");
    }
    if (inputs_.rows() == 0) {
        inputs_.resize(1, x.size());
        inputs_.row(0) = x.transpose();
        targets_.resize(1);
        targets_(0) = y;
        return;
    }
    if (x.size() != inputs_.cols()) {
        throw std::invalid_argument("SampleSet::append: dimension mismatch");
    }
    for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
        if (inputs_.row(i).transpose() == x) {
            throw std::invalid_argument("SampleSet::append: duplicate input point");
        }
    }
    const Eigen::Index n = inputs_.rows();
    inputs_.conservativeResize(n + 1, Eigen::NoChange);
    inputs_.row(n) = x.transpose();
    targets_.conservativeResize(n + 1);
    targets_(n) = y;
}

double SampleSet::target_mean() const {
    if (targets_.size() == 0) return 0.0;
    return targets_.mean();
}

double SampleSet::target_std() const {
    const Eigen::Index n = targets_.size();
    if (n == 0) return 0.0;
    const double m = targets_.mean();
    return std::sqrt((targets_.array() - m).square().sum() / static_cast<double>(n));
}

double SampleSet::domain_length() const {
    if (inputs_.rows() == 0) return 0.0;
    const Vec lo = inputs_.colwise().minCoeff();
    const Vec hi = inputs_.colwise().maxCoeff();
    return (hi - lo).norm();
}

Mat linspace_grid(double lo, double hi, Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("linspace_grid: n must be >= 1");
    Mat grid(n, 1);
    grid.col(0) = Vec::LinSpaced(n, lo, hi);
    return grid;
}

}  // namespace dacd
