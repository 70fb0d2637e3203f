#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dacd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Deterministic sub-stream derivation: one base seed, many independent
/// generator seeds (splitmix64 over seed ^ tag).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Labeled observations accumulated by the sampling loop.
/// Inputs are rows of an N x D matrix; duplicate inputs are rejected.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(Mat inputs, Vec targets);

    void append(const Vec& x, double y);

    Eigen::Index size() const { return inputs_.rows(); }
    Eigen::Index dim() const { return inputs_.cols(); }
    bool empty() const { return inputs_.rows() == 0; }

    const Mat& inputs() const { return inputs_; }
    const Vec& targets() const { return targets_; }
    Vec input(Eigen::Index i) const { return inputs_.row(i).transpose(); }

    double target_mean() const;
    double target_std() const;

    /// Bounding-box diagonal of the inputs; zero for a single point.
    double domain_length() const;

private:
    Mat inputs_;   // N x D
    Vec targets_;  // N
};

/// Uniformly spaced 1-D grid as an n x 1 matrix, endpoints included.
Mat linspace_grid(double lo, double hi, Eigen::Index n);

/// A vector viewed as an n x 1 grid of 1-D points.
inline Mat as_column(const Vec& v) {
    Mat m(v.size(), 1);
    m.col(0) = v;
    return m;
}

/// 6 significant digits; the precision used by all delimited-text outputs.
std::string fmt6(double v);

/// Relative error with an absolute floor, for finite-difference checks.
inline double relative_error(double a, double b, double floor = 1e-8) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / scale;
}

}  // namespace dacd
