#pragma once

#include "dacd/gp.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace dacd {

enum class AcquisitionKind { PI, EI, UCB, Random };

/// Signal the acquisition maximizes: |dmean| by default so downward shifts
/// are targeted too; signed dmean retained for ablation. In D > 1 the
/// signal is the gradient-norm in both modes.
enum class SignalMode { Absolute, Signed };

struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::EI;
    double xi = 0.0;      // PI/EI exploration margin
    double lambda = 0.0;  // UCB trade-off
    SignalMode mode = SignalMode::Absolute;

    std::string str() const;
    void validate() const;
};

/// Parses the mini-grammar `kind:param[:signed|:absolute]`, e.g.
/// "ei:0.001", "pi:0.075:signed", "ucb:2", "random".
AcquisitionSpec parse_acquisition(std::string_view text);

/// The per-point acquisition signal g(x) derived from the derivative mean.
Vec acquisition_signal(const PosteriorSlice& slice, SignalMode mode);

/// sigma_grad(x) = sqrt(sum of the derivative-variance diagonal).
Vec derivative_scale(const PosteriorSlice& slice);

/// Best signal value among already-sampled grid locations; the improvement
/// baseline for PI/EI. Derivatives are never observed directly, so the
/// posterior derivative mean at sampled sites stands in.
double incumbent(const PosteriorSlice& slice,
                 const std::vector<std::size_t>& sampled_indices,
                 SignalMode mode);

/// Acquisition values on the whole grid. Where sigma_grad <= 1e-12 the
/// degenerate limits apply: PI becomes the indicator of g > incumbent + xi
/// and EI becomes max(g - incumbent - xi, 0).
Vec score(const PosteriorSlice& slice, const AcquisitionSpec& spec, double incumbent_value);

/// Unsampled grid index maximizing the score; smallest index on ties.
/// Throws if every index is already sampled. Not defined for Random.
std::size_t select_next(const PosteriorSlice& slice, const AcquisitionSpec& spec,
                        const std::vector<bool>& sampled_mask);

}  // namespace dacd
