#include "dacd/acquisition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dacd {

namespace {

constexpr double kSigmaFloor = 1e-12;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string format_param(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::string AcquisitionSpec::str() const {
    std::string out;
    switch (kind) {
        case AcquisitionKind::PI: out = "pi:" + format_param(xi); break;
        case AcquisitionKind::EI: out = "ei:" + format_param(xi); break;
        case AcquisitionKind::UCB: out = "ucb:" + format_param(lambda); break;
        case AcquisitionKind::Random: out = "random"; break;
    }
    if (mode == SignalMode::Signed) out += ":signed";
    return out;
}

void AcquisitionSpec::validate() const {
    if (xi < 0.0 || lambda < 0.0 || !std::isfinite(xi) || !std::isfinite(lambda)) {
        throw std::invalid_argument("AcquisitionSpec: xi and lambda must be >= 0");
    }
}

AcquisitionSpec parse_acquisition(std::string_view text) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in{std::string(text)};
    while (std::getline(in, token, ':')) parts.push_back(token);
    if (parts.empty()) {
        throw std::invalid_argument("parse_acquisition: empty specification");
    }

    AcquisitionSpec spec;
    const std::string kind = lower(parts[0]);
    std::size_t next = 1;
    if (kind == "random") {
        spec.kind = AcquisitionKind::Random;
    } else {
        if (parts.size() < 2) {
            throw std::invalid_argument("parse_acquisition: '" + std::string(text) +
                                        "' needs a parameter, e.g. ei:0.001");
        }
        double value;
        try {
            std::size_t used = 0;
            value = std::stod(parts[1], &used);
            if (used != parts[1].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument("parse_acquisition: bad parameter '" + parts[1] + "'");
        }
        if (kind == "pi") {
            spec.kind = AcquisitionKind::PI;
            spec.xi = value;
        } else if (kind == "ei") {
            spec.kind = AcquisitionKind::EI;
            spec.xi = value;
        } else if (kind == "ucb") {
            spec.kind = AcquisitionKind::UCB;
            spec.lambda = value;
        } else {
            throw std::invalid_argument("parse_acquisition: unknown kind '" + kind + "'");
        }
        next = 2;
    }
    if (parts.size() > next) {
        const std::string mode = lower(parts[next]);
        if (mode == "signed") {
            spec.mode = SignalMode::Signed;
        } else if (mode == "absolute") {
            spec.mode = SignalMode::Absolute;
        } else {
            throw std::invalid_argument("parse_acquisition: unknown mode '" + mode + "'");
        }
        ++next;
    }
    if (parts.size() > next) {
        throw std::invalid_argument("parse_acquisition: trailing tokens in '" +
                                    std::string(text) + "'");
    }
    spec.validate();
    return spec;
}

Vec acquisition_signal(const PosteriorSlice& slice, SignalMode mode) {
    if (slice.dim() == 1) {
        return mode == SignalMode::Absolute ? slice.dmean.col(0).cwiseAbs().eval()
                                            : slice.dmean.col(0).eval();
    }
    return slice.dmean.rowwise().norm();
}

Vec derivative_scale(const PosteriorSlice& slice) {
    return slice.dvar.rowwise().sum().cwiseMax(0.0).cwiseSqrt();
}

double incumbent(const PosteriorSlice& slice,
                 const std::vector<std::size_t>& sampled_indices, SignalMode mode) {
    if (sampled_indices.empty()) {
        throw std::invalid_argument("incumbent: sampled index set is empty");
    }
    const Vec signal = acquisition_signal(slice, mode);
    double best = -std::numeric_limits<double>::infinity();
    for (const std::size_t idx : sampled_indices) {
        if (idx >= static_cast<std::size_t>(signal.size())) {
            throw std::out_of_range("incumbent: sampled index outside the grid");
        }
        best = std::max(best, signal[static_cast<Eigen::Index>(idx)]);
    }
    return best;
}

Vec score(const PosteriorSlice& slice, const AcquisitionSpec& spec, double incumbent_value) {
    spec.validate();
    const Vec signal = acquisition_signal(slice, spec.mode);
    const Vec sigma = derivative_scale(slice);
    const Eigen::Index n = signal.size();
    Vec out(n);

    switch (spec.kind) {
        case AcquisitionKind::UCB:
            out = signal + spec.lambda * sigma;
            break;
        case AcquisitionKind::PI:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double gap = signal[i] - incumbent_value - spec.xi;
                out[i] = sigma[i] <= kSigmaFloor ? (gap > 0.0 ? 1.0 : 0.0)
                                                 : normal_cdf(gap / sigma[i]);
            }
            break;
        case AcquisitionKind::EI:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double gap = signal[i] - incumbent_value - spec.xi;
                if (sigma[i] <= kSigmaFloor) {
                    out[i] = std::max(gap, 0.0);
                } else {
                    const double gamma = gap / sigma[i];
                    out[i] = std::max(
                        sigma[i] * (gamma * normal_cdf(gamma) + normal_pdf(gamma)), 0.0);
                }
            }
            break;
        case AcquisitionKind::Random:
            throw std::invalid_argument("score: Random has no acquisition surface");
    }
    return out;
}

std::size_t select_next(const PosteriorSlice& slice, const AcquisitionSpec& spec,
                        const std::vector<bool>& sampled_mask) {
    const Eigen::Index n = slice.size();
    if (sampled_mask.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("select_next: mask size mismatch");
    }
    std::vector<std::size_t> sampled;
    for (std::size_t i = 0; i < sampled_mask.size(); ++i) {
        if (sampled_mask[i]) sampled.push_back(i);
    }
    const double inc = (spec.kind == AcquisitionKind::PI || spec.kind == AcquisitionKind::EI)
                           ? incumbent(slice, sampled, spec.mode)
                           : 0.0;
    const Vec values = score(slice, spec, inc);

    bool found = false;
    std::size_t best_index = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sampled_mask[static_cast<std::size_t>(i)]) continue;
        if (!found || values[i] > best_value) {
            found = true;
            best_value = values[i];
            best_index = static_cast<std::size_t>(i);
        }
    }
    if (!found) {
        throw std::runtime_error("select_next: query budget exhausted, every grid index sampled");
    }
    return best_index;
}

}  // namespace dacd
