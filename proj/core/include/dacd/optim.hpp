#pragma once

#include "dacd/types.hpp"

#include <functional>

namespace dacd {

/// Objective callback: returns f(x) and fills grad (same size as x).
/// May throw; a throw during a line search is treated as an infeasible
/// trial point, a throw at the start point propagates.
using ObjectiveFn = std::function<double(const Vec&, Vec&)>;

struct LbfgsOptions {
    int max_iterations = 200;
    double gradient_tolerance = 1e-6;  // on the projected gradient norm
    int memory = 10;
    int max_line_search_steps = 40;
};

struct LbfgsResult {
    Vec x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Box-constrained L-BFGS with backtracking line search. Iterates are kept
/// inside [lower, upper] by projection; convergence is declared on the
/// norm of the projected gradient step.
LbfgsResult minimize_lbfgs_box(const ObjectiveFn& objective, Vec x0,
                               const Vec& lower, const Vec& upper,
                               const LbfgsOptions& options = {});

}  // namespace dacd
