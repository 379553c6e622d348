#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mdsgnn/tape.hpp"

namespace mdsgnn {

struct GradCheckReport {
    double max_rel_err = 0.0;
    int arg = -1;    // input the worst coordinate belongs to
    int index = -1;  // flat offset within that input
    double analytic = 0.0;  // both sides at that coordinate
    double fd = 0.0;
};

// Central finite differences against the tape's analytic gradient.
// build must be deterministic (fixed rng construction inside, dropout off)
// and return a 1x1 loss built from the supplied leaves.
// Relative error per coordinate: |analytic - fd| / max(1, |fd|).
GradCheckReport grad_check(
    const std::function<Tensor(Tape&, const std::vector<Tensor>&)>& build,
    const std::vector<Matrix>& inputs, double eps = 1e-5);

}  // namespace mdsgnn
