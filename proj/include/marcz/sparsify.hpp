#pragma once

#include "marcz/discretize.hpp"
#include "marcz/space.hpp"

#include <optional>
#include <vector>

namespace marcz {

/// One step of the two-barrier potential method: barrier positions and the
/// spectral extremes of the accumulator after the step.
struct BarrierStep {
    int step = 0;
    int chosen = 0;       ///< candidate index selected
    double t = 0.0;       ///< weight added to the chosen rank-one term
    double l_bar = 0.0;   ///< lower barrier after the shift
    double u_bar = 0.0;   ///< upper barrier after the shift
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

using BssTrace = std::vector<BarrierStep>;

/// Deterministic weighted subselection for p = 2: runs ceil(bN) steps of the
/// barrier-potential method on candidate vectors v_j = sqrt(mass_j) u(x_j)
/// (mass from start_plan weights, or the measure when absent). Requires
/// sum_j v_j v_j^T = I within 1e-8. The output has at most ceil(bN) atoms,
/// is rescaled so the exact eigen certificate gives C1 = 1, and satisfies
/// C2/C1 <= (b + 1 + 2 sqrt(b)) / (b + 1 - 2 sqrt(b)).
SamplePlan bss_select(const Subspace& sub, double b,
                      const SamplePlan* start_plan = nullptr,
                      BssTrace* trace = nullptr, bool allow_large_b = false);

/// The spectral-ratio guarantee of the barrier method at oversampling b.
double bss_ratio_bound(double b);

}  // namespace marcz
