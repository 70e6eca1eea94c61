#pragma once

// ===== Forward system under the reference measure =====
//
// Simulates the controlled state X and the likelihood density L per sample,
// builds the filtered state U and the flow of laws mu by fixed-point
// iteration, and cross-checks the filter against a direct Euler step of the
// filtering dynamics.

#include <string>
#include <vector>

#include "mfsmp/coefficients.hpp"
#include "mfsmp/control.hpp"
#include "mfsmp/measure.hpp"
#include "mfsmp/noise.hpp"
#include "mfsmp/tensor.hpp"

namespace mfsmp {

/// Converged forward solution.  All trajectories live on the plan's grid;
/// node count is K + 1.
struct ForwardState {
    Tensor3 X;  // (j, i, k)
    Tensor3 L;  // (j, i, k), strictly positive
    Tensor2 U;  // (j, k) filtered state per outer path
    /// StateFunctional mode only: per-sample filtered state (j, i, k).
    Tensor3 U_sample;
    std::vector<EmpiricalMeasure> mu;  // one law per node
    double cost = 0.0;
    std::size_t iterations = 0;
    std::vector<double> gap_history;  // law movement per iteration
    std::vector<std::string> warnings;
};

/// One Euler pass of (X, L) against a frozen flow of laws.  X uses an
/// explicit step with sigma * dB1; L is stepped in log space,
/// L_{k+1} = L_k * exp(h * dY - h^2 dt / 2), so positivity is structural.
/// With use_literal_density the product scheme L_{k+1} = L_k (1 + h dY) is
/// used instead, for scheme-comparison runs only.
struct ForwardPaths {
    Tensor3 X;
    Tensor3 L;
    std::vector<std::string> warnings;
};
ForwardPaths euler_forward_given_mu(const CoefficientSet& coeffs, const ControlPolicy& control,
                                    const NoisePlan& plan,
                                    const std::vector<EmpiricalMeasure>& mu_sequence,
                                    bool use_literal_density = false);

/// Fixed-point iteration on the flow of laws, starting from the point mass at
/// x0.  Stops when the laws move less than tol in worst-node 1-Wasserstein
/// distance; throws with the gap history if max_iter passes are exhausted.
ForwardState picard_forward(const CoefficientSet& coeffs, const ControlPolicy& control,
                            const NoisePlan& plan, double tol = 1e-3, std::size_t max_iter = 25,
                            bool use_literal_density = false);

/// Direct Euler pass of the filtering dynamics for the conditional mean,
/// using density-weighted inner averages for the conditional moments.
/// Returned per outer path and node.
Tensor2 fkk_filter(const CoefficientSet& coeffs, const ControlPolicy& control,
                   const ForwardState& forward, const NoisePlan& plan);

/// Worst-node law movement d_m for m = 1..iterations of the fixed-point map;
/// certifies geometric decay of the iteration.
std::vector<double> contraction_diagnostic(const CoefficientSet& coeffs,
                                           const ControlPolicy& control, const NoisePlan& plan,
                                           std::size_t iterations);

/// Policy evaluated on each outer path's observed prefix: entry (j, k) is the
/// action taken on [t_k, t_{k+1}).
Tensor2 control_values(const ControlPolicy& control, const Tensor2& y_paths,
                       const TimeGrid& grid);

}  // namespace mfsmp
