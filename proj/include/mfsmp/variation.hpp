#pragma once

// ===== Variational systems along a spike =====
//
// First- and second-order expansions of (X, L, U) in the window length of a
// needle perturbation of the control, and the ladder diagnostic measuring the
// Taylor residual orders against the perturbed forward system.

#include <vector>

#include "mfsmp/coefficients.hpp"
#include "mfsmp/control.hpp"
#include "mfsmp/forward.hpp"
#include "mfsmp/noise.hpp"
#include "mfsmp/tensor.hpp"

namespace mfsmp {

/// First- and second-order variational processes.  Y*/K* are per sample,
/// V* per outer path; in StateFunctional mode the per-sample filter
/// variations V*_sample are also kept (V* then stores their density-weighted
/// inner means).
struct VariationState {
    Tensor3 Y1, K1;  // (j, i, k)
    Tensor2 V1;      // (j, k)
    Tensor3 V1_sample;
    Tensor3 Y2, K2;
    Tensor2 V2;
    Tensor3 V2_sample;
    SpikeSpec spike;
    double eps = 0.0;
    /// Window length actually covered by grid nodes (multiple of dt).
    double eps_effective = 0.0;
};

/// Solve the first-order system along the base forward solution.  The steps
/// are the exact window-length derivatives of the discrete forward scheme:
/// additive for the state, multiplicative through the stored density ratio
/// for the log-space density step (runs that select the literal density
/// scheme are scheme comparisons only).  Mean-field cross terms average over
/// the full ensemble as the independent copy and differentiate the normalized
/// weighted law exactly.  forcing_scale multiplies the window forcing terms
/// and exists for linearity checks only.
VariationState solve_first_variation(const CoefficientSet& coeffs, const ForwardState& forward,
                                     const ControlPolicy& control, const SpikeSpec& spike,
                                     const NoisePlan& plan, double forcing_scale = 1.0);

/// Solve the second-order system on top of a first-order solution computed
/// with the same plan, and assemble the second-order filter variation.
VariationState solve_second_variation(const CoefficientSet& coeffs, const ForwardState& forward,
                                      const ControlPolicy& control, const SpikeSpec& spike,
                                      const NoisePlan& plan, const VariationState& first,
                                      double forcing_scale = 1.0);

/// Residual magnitudes and fitted orders across a window-length ladder.
/// e0 = no correction, e1 = first-order correction, e2 = both corrections;
/// each entry is the RMS over paths of the worst-node residual.
struct TaylorReport {
    std::vector<double> eps_nominal;
    std::vector<double> eps_effective;
    std::vector<double> e0_X, e1_X, e2_X;
    std::vector<double> e0_L, e1_L, e2_L;
    std::vector<double> e0_U, e1_U, e2_U;
    /// Bounded-pair smallness constant per rung:
    /// max_k |mean(Y1) + mean(K1/L)| / sqrt(eps).
    std::vector<double> smallness;
    /// Filter-composite constant per rung:
    /// RMS sup_k |U-residual - theta(X-residual, L-residual)| / eps^1.4.
    std::vector<double> composite;
    /// Log-log slopes of e0/e1/e2 against effective window length.
    double slope_e0_X = 0, slope_e1_X = 0, slope_e2_X = 0;
    double slope_e0_L = 0, slope_e1_L = 0, slope_e2_L = 0;
    double slope_e0_U = 0, slope_e1_U = 0, slope_e2_U = 0;
};

/// Run the ladder: for each window length, solve the perturbed forward system
/// under the spiked control with common random numbers, solve both
/// variational systems, and fit residual orders.
TaylorReport taylor_orders(const CoefficientSet& coeffs, const ControlPolicy& control,
                           double spike_t0, const ControlPolicy& spike_alt,
                           const std::vector<double>& eps_ladder, const NoisePlan& plan,
                           double picard_tol = 1e-3, std::size_t max_iter = 25);

}  // namespace mfsmp
