// ===== Maximum principle =====
//
// Hamiltonian evaluation, the observation-window process h(s,t), the M and R
// correction trajectories, the conditional inequality scan over a finite set
// of candidate control points, and a brute-force control oracle.

#pragma once

#include <cstddef>
#include <vector>

#include "mfsmp/adjoint.hpp"
#include "mfsmp/coefficients.hpp"
#include "mfsmp/control.hpp"
#include "mfsmp/forward.hpp"
#include "mfsmp/noise.hpp"
#include "mfsmp/tensor.hpp"
#include "mfsmp/variation.hpp"

namespace mfsmp {

/// Which form of the inequality is scanned.
enum class ScanVariant {
    Main,      ///< gap = E[dH + (P1/2 + M) dsigma^2 + R dh1^2 | observations]
    Appendix,  ///< gap = E[dH + (P1/2) dsigma^2 | observations]
};

/// Pointwise Hamiltonian sigma*q1 + h*l*q2 - f. Expects l > 0.
double hamiltonian(double t, double x, double l, const EmpiricalMeasure& mu, double v,
                   double q1, double q2, const CoefficientSet& coeffs);

/// Per-sample window process h(s,t) = int_s^t h_x dY - int_s^t h*h_x dr with
/// left-endpoint sums over grid nodes [s_index, t_index). Result is (M, N).
Tensor2 h_window(const CoefficientSet& coeffs, const ForwardState& forward,
                 const ControlPolicy& control, const NoisePlan& plan, std::size_t s_index,
                 std::size_t t_index);

/// M and R trajectories per (outer path, node), with the fit quality of the
/// observation-feature regression used to condition on time-k information.
struct MRResult {
    Tensor2 M;
    Tensor2 R;
    std::vector<double> r2_M;
    std::vector<double> r2_R;
};

/// Assembles the M and R correction processes from the first-order adjoint.
/// Requires conditional-law mode with x-free sigma and the split observation
/// drift h = h0 + phi*h1.
MRResult compute_MR(const CoefficientSet& coeffs, const ForwardState& forward,
                    const AdjointState& first_adjoint, const ControlPolicy& control,
                    const NoisePlan& plan);

/// Result of the candidate-control inequality scan.
struct SMPReport {
    std::vector<double> candidates;  ///< scanned control points, in input order
    Tensor2 gap;                     ///< (candidate, node): weighted mean over paths
    Tensor2 gap_se;                  ///< matching spread-over-paths standard error
    Tensor2 gap_max;                 ///< (candidate, node): worst single path
    Tensor2 M;                       ///< (path, node), zero in appendix variant
    Tensor2 R;                       ///< (path, node), zero in appendix variant
    Tensor3 Gamma1;                  ///< L / E[L | observations], positive
    Tensor3 Gamma;                   ///< (X - U) / E[L | observations]
    std::vector<double> r2_M;
    std::vector<double> r2_R;
    double verdict = 0.0;            ///< max over (candidate, node) of gap
    double verdict_se = 0.0;         ///< standard error at the arg max
    std::size_t argmax_candidate = 0;
    std::size_t argmax_node = 0;
    ScanVariant variant = ScanVariant::Main;
    bool has_duality = false;
    DualityReport duality{};
    bool has_taylor = false;
    TaylorReport taylor{};
};

/// Scans the inequality over the candidate control points at every node.
/// Candidates must come from the policy's admissible set; the gap at the
/// policy's own value is exactly zero by construction.
SMPReport smp_scan(const CoefficientSet& coeffs, const ForwardState& forward,
                   const AdjointState& adjoint, const ControlPolicy& control,
                   const NoisePlan& plan, const std::vector<double>& candidates,
                   ScanVariant variant);

/// Exhaustive search over constant-per-block deterministic policies.
struct BruteForceResult {
    ControlPolicy policy;             ///< argmin policy
    std::vector<std::size_t> choice;  ///< per-block index into U_set
    std::vector<double> costs;        ///< full cost table, lexicographic order
    std::vector<double> cost_se;      ///< per-entry outer-path standard error
    std::size_t best_index = 0;
    double best_cost = 0.0;
    double best_cost_se = 0.0;
};

/// Evaluates every |U_set|^blocks block-constant policy under the common
/// noise plan and returns the cheapest, breaking ties toward the lowest
/// lexicographic choice vector. The search space is capped at 4096 policies.
BruteForceResult brute_force_control(const CoefficientSet& coeffs, const NoisePlan& plan,
                                     const std::vector<double>& U_set, std::size_t blocks,
                                     double picard_tol = 1e-3, std::size_t max_iter = 25);

}  // namespace mfsmp
