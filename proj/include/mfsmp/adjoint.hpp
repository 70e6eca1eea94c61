#pragma once

// ===== Adjoint systems =====
//
// Backward equations solved by backward Euler with least-squares conditional
// expectations: the first-order pair (p1, p2) with martingale integrands
// against both noises, and the second-order process P1 (plus the coupled P2
// in StateFunctional mode).

#include <vector>

#include "mfsmp/coefficients.hpp"
#include "mfsmp/control.hpp"
#include "mfsmp/forward.hpp"
#include "mfsmp/noise.hpp"
#include "mfsmp/regression.hpp"
#include "mfsmp/tensor.hpp"
#include "mfsmp/variation.hpp"

namespace mfsmp {

/// Adjoint processes per sample.  q* are the integrands against the driving
/// noise and qc* against the observation noise for p1; for p2 the roles are
/// mirrored (qc2 vs driving noise, q2 vs observation noise).  The scan reads
/// only (q1, q2); qc1 and qc2 are stored because the equations produce them.
struct AdjointState {
    Tensor3 p1, q1, qc1;
    Tensor3 p2, q2, qc2;
    Tensor3 P1, Q11, Q12;
    // StateFunctional mode second-order coupling.
    Tensor3 P2, Q21, Q22;
    // Per-step regression diagnostics.
    std::vector<double> r2_p1, r2_p2, r2_P1, r2_P2;
    // Largest change between generator fixed-point sweeps (should vanish).
    double sweep_delta = 0.0;
};

/// Solve the first-order adjoint pair backward from the terminal conditions.
/// spike_t0 >= 0 adds the running window indicator to the regression basis.
AdjointState solve_first_adjoint(const CoefficientSet& coeffs, const ForwardState& forward,
                                 const ControlPolicy& control, const NoisePlan& plan,
                                 double spike_t0 = -1.0, std::size_t sweeps = 2);

/// Solve the second-order adjoint on top of the first-order solution.
/// ConditionalLaw mode uses the conditional-expectation representation of P1;
/// StateFunctional mode steps the coupled (P1, P2) system with its
/// Q-coupling generator terms.
AdjointState solve_second_adjoint(const CoefficientSet& coeffs, const ForwardState& forward,
                                  const ControlPolicy& control, const AdjointState& first,
                                  const NoisePlan& plan, double spike_t0 = -1.0,
                                  std::size_t sweeps = 2);

/// Two independent evaluations of the first-order pairing identity:
/// terminal pairing of (p1, p2) with (Y1, K1) against the time integral of
/// the running-cost derivative terms plus the window term.
struct DualityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    double residual_over_eps = 0.0;
    double eps = 0.0;
    double eps_effective = 0.0;
};

DualityReport duality_check(const CoefficientSet& coeffs, const ForwardState& forward,
                            const VariationState& variation, const AdjointState& adjoint,
                            const ControlPolicy& control, const NoisePlan& plan);

}  // namespace mfsmp
