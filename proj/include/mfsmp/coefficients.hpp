#pragma once

// ===== Model coefficients =====
//
// Callback bundle describing one control problem: diffusion sigma, observation
// drift h, running cost f, terminal cost Phi, their state derivatives, and
// their measure derivatives.  Measure-derivative callbacks receive the live
// empirical measure plus the evaluation point y (and z for the second slot).
//
// Two filter conventions are supported.  ConditionalLaw feeds the filtered
// state through the conditional-mean ratio estimator; StateFunctional assumes
// the filtered state is a known pathwise map state_map(x, observed path).

#include <functional>
#include <span>
#include <stdexcept>

#include "mfsmp/measure.hpp"

namespace mfsmp {

enum class FilterMode { ConditionalLaw, StateFunctional };

/// sigma/h/f-style coefficient: (t, x, mu, u) -> value.
using CoeffFn = std::function<double(double, double, const EmpiricalMeasure&, double)>;
/// Measure derivative: (t, x, mu, u, y) -> value.
using CoeffMuFn = std::function<double(double, double, const EmpiricalMeasure&, double, double)>;
/// Second measure derivative: (t, x, mu, u, y, z) -> value.
using CoeffMuMuFn =
    std::function<double(double, double, const EmpiricalMeasure&, double, double, double)>;
/// Terminal cost: (x, mu) -> value.
using TerminalFn = std::function<double(double, const EmpiricalMeasure&)>;
using TerminalMuFn = std::function<double(double, const EmpiricalMeasure&, double)>;
using TerminalMuMuFn = std::function<double(double, const EmpiricalMeasure&, double, double)>;
/// Pathwise filter map for StateFunctional mode: (x, observed path prefix).
using StateMapFn = std::function<double(double, std::span<const double>)>;
/// Observation drift factor without x: (t, mu, u) -> value.
using DriftFactorFn = std::function<double(double, const EmpiricalMeasure&, double)>;
/// Scalar function of x.
using ScalarFn = std::function<double(double)>;

/// Full coefficient bundle.  Unset derivative callbacks are treated as
/// identically zero; the four base coefficients are required.
struct CoefficientSet {
    FilterMode mode = FilterMode::ConditionalLaw;
    double x0 = 0.0;

    CoeffFn sigma, h, f;
    TerminalFn Phi;

    CoeffFn sigma_x, sigma_xx, h_x, h_xx, f_x, f_xx;
    TerminalFn Phi_x, Phi_xx;

    CoeffMuFn sigma_mu, sigma_zmu, h_mu, h_zmu, f_mu, f_zmu;
    TerminalMuFn Phi_mu, Phi_zmu;
    CoeffMuMuFn sigma_mumu, h_mumu, f_mumu;
    TerminalMuMuFn Phi_mumu;

    /// Structural split h(t,x,mu,u) = h0(t,x,mu) + phi_h(x) * h1(t,mu,u),
    /// needed by the scan weights.  Optional otherwise.
    std::function<double(double, double, const EmpiricalMeasure&)> h0;
    ScalarFn phi_h, phi_h_x;
    DriftFactorFn h1;

    /// StateFunctional mode only: filter map and its x derivative.
    StateMapFn state_map, state_map_x;

    /// True when sigma has no x dependence; lets solvers drop sigma_x terms.
    bool sigma_x_is_zero = true;

    /// Soft magnitude bound used for the unboundedness warning.
    double bound = 1.0e3;

    bool has_h_split() const { return static_cast<bool>(h1) && static_cast<bool>(phi_h); }

    void validate() const {
        if (!sigma || !h || !f || !Phi)
            throw std::invalid_argument("CoefficientSet: sigma, h, f, Phi are required");
        if (mode == FilterMode::StateFunctional && (!state_map || !state_map_x))
            throw std::invalid_argument(
                "CoefficientSet: StateFunctional mode requires state_map and state_map_x");
    }
};

// Evaluate-or-zero helpers: absent callbacks mean the coefficient vanishes.
inline double eval(const CoeffFn& g, double t, double x, const EmpiricalMeasure& mu, double u) {
    return g ? g(t, x, mu, u) : 0.0;
}
inline double eval(const CoeffMuFn& g, double t, double x, const EmpiricalMeasure& mu, double u,
                   double y) {
    return g ? g(t, x, mu, u, y) : 0.0;
}
inline double eval(const TerminalFn& g, double x, const EmpiricalMeasure& mu) {
    return g ? g(x, mu) : 0.0;
}
inline double eval(const TerminalMuFn& g, double x, const EmpiricalMeasure& mu, double y) {
    return g ? g(x, mu, y) : 0.0;
}

}  // namespace mfsmp
