// ===== Experiment configuration =====
//
// Plain-text experiment description: [section] headers with key = value
// lines.  Parsing applies the named preset's defaults first, then file
// overrides, and rejects unknown keys.  serialize_config emits a canonical
// full form whose reparse reproduces the config exactly.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfsmp/coefficients.hpp"
#include "mfsmp/time_grid.hpp"

namespace mfsmp {

/// Parameters of the built-in coefficient family.  With m1 the mean and m2
/// the second moment of the measure argument:
///   sigma = s0 + su*u + sm*m1 + sv*m2                     (x-free)
///   h     = hc + hx*x + hm*m1 + hv*m2 + phi(x)*(g0 + gu*u + gm*m1)
///   f     = fu*(u - ustar)^2 + fx1*x + fx2*x^2 + fxm*x*m1 + fm2*m1^2 + fv*m2
///   Phi   = px*x + px2*x^2 + pm2*m1^2 + pv*m2
/// phi_kind selects the bounded factor phi: zero, one, identity, or tanh.
struct InlineCoefficients {
    double s0 = 0.0, su = 0.0, sm = 0.0, sv = 0.0;
    double hc = 0.0, hx = 0.0, hm = 0.0, hv = 0.0;
    std::string phi_kind = "zero";
    double g0 = 0.0, gu = 0.0, gm = 0.0;
    double fu = 0.0, ustar = 0.0, fx1 = 0.0, fx2 = 0.0, fxm = 0.0, fm2 = 0.0, fv = 0.0;
    double px = 0.0, px2 = 0.0, pm2 = 0.0, pv = 0.0;
    double x0 = 1.0;

    bool operator==(const InlineCoefficients&) const = default;
};

struct ExperimentConfig {
    std::string id = "mfsmp";
    std::string preset = "smp-reference";
    FilterMode mode = FilterMode::ConditionalLaw;
    std::string output = "out";

    TimeGrid grid{1.0, 64};
    std::size_t M_outer = 64;
    std::size_t N_inner = 128;
    std::uint64_t seed = 7;

    std::vector<double> eps_ladder{0.2, 0.1, 0.05, 0.025};
    double spike_t0 = 0.5;
    double spike_alt = 0.5;

    std::vector<double> U_set{0.0, 0.5};
    std::size_t blocks = 4;
    std::vector<std::size_t> base_policy;  ///< per-block indices; empty = brute-force

    double picard_tol = 1e-3;
    std::size_t picard_max_iter = 25;
    double tol_smp = 0.02;
    double ridge = 1e-8;

    InlineCoefficients coeffs;

    bool operator==(const ExperimentConfig&) const = default;

    /// Enforces the documented invariants; throws with the offending key name.
    void validate() const;
};

/// Parses config text.  Unknown keys, malformed numbers and invariant
/// violations raise std::invalid_argument naming the key and line.
ExperimentConfig parse_config(const std::string& text);

/// Canonical full-form text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace mfsmp
