// ===== Built-in presets =====
//
// Named default parameter sets for the coefficient family, and the bridge
// from a parsed config to a runnable CoefficientSet.

#pragma once

#include <string>
#include <vector>

#include "mfsmp/coefficients.hpp"
#include "mfsmp/config.hpp"

namespace mfsmp {

/// Names of the built-in presets, in documentation order:
/// zero-h, control-only-sigma, mean-feedback, linear-filtering, smp-reference.
const std::vector<std::string>& preset_names();

/// Overwrites the preset-controlled fields of the config (coefficients,
/// control set, blocks, spike) with the named preset's defaults.  The name
/// "inline" leaves everything untouched.  Unknown names throw.
void apply_preset(ExperimentConfig& config, const std::string& name);

/// Builds the callback bundle for the config's coefficient family.  Only
/// structurally nonzero derivatives are populated, so degenerate parameter
/// choices keep their exact zero short-circuits.
CoefficientSet make_coefficients(const ExperimentConfig& config);

}  // namespace mfsmp
