#pragma once

// ===== Conditional expectations by least squares =====
//
// Conditional expectations given a finite-dimensional state are replaced by
// their projection onto a feature basis: fit ordinary least squares across the
// sample, read the fitted value per sample.  Falls back to a small ridge when
// the normal equations are numerically singular.

#include <span>
#include <vector>

#include "mfsmp/tensor.hpp"

namespace mfsmp {

struct RegressionResult {
    std::vector<double> coefficients;  // one per feature
    std::vector<double> fitted;        // one per sample
    double r_squared = 0.0;
};

/// Project targets onto the feature columns.  features is sample-major:
/// features[s] holds the feature row of sample s.  Throws when the sample
/// count does not exceed the feature count.
RegressionResult regress_conditional(std::span<const double> targets,
                                     const std::vector<std::vector<double>>& features,
                                     double ridge = 1e-8);

/// Feature row builders used by the backward solvers.

/// Observation basis {1, y, y^2, running max}: features of the observed path
/// at one node.
std::vector<double> observation_features(double y, double running_max);

/// Sample basis {1, x, l, u, x^2, x l, u^2, spike indicator}.
std::vector<double> sample_features(double x, double l, double u, double spike_indicator);

}  // namespace mfsmp
