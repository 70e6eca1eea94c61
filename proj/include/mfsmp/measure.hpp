#pragma once

// ===== Empirical measures on the real line =====
//
// One-dimensional atomic probability measures with sorted support, the exact
// 1-Wasserstein distance between them, and the weighted-sample constructor
// used to read a law off simulated particles.

#include <functional>
#include <span>
#include <vector>

namespace mfsmp {

/// Atomic probability measure with sorted atoms and strictly positive
/// weights summing to one.  Immutable after construction.
class EmpiricalMeasure {
public:
    /// Uniform weights over the given sample.
    explicit EmpiricalMeasure(std::span<const double> atoms);

    /// Weighted sample; weights are normalized, zero-weight atoms dropped,
    /// exactly coincident atoms merged.
    EmpiricalMeasure(std::span<const double> atoms, std::span<const double> weights);

    static EmpiricalMeasure dirac(double x);

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return atoms_.size(); }

    double min_atom() const { return atoms_.front(); }
    double max_atom() const { return atoms_.back(); }

    /// Integral of y against the measure.  Cached at construction: coefficient
    /// closures query moments per sample per step, so this must stay O(1).
    double mean() const { return mean_; }

    /// Integral of y^2 against the measure, cached like mean().
    double second_moment() const { return second_; }

    /// Quadrature helper: integral of g(y) against the measure.
    double integrate(const std::function<double(double)>& g) const;

    bool operator==(const EmpiricalMeasure&) const = default;

private:
    EmpiricalMeasure() = default;
    void finalize_moments();
    std::vector<double> atoms_;
    std::vector<double> weights_;
    double mean_ = 0.0;
    double second_ = 0.0;
};

/// Exact 1-Wasserstein distance via the merged-breakpoint CDF sweep.
double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Law of a weighted sample.  Throws on empty input, negative weights, or an
/// identically zero weight vector.
EmpiricalMeasure weighted_law(std::span<const double> values,
                              std::span<const double> weights);

/// Ratio estimator mean(numerator * density) / mean(density) for conditional
/// expectations under a change of density.  Throws when the mean density
/// underflows (below 1e-300).
double conditional_ratio(std::span<const double> numerator,
                         std::span<const double> density);

/// Filter-derivative functional of one inner ensemble:
///   mean(l*zeta + x*eta)/mean(l) - mean(l*x)*mean(eta)/mean(l)^2.
double theta_one(std::span<const double> zeta, std::span<const double> eta,
                 std::span<const double> x, std::span<const double> l);

}  // namespace mfsmp
