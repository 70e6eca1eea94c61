#pragma once

// ===== Measure-argument quadrature grid =====
//
// Fixed y-grid used for every measure-derivative integral: Chebyshev-spaced
// nodes spanning the atom range of the current law (widened to include 0 so
// integrals anchored at 0 stay inside the grid), linear interpolation, and
// trapezoid antiderivatives.  Projecting copy samples onto the grid with hat
// weights turns copy averages of interpolated antiderivatives into exact grid
// dot products.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace mfsmp {

class YGrid {
public:
    static constexpr std::size_t kPoints = 33;

    /// Grid spanning [min(0, lo), max(0, hi)].
    static YGrid span_with_zero(double lo, double hi) {
        YGrid g;
        const double a = lo < 0.0 ? lo : 0.0;
        const double b = hi > 0.0 ? hi : 0.0;
        g.y_.resize(kPoints);
        const double c = 0.5 * (a + b), r = 0.5 * (b - a);
        for (std::size_t n = 0; n < kPoints; ++n)
            g.y_[n] = c - r * std::cos(std::numbers::pi * static_cast<double>(n) /
                                       static_cast<double>(kPoints - 1));
        g.y_.front() = a;
        g.y_.back() = b;
        g.degenerate_ = !(b - a > 0.0);
        return g;
    }

    const std::vector<double>& nodes() const { return y_; }
    bool degenerate() const { return degenerate_; }

    /// Linear interpolation of nodal values at z, clamped to the grid range.
    double interp(std::span<const double> vals, double z) const {
        if (degenerate_) return vals.front();
        if (z <= y_.front()) return vals.front();
        if (z >= y_.back()) return vals.back();
        const std::size_t c = cell_of(z);
        const double w = (z - y_[c]) / (y_[c + 1] - y_[c]);
        return (1.0 - w) * vals[c] + w * vals[c + 1];
    }

    /// acc[g] += hat_g(z) * weight: the adjoint of interp, so that
    /// sum_g A[g] * acc[g] == sum over samples of interp(A, z) * weight.
    void hat_add(std::vector<double>& acc, double z, double weight) const {
        if (degenerate_) {
            acc.front() += weight;
            return;
        }
        if (z <= y_.front()) {
            acc.front() += weight;
            return;
        }
        if (z >= y_.back()) {
            acc.back() += weight;
            return;
        }
        const std::size_t c = cell_of(z);
        const double w = (z - y_[c]) / (y_[c + 1] - y_[c]);
        acc[c] += (1.0 - w) * weight;
        acc[c + 1] += w * weight;
    }

    /// Trapezoid antiderivative from the left grid edge.
    std::vector<double> cumtrapz(const std::vector<double>& f) const {
        std::vector<double> c(y_.size(), 0.0);
        for (std::size_t n = 1; n < y_.size(); ++n)
            c[n] = c[n - 1] + 0.5 * (f[n - 1] + f[n]) * (y_[n] - y_[n - 1]);
        return c;
    }

    /// Antiderivative anchored at 0: values of the integral from 0 to y_g.
    std::vector<double> antiderivative_from_zero(const std::vector<double>& f) const {
        std::vector<double> c = cumtrapz(f);
        const double at_zero = interp(c, 0.0);
        for (double& v : c) v -= at_zero;
        return c;
    }

private:
    std::size_t cell_of(double z) const {
        // Binary search for the cell with y_[c] <= z < y_[c+1].
        std::size_t lo = 0, hi = y_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (y_[mid] <= z)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    std::vector<double> y_;
    bool degenerate_ = false;
};

}  // namespace mfsmp
