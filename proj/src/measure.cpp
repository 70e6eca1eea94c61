#include "mfsmp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mfsmp {

namespace {

void check_finite(std::span<const double> xs, const char* what) {
    for (double x : xs)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::span<const double> atoms) {
    if (atoms.empty()) throw std::invalid_argument("EmpiricalMeasure: empty sample set");
    check_finite(atoms, "EmpiricalMeasure atoms");
    std::vector<double> sorted(atoms.begin(), atoms.end());
    std::sort(sorted.begin(), sorted.end());
    const double w = 1.0 / static_cast<double>(sorted.size());
    for (double a : sorted) {
        if (!atoms_.empty() && atoms_.back() == a) {
            weights_.back() += w;
        } else {
            atoms_.push_back(a);
            weights_.push_back(w);
        }
    }
    finalize_moments();
}

EmpiricalMeasure::EmpiricalMeasure(std::span<const double> atoms,
                                   std::span<const double> weights) {
    if (atoms.empty()) throw std::invalid_argument("EmpiricalMeasure: empty sample set");
    if (atoms.size() != weights.size())
        throw std::invalid_argument("EmpiricalMeasure: atom/weight length mismatch");
    check_finite(atoms, "EmpiricalMeasure atoms");
    check_finite(weights, "EmpiricalMeasure weights");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("EmpiricalMeasure: negative weight");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("EmpiricalMeasure: degenerate density, all weights zero");

    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
    for (std::size_t idx : order) {
        const double w = weights[idx] / total;
        if (w == 0.0) continue;
        if (!atoms_.empty() && atoms_.back() == atoms[idx]) {
            weights_.back() += w;
        } else {
            atoms_.push_back(atoms[idx]);
            weights_.push_back(w);
        }
    }
    // All-zero survivors are impossible here: total > 0 implies one positive weight.
    finalize_moments();
}

EmpiricalMeasure EmpiricalMeasure::dirac(double x) {
    const double atom[] = {x};
    return EmpiricalMeasure(atom);
}

void EmpiricalMeasure::finalize_moments() {
    mean_ = 0.0;
    second_ = 0.0;
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
        mean_ += weights_[n] * atoms_[n];
        second_ += weights_[n] * atoms_[n] * atoms_[n];
    }
}

double EmpiricalMeasure::integrate(const std::function<double(double)>& g) const {
    double s = 0.0;
    for (std::size_t n = 0; n < atoms_.size(); ++n) s += weights_[n] * g(atoms_[n]);
    return s;
}

double wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    // W1 = integral over x of |F_a(x) - F_b(x)|, piecewise constant between
    // merged atom positions.
    const auto& xa = a.atoms();
    const auto& xb = b.atoms();
    std::size_t ia = 0, ib = 0;
    double fa = 0.0, fb = 0.0;
    double dist = 0.0;
    bool have_prev = false;
    double prev = 0.0;
    while (ia < xa.size() || ib < xb.size()) {
        double x;
        if (ib >= xb.size() || (ia < xa.size() && xa[ia] < xb[ib])) {
            x = xa[ia];
        } else if (ia >= xa.size() || xb[ib] < xa[ia]) {
            x = xb[ib];
        } else {
            x = xa[ia];
        }
        if (have_prev) dist += std::abs(fa - fb) * (x - prev);
        while (ia < xa.size() && xa[ia] == x) fa += a.weights()[ia++];
        while (ib < xb.size() && xb[ib] == x) fb += b.weights()[ib++];
        prev = x;
        have_prev = true;
    }
    return dist;
}

EmpiricalMeasure weighted_law(std::span<const double> values,
                              std::span<const double> weights) {
    return EmpiricalMeasure(values, weights);
}

double conditional_ratio(std::span<const double> numerator,
                         std::span<const double> density) {
    if (numerator.empty() || numerator.size() != density.size())
        throw std::invalid_argument("conditional_ratio: empty or mismatched inputs");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < numerator.size(); ++i) {
        num += numerator[i] * density[i];
        den += density[i];
    }
    const double n = static_cast<double>(numerator.size());
    num /= n;
    den /= n;
    if (!(den >= 1e-300))
        throw std::runtime_error("conditional_ratio: density mean underflow");
    return num / den;
}

double theta_one(std::span<const double> zeta, std::span<const double> eta,
                 std::span<const double> x, std::span<const double> l) {
    const std::size_t n = zeta.size();
    if (n == 0 || eta.size() != n || x.size() != n || l.size() != n)
        throw std::invalid_argument("theta_one: empty or mismatched inputs");
    double m_mix = 0.0, m_l = 0.0, m_lx = 0.0, m_eta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m_mix += l[i] * zeta[i] + x[i] * eta[i];
        m_l += l[i];
        m_lx += l[i] * x[i];
        m_eta += eta[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    m_mix *= inv_n;
    m_l *= inv_n;
    m_lx *= inv_n;
    m_eta *= inv_n;
    if (!(m_l >= 1e-300))
        throw std::runtime_error("theta_one: density mean underflow");
    return m_mix / m_l - m_lx * m_eta / (m_l * m_l);
}

}  // namespace mfsmp
