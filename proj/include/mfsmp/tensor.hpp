#pragma once

// ===== Dense value tensors =====
//
// Flat-storage containers for trajectory data.  Index order is fixed across
// the library: j = outer observation path, i = inner particle, k = time node.
// The last index is contiguous so per-sample time sweeps are cache friendly.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mfsmp {

/// Matrix indexed (j, k).
class Tensor2 {
public:
    Tensor2() = default;
    Tensor2(std::size_t n0, std::size_t n1, double fill = 0.0)
        : n0_(n0), n1_(n1), data_(n0 * n1, fill) {}

    double& operator()(std::size_t a, std::size_t b) { return data_[a * n1_ + b]; }
    double operator()(std::size_t a, std::size_t b) const { return data_[a * n1_ + b]; }

    /// Contiguous row a, length dim1().
    std::span<double> row(std::size_t a) { return {data_.data() + a * n1_, n1_}; }
    std::span<const double> row(std::size_t a) const { return {data_.data() + a * n1_, n1_}; }

    std::size_t dim0() const { return n0_; }
    std::size_t dim1() const { return n1_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t n0_ = 0;
    std::size_t n1_ = 0;
    std::vector<double> data_;
};

/// Rank-3 tensor indexed (j, i, k).
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t n0, std::size_t n1, std::size_t n2, double fill = 0.0)
        : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, fill) {}

    double& operator()(std::size_t a, std::size_t b, std::size_t c) {
        return data_[(a * n1_ + b) * n2_ + c];
    }
    double operator()(std::size_t a, std::size_t b, std::size_t c) const {
        return data_[(a * n1_ + b) * n2_ + c];
    }

    /// Contiguous time series of sample (a, b), length dim2().
    std::span<double> series(std::size_t a, std::size_t b) {
        return {data_.data() + (a * n1_ + b) * n2_, n2_};
    }
    std::span<const double> series(std::size_t a, std::size_t b) const {
        return {data_.data() + (a * n1_ + b) * n2_, n2_};
    }

    std::size_t dim0() const { return n0_; }
    std::size_t dim1() const { return n1_; }
    std::size_t dim2() const { return n2_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t n0_ = 0;
    std::size_t n1_ = 0;
    std::size_t n2_ = 0;
    std::vector<double> data_;
};

/// Sample mean of a span.
inline double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty span");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Standard error of the sample mean.
inline double stderr_of(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double var = ss / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
}

}  // namespace mfsmp
