#pragma once

// ===== Admissible controls =====
//
// Controls are observation-adapted: the policy sees the time and the observed
// path up to and including the current node, nothing later.  Values must come
// from a finite action set.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfsmp/time_grid.hpp"

namespace mfsmp {

/// Policy u(t, observed prefix) with values in a finite action set.
/// The prefix span holds the observed path at nodes 0..k when t = t_k.
struct ControlPolicy {
    std::vector<double> U_set;
    std::function<double(double, std::span<const double>)> u;

    void validate() const {
        if (U_set.empty()) throw std::invalid_argument("ControlPolicy: empty action set");
        if (!u) throw std::invalid_argument("ControlPolicy: missing policy function");
    }
};

/// Constant policy.
inline ControlPolicy constant_policy(std::vector<double> U_set, double value) {
    ControlPolicy p;
    p.U_set = std::move(U_set);
    p.u = [value](double, std::span<const double>) { return value; };
    return p;
}

/// Piecewise-constant policy on equal time blocks: block b covers
/// [b*T/blocks, (b+1)*T/blocks) and uses action U_set[choice[b]].
inline ControlPolicy block_policy(std::vector<double> U_set, std::vector<std::size_t> choice,
                                  double horizon) {
    if (choice.empty()) throw std::invalid_argument("block_policy: empty block choice");
    for (std::size_t c : choice)
        if (c >= U_set.size()) throw std::invalid_argument("block_policy: choice outside action set");
    ControlPolicy p;
    p.U_set = U_set;
    const std::size_t blocks = choice.size();
    p.u = [U_set = std::move(U_set), choice = std::move(choice), horizon,
           blocks](double t, std::span<const double>) {
        auto b = static_cast<std::size_t>(t / horizon * static_cast<double>(blocks));
        if (b >= blocks) b = blocks - 1;
        return U_set[choice[b]];
    };
    return p;
}

/// Needle perturbation window: on [t0, t0 + eps) the alternative policy is
/// used, elsewhere the base policy.  eps = 0 means no perturbation.
struct SpikeSpec {
    double t0 = 0.0;
    double eps = 0.0;
    ControlPolicy alt;

    void validate(const TimeGrid& grid) const {
        if (eps < 0.0) throw std::invalid_argument("SpikeSpec: negative window length");
        if (eps == 0.0) return;
        if (t0 < 0.0 || t0 >= grid.T || t0 + eps > grid.T)
            throw std::invalid_argument("SpikeSpec: window not contained in [0, T]");
        alt.validate();
    }

    bool covers(double t) const { return eps > 0.0 && t >= t0 && t < t0 + eps; }
};

/// Base policy overridden on the spike window.
inline ControlPolicy spike_control(const ControlPolicy& base, const SpikeSpec& spike) {
    base.validate();
    if (spike.eps == 0.0) return base;
    ControlPolicy p;
    p.U_set = base.U_set;
    for (double v : spike.alt.U_set)
        if (std::find(p.U_set.begin(), p.U_set.end(), v) == p.U_set.end()) p.U_set.push_back(v);
    p.u = [base_u = base.u, alt_u = spike.alt.u, t0 = spike.t0,
           t1 = spike.t0 + spike.eps](double t, std::span<const double> y) {
        return (t >= t0 && t < t1) ? alt_u(t, y) : base_u(t, y);
    };
    return p;
}

}  // namespace mfsmp
