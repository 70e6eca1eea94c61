#include "mfsmp/variation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "mfsmp/parallel.hpp"
#include "mfsmp/quadrature.hpp"

namespace mfsmp {

namespace {

[[noreturn]] void throw_blowup(const char* where, std::size_t j, std::size_t i, std::size_t k) {
    std::ostringstream msg;
    msg << where << ": non-finite value at (j=" << j << ", i=" << i << ", k=" << k << ")";
    throw std::runtime_error(msg.str());
}

void check_dims(const ForwardState& fwd, const NoisePlan& plan, const char* where) {
    if (fwd.X.dim0() != plan.M_outer || fwd.X.dim1() != plan.N_inner ||
        fwd.X.dim2() != plan.grid.K + 1)
        throw std::invalid_argument(std::string(where) +
                                    ": forward state does not match the plan");
}

std::vector<char> window_nodes(const SpikeSpec& spike, const TimeGrid& grid) {
    std::vector<char> win(grid.K, 0);
    for (std::size_t k = 0; k < grid.K; ++k) win[k] = spike.covers(grid.node(k)) ? 1 : 0;
    return win;
}

double effective_eps(const std::vector<char>& win, double dt) {
    std::size_t n = 0;
    for (char c : win) n += c;
    return dt * static_cast<double>(n);
}

/// Nodal values and zero-anchored antiderivative of a measure-derivative
/// factor, evaluated once per sample at its own base arguments; pairings
/// against projected clouds are then grid dot products.  With difference set
/// the factor is fn(..., v; y) - fn(..., u; y).
struct NodalFactor {
    bool active = false;
    std::array<double, YGrid::kPoints> f{};
    std::array<double, YGrid::kPoints> a{};

    NodalFactor(const YGrid& grid, const CoeffMuFn& fn, double t, double x,
                const EmpiricalMeasure& mu, double u, double v, bool difference) {
        if (!fn) return;
        active = true;
        const auto& ys = grid.nodes();
        for (std::size_t g = 0; g < ys.size(); ++g)
            f[g] = difference ? fn(t, x, mu, v, ys[g]) - fn(t, x, mu, u, ys[g])
                              : fn(t, x, mu, u, ys[g]);
        a[0] = 0.0;
        for (std::size_t g = 1; g < ys.size(); ++g)
            a[g] = a[g - 1] + 0.5 * (f[g - 1] + f[g]) * (ys[g] - ys[g - 1]);
        const double at_zero = grid.interp(std::span<const double>(a.data(), a.size()), 0.0);
        for (std::size_t g = 0; g < ys.size(); ++g) a[g] -= at_zero;
    }

    double dot(const std::vector<double>& W) const {
        if (!active) return 0.0;
        double s = 0.0;
        for (std::size_t g = 0; g < W.size(); ++g) s += f[g] * W[g];
        return s;
    }
    double anti(const std::vector<double>& W) const {
        if (!active) return 0.0;
        double s = 0.0;
        for (std::size_t g = 0; g < W.size(); ++g) s += a[g] * W[g];
        return s;
    }
};

/// Shared per-node context for the copy averages.
struct CopyView {
    const CoefficientSet& co;
    const ForwardState& fwd;
    const Tensor2& u_base;
    std::size_t k;
    double t;

    bool state_functional() const { return co.mode == FilterMode::StateFunctional; }
    double y_slot(std::size_t j, std::size_t i) const {
        return state_functional() ? fwd.U_sample(j, i, k) : fwd.U(j, k);
    }
};

/// Hat-projection of a copy cloud onto the y-grid:
/// out[g] = (1/(MN)) * sum over copy samples of hat_g(y-slot) * weight(j, i).
/// Pairing a measure-derivative factor with these weights keeps the factor's
/// base arguments free, so each stepped sample can use its own state.
template <class Weight>
std::vector<double> project_cloud(const YGrid& grid, const CopyView& view, Weight&& weight) {
    const std::size_t M = view.fwd.X.dim0(), N = view.fwd.X.dim1();
    std::vector<double> out(YGrid::kPoints, 0.0);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i)
            grid.hat_add(out, view.y_slot(j, i), weight(j, i));
    const double inv = 1.0 / static_cast<double>(M * N);
    for (double& w : out) w *= inv;
    return out;
}

double cloud_sum(const std::vector<double>& W) {
    double s = 0.0;
    for (double w : W) s += w;
    return s;
}

/// Exact derivative of a coefficient's dependence on the empirical law.  The
/// law is the normalized weighted atom cloud, so the derivative is ratio
/// calculus on T[g] = (1/MN) sum of weight * g(atom) and S = T[1]: the flat
/// derivative (antiderivative of the measure-derivative factor) pairs with
/// weight clouds, the factor itself with transport clouds, and the S-terms
/// carry the normalization.
struct LawPairing {
    // First-order clouds: base weights L, weight variation K1, transport
    // L * V1; S0/S1 are their total masses.
    std::vector<double> LW, W1, VW1;
    double S0 = 1.0, S1 = 0.0;
    // Second-order clouds: weight variation K2, transport L * V2, mixed
    // K1 * V1, quadratic transport L * V1^2.
    std::vector<double> W2, VW2, CW, DW;
    double S2 = 0.0;

    double first(const NodalFactor& F) const {
        if (!F.active) return 0.0;
        const double n1 = F.anti(W1) + F.dot(VW1);
        const double n0 = F.anti(LW);
        return n1 / S0 - n0 * S1 / (S0 * S0);
    }

    double second(const NodalFactor& F, const NodalFactor& Fz) const {
        if (!F.active && !Fz.active) return 0.0;
        const double n2 = F.anti(W2) + F.dot(CW) + F.dot(VW2) + 0.5 * Fz.dot(DW);
        const double n1 = F.anti(W1) + F.dot(VW1);
        const double n0 = F.anti(LW);
        return n2 / S0 - (n1 * S1 + n0 * S2) / (S0 * S0) + n0 * S1 * S1 / (S0 * S0 * S0);
    }
};

}  // namespace

VariationState solve_first_variation(const CoefficientSet& coeffs, const ForwardState& forward,
                                     const ControlPolicy& control, const SpikeSpec& spike,
                                     const NoisePlan& plan, double forcing_scale) {
    coeffs.validate();
    check_dims(forward, plan, "solve_first_variation");
    spike.validate(plan.grid);

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const bool sf = coeffs.mode == FilterMode::StateFunctional;

    VariationState var;
    var.spike = spike;
    var.eps = spike.eps;
    var.Y1 = Tensor3(M, N, K + 1);
    var.K1 = Tensor3(M, N, K + 1);
    var.V1 = Tensor2(M, K + 1);
    if (sf) var.V1_sample = Tensor3(M, N, K + 1);

    const std::vector<char> win = window_nodes(spike, plan.grid);
    var.eps_effective = effective_eps(win, plan.grid.dt());
    if (spike.eps == 0.0) return var;

    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);
    const Tensor2 u_spk = control_values(spike_control(control, spike), y_paths, plan.grid);

    const bool use_sigma_x = !coeffs.sigma_x_is_zero && static_cast<bool>(coeffs.sigma_x);
    std::vector<double> xs(N), ls(N), zs(N), es(N);

    for (std::size_t k = 0; k < K; ++k) {
        const double t = plan.grid.node(k);
        const EmpiricalMeasure& mu = forward.mu[k];
        const CopyView view{coeffs, forward, u_base, k, t};
        const YGrid grid = YGrid::span_with_zero(mu.min_atom(), mu.max_atom());

        // Copy reductions at node k.
        LawPairing pc;
        pc.LW = project_cloud(grid, view,
                              [&](std::size_t j, std::size_t i) { return forward.L(j, i, k); });
        pc.W1 = project_cloud(grid, view,
                              [&](std::size_t j, std::size_t i) { return var.K1(j, i, k); });
        pc.VW1 = project_cloud(grid, view, [&](std::size_t j, std::size_t i) {
            const double v1 = sf ? var.V1_sample(j, i, k) : var.V1(j, k);
            return forward.L(j, i, k) * v1;
        });
        pc.S0 = cloud_sum(pc.LW);
        pc.S1 = cloud_sum(pc.W1);

        const double dt = plan.grid.dt();
        parallel_over(M, [&](std::size_t j) {
            const double u = u_base(j, k);
            const double v = u_spk(j, k);
            for (std::size_t i = 0; i < N; ++i) {
                const double x = forward.X(j, i, k);
                const double y1 = var.Y1(j, i, k);
                const double k1 = var.K1(j, i, k);

                const NodalFactor Fs(grid, coeffs.sigma_mu, t, x, mu, u, v, false);
                double g_y = pc.first(Fs);
                if (use_sigma_x) g_y += coeffs.sigma_x(t, x, mu, u) * y1;
                if (win[k])
                    g_y += forcing_scale * (coeffs.sigma(t, x, mu, v) - coeffs.sigma(t, x, mu, u));

                const NodalFactor Fh(grid, coeffs.h_mu, t, x, mu, u, v, false);
                double inner = pc.first(Fh);
                if (coeffs.h_x) inner += coeffs.h_x(t, x, mu, u) * y1;
                if (win[k])
                    inner += forcing_scale * (coeffs.h(t, x, mu, v) - coeffs.h(t, x, mu, u));

                const double y1n = y1 + g_y * plan.dB1(j, i, k);
                // Exact derivative of the log-space density step: the ratio
                // L_{k+1}/L_k carries the step factor, the forcing rides the
                // compensated observation increment.
                const double step = forward.L(j, i, k + 1) / forward.L(j, i, k);
                const double a1 =
                    inner * (plan.dY(j, k) - coeffs.h(t, x, mu, u) * dt);
                const double k1n = step * k1 + forward.L(j, i, k + 1) * a1;
                if (!std::isfinite(y1n) || !std::isfinite(k1n))
                    throw_blowup("solve_first_variation", j, i, k);
                var.Y1(j, i, k + 1) = y1n;
                var.K1(j, i, k + 1) = k1n;
            }
        });

        // Filter variation at the new node.
        const std::size_t kn = k + 1;
        if (sf) {
            parallel_over(M, [&](std::size_t j) {
                const auto y = y_paths.row(j);
                for (std::size_t i = 0; i < N; ++i)
                    var.V1_sample(j, i, kn) =
                        coeffs.state_map_x(forward.X(j, i, kn), y.subspan(0, kn + 1)) *
                        var.Y1(j, i, kn);
            });
        }
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t i = 0; i < N; ++i) {
                xs[i] = forward.X(j, i, kn);
                ls[i] = forward.L(j, i, kn);
                zs[i] = var.Y1(j, i, kn);
                es[i] = var.K1(j, i, kn);
            }
            if (sf) {
                for (std::size_t i = 0; i < N; ++i) zs[i] = var.V1_sample(j, i, kn);
                var.V1(j, kn) = conditional_ratio(zs, ls);
            } else {
                var.V1(j, kn) = theta_one(zs, es, xs, ls);
            }
        }
    }
    return var;
}

VariationState solve_second_variation(const CoefficientSet& coeffs, const ForwardState& forward,
                                      const ControlPolicy& control, const SpikeSpec& spike,
                                      const NoisePlan& plan, const VariationState& first,
                                      double forcing_scale) {
    coeffs.validate();
    check_dims(forward, plan, "solve_second_variation");
    spike.validate(plan.grid);
    if (first.Y1.dim0() != plan.M_outer || first.Y1.dim2() != plan.grid.K + 1)
        throw std::invalid_argument(
            "solve_second_variation: first-order state does not match the plan");

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const bool sf = coeffs.mode == FilterMode::StateFunctional;

    VariationState var = first;
    var.Y2 = Tensor3(M, N, K + 1);
    var.K2 = Tensor3(M, N, K + 1);
    var.V2 = Tensor2(M, K + 1);
    if (sf) var.V2_sample = Tensor3(M, N, K + 1);
    if (spike.eps == 0.0) return var;

    const std::vector<char> win = window_nodes(spike, plan.grid);
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);
    const Tensor2 u_spk = control_values(spike_control(control, spike), y_paths, plan.grid);

    const bool use_sigma_x = !coeffs.sigma_x_is_zero && static_cast<bool>(coeffs.sigma_x);
    std::vector<double> xs(N), ls(N), zs(N), es(N);

    // Second-order filter variation at one node, from the composite formula:
    // theta of (Y2, K2) plus the first-order cross correction.
    auto assemble_v2 = [&](std::size_t kn) {
        if (sf) {
            parallel_over(M, [&](std::size_t j) {
                const auto y = y_paths.row(j);
                for (std::size_t i = 0; i < N; ++i)
                    var.V2_sample(j, i, kn) =
                        coeffs.state_map_x(forward.X(j, i, kn), y.subspan(0, kn + 1)) *
                        var.Y2(j, i, kn);
            });
        }
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t i = 0; i < N; ++i) {
                xs[i] = forward.X(j, i, kn);
                ls[i] = forward.L(j, i, kn);
            }
            if (sf) {
                for (std::size_t i = 0; i < N; ++i) zs[i] = var.V2_sample(j, i, kn);
                var.V2(j, kn) = conditional_ratio(zs, ls);
                continue;
            }
            double m_l = 0.0, m_k1y1 = 0.0, m_k1 = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                m_l += ls[i];
                m_k1y1 += first.K1(j, i, kn) * first.Y1(j, i, kn);
                m_k1 += first.K1(j, i, kn);
            }
            m_l /= static_cast<double>(N);
            m_k1y1 /= static_cast<double>(N);
            m_k1 /= static_cast<double>(N);
            for (std::size_t i = 0; i < N; ++i) {
                zs[i] = var.Y2(j, i, kn);
                es[i] = var.K2(j, i, kn);
            }
            const double theta2 = theta_one(zs, es, xs, ls);
            for (std::size_t i = 0; i < N; ++i) {
                zs[i] = first.Y1(j, i, kn);
                es[i] = first.K1(j, i, kn);
            }
            const double theta1 = theta_one(zs, es, xs, ls);
            var.V2(j, kn) = theta2 + m_k1y1 / m_l - (m_k1 / m_l) * theta1;
        }
    };
    assemble_v2(0);

    for (std::size_t k = 0; k < K; ++k) {
        const double t = plan.grid.node(k);
        const EmpiricalMeasure& mu = forward.mu[k];
        const CopyView view{coeffs, forward, u_base, k, t};
        const YGrid grid = YGrid::span_with_zero(mu.min_atom(), mu.max_atom());

        // Copy reductions at node k.  The first-order clouds are rebuilt so
        // the first-order density forcing can be recomputed; its square feeds
        // the second-order exponent.  New clouds: second-order weights K2,
        // transport L * V2, mixed K1 * V1, quadratic transport L * V1^2.
        LawPairing pc;
        pc.LW = project_cloud(grid, view,
                              [&](std::size_t j, std::size_t i) { return forward.L(j, i, k); });
        pc.W1 = project_cloud(grid, view,
                              [&](std::size_t j, std::size_t i) { return first.K1(j, i, k); });
        pc.VW1 = project_cloud(grid, view, [&](std::size_t j, std::size_t i) {
            const double v1 = sf ? first.V1_sample(j, i, k) : first.V1(j, k);
            return forward.L(j, i, k) * v1;
        });
        pc.W2 = project_cloud(grid, view,
                              [&](std::size_t j, std::size_t i) { return var.K2(j, i, k); });
        pc.VW2 = project_cloud(grid, view, [&](std::size_t j, std::size_t i) {
            const double v2 = sf ? var.V2_sample(j, i, k) : var.V2(j, k);
            return forward.L(j, i, k) * v2;
        });
        pc.CW = project_cloud(grid, view, [&](std::size_t j, std::size_t i) {
            const double v1 = sf ? first.V1_sample(j, i, k) : first.V1(j, k);
            return first.K1(j, i, k) * v1;
        });
        pc.DW = project_cloud(grid, view, [&](std::size_t j, std::size_t i) {
            const double v1 = sf ? first.V1_sample(j, i, k) : first.V1(j, k);
            return forward.L(j, i, k) * v1 * v1;
        });
        pc.S0 = cloud_sum(pc.LW);
        pc.S1 = cloud_sum(pc.W1);
        pc.S2 = cloud_sum(pc.W2);

        const double dt = plan.grid.dt();
        parallel_over(M, [&](std::size_t j) {
            const double u = u_base(j, k);
            const double v = u_spk(j, k);
            for (std::size_t i = 0; i < N; ++i) {
                const double x = forward.X(j, i, k);
                const double y1 = first.Y1(j, i, k);
                const double k1 = first.K1(j, i, k);
                const double y2 = var.Y2(j, i, k);
                const double k2 = var.K2(j, i, k);

                const NodalFactor Fs(grid, coeffs.sigma_mu, t, x, mu, u, v, false);
                const NodalFactor Fsz(grid, coeffs.sigma_zmu, t, x, mu, u, v, false);
                double d2s = pc.second(Fs, Fsz);
                if (use_sigma_x) d2s += coeffs.sigma_x(t, x, mu, u) * y2;
                if (coeffs.sigma_xx) d2s += 0.5 * coeffs.sigma_xx(t, x, mu, u) * y1 * y1;
                if (win[k]) {
                    const NodalFactor Fsd(grid, coeffs.sigma_mu, t, x, mu, u, v, true);
                    double dg = pc.first(Fsd);
                    if (coeffs.sigma_x)
                        dg += (coeffs.sigma_x(t, x, mu, v) - coeffs.sigma_x(t, x, mu, u)) * y1;
                    d2s += forcing_scale * dg;
                }

                const NodalFactor Fh(grid, coeffs.h_mu, t, x, mu, u, v, false);
                const NodalFactor Fhz(grid, coeffs.h_zmu, t, x, mu, u, v, false);
                double d1h = pc.first(Fh);
                if (coeffs.h_x) d1h += coeffs.h_x(t, x, mu, u) * y1;
                double d2h = pc.second(Fh, Fhz);
                if (coeffs.h_x) d2h += coeffs.h_x(t, x, mu, u) * y2;
                if (coeffs.h_xx) d2h += 0.5 * coeffs.h_xx(t, x, mu, u) * y1 * y1;
                if (win[k]) {
                    d1h += forcing_scale * (coeffs.h(t, x, mu, v) - coeffs.h(t, x, mu, u));
                    const NodalFactor Fhd(grid, coeffs.h_mu, t, x, mu, u, v, true);
                    double dg = pc.first(Fhd);
                    if (coeffs.h_x)
                        dg += (coeffs.h_x(t, x, mu, v) - coeffs.h_x(t, x, mu, u)) * y1;
                    d2h += forcing_scale * dg;
                }

                const double y2n = y2 + d2s * plan.dB1(j, i, k);
                // Second derivative of the log-space density step: the ratio
                // L_{k+1}/L_k carries K2 and the first-order cross, and the
                // exponent expansion adds its own quadratic half-term.
                const double h0 = coeffs.h(t, x, mu, u);
                const double step = forward.L(j, i, k + 1) / forward.L(j, i, k);
                const double a1 = d1h * (plan.dY(j, k) - h0 * dt);
                const double a2 = d2h * plan.dY(j, k) - (h0 * d2h + 0.5 * d1h * d1h) * dt;
                const double k2n =
                    step * (k2 + k1 * a1) + forward.L(j, i, k + 1) * (a2 + 0.5 * a1 * a1);
                if (!std::isfinite(y2n) || !std::isfinite(k2n))
                    throw_blowup("solve_second_variation", j, i, k);
                var.Y2(j, i, k + 1) = y2n;
                var.K2(j, i, k + 1) = k2n;
            }
        });
        assemble_v2(k + 1);
    }
    return var;
}

namespace {

double rms(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x * x;
    return std::sqrt(s / static_cast<double>(xs.size()));
}

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& err) {
    const std::size_t n = eps.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t r = 0; r < n; ++r) {
        lx[r] = std::log(eps[r]);
        ly[r] = std::log(err[r] > 1e-300 ? err[r] : 1e-300);
        mx += lx[r];
        my += ly[r];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        sxx += (lx[r] - mx) * (lx[r] - mx);
        sxy += (lx[r] - mx) * (ly[r] - my);
    }
    return sxy / sxx;
}

}  // namespace

TaylorReport taylor_orders(const CoefficientSet& coeffs, const ControlPolicy& control,
                           double spike_t0, const ControlPolicy& spike_alt,
                           const std::vector<double>& eps_ladder, const NoisePlan& plan,
                           double picard_tol, std::size_t max_iter) {
    if (eps_ladder.size() < 4)
        throw std::invalid_argument("taylor_orders: ladder needs at least 4 window lengths");
    for (double e : eps_ladder)
        if (!(e > 0.0)) throw std::invalid_argument("taylor_orders: window lengths must be positive");

    std::vector<double> ladder = eps_ladder;
    std::sort(ladder.begin(), ladder.end(), std::greater<>());

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    TaylorReport rep;

    const ForwardState base = picard_forward(coeffs, control, plan, picard_tol, max_iter);

    for (double eps : ladder) {
        SpikeSpec spike;
        spike.t0 = spike_t0;
        spike.eps = eps;
        spike.alt = spike_alt;
        spike.validate(plan.grid);

        const VariationState first =
            solve_first_variation(coeffs, base, control, spike, plan);
        const VariationState var =
            solve_second_variation(coeffs, base, control, spike, plan, first);
        if (!(var.eps_effective > 0.0))
            throw std::invalid_argument(
                "taylor_orders: window covers no grid node; ladder is degenerate");
        if (!rep.eps_effective.empty() && var.eps_effective >= rep.eps_effective.back())
            throw std::invalid_argument(
                "taylor_orders: ladder collapses on the grid; window lengths must separate");

        const ForwardState pert =
            picard_forward(coeffs, spike_control(control, spike), plan, picard_tol, max_iter);

        std::vector<double> s0x, s1x, s2x, s0l, s1l, s2l;
        s0x.reserve(M * N);
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t i = 0; i < N; ++i) {
                double m0 = 0.0, m1 = 0.0, m2 = 0.0, n0 = 0.0, n1 = 0.0, n2 = 0.0;
                for (std::size_t k = 0; k <= K; ++k) {
                    const double dx = pert.X(j, i, k) - base.X(j, i, k);
                    const double dl = pert.L(j, i, k) - base.L(j, i, k);
                    const double y1 = var.Y1(j, i, k), y2 = var.Y2(j, i, k);
                    const double k1 = var.K1(j, i, k), k2 = var.K2(j, i, k);
                    m0 = std::max(m0, std::abs(dx));
                    m1 = std::max(m1, std::abs(dx - y1));
                    m2 = std::max(m2, std::abs(dx - y1 - y2));
                    n0 = std::max(n0, std::abs(dl));
                    n1 = std::max(n1, std::abs(dl - k1));
                    n2 = std::max(n2, std::abs(dl - k1 - k2));
                }
                s0x.push_back(m0);
                s1x.push_back(m1);
                s2x.push_back(m2);
                s0l.push_back(n0);
                s1l.push_back(n1);
                s2l.push_back(n2);
            }

        std::vector<double> s0u(M), s1u(M), s2u(M), scomp(M);
        std::vector<double> zeta(N), eta(N), xs(N), ls(N);
        for (std::size_t j = 0; j < M; ++j) {
            double m0 = 0.0, m1 = 0.0, m2 = 0.0, mc = 0.0;
            for (std::size_t k = 0; k <= K; ++k) {
                const double du = pert.U(j, k) - base.U(j, k);
                const double v1 = var.V1(j, k), v2 = var.V2(j, k);
                m0 = std::max(m0, std::abs(du));
                m1 = std::max(m1, std::abs(du - v1));
                const double resid2 = du - v1 - v2;
                m2 = std::max(m2, std::abs(resid2));
                for (std::size_t i = 0; i < N; ++i) {
                    zeta[i] = pert.X(j, i, k) - base.X(j, i, k) - var.Y1(j, i, k) -
                              var.Y2(j, i, k);
                    eta[i] = pert.L(j, i, k) - base.L(j, i, k) - var.K1(j, i, k) -
                             var.K2(j, i, k);
                    xs[i] = base.X(j, i, k);
                    ls[i] = base.L(j, i, k);
                }
                mc = std::max(mc, std::abs(resid2 - theta_one(zeta, eta, xs, ls)));
            }
            s0u[j] = m0;
            s1u[j] = m1;
            s2u[j] = m2;
            scomp[j] = mc;
        }

        double small_c = 0.0;
        for (std::size_t k = 0; k <= K; ++k) {
            double my1 = 0.0, mk1l = 0.0;
            for (std::size_t j = 0; j < M; ++j)
                for (std::size_t i = 0; i < N; ++i) {
                    my1 += var.Y1(j, i, k);
                    mk1l += var.K1(j, i, k) / base.L(j, i, k);
                }
            const double inv = 1.0 / static_cast<double>(M * N);
            small_c = std::max(small_c, std::abs(my1 * inv + mk1l * inv));
        }

        rep.eps_nominal.push_back(eps);
        rep.eps_effective.push_back(var.eps_effective);
        rep.e0_X.push_back(rms(s0x));
        rep.e1_X.push_back(rms(s1x));
        rep.e2_X.push_back(rms(s2x));
        rep.e0_L.push_back(rms(s0l));
        rep.e1_L.push_back(rms(s1l));
        rep.e2_L.push_back(rms(s2l));
        rep.e0_U.push_back(rms(s0u));
        rep.e1_U.push_back(rms(s1u));
        rep.e2_U.push_back(rms(s2u));
        rep.smallness.push_back(small_c / std::sqrt(var.eps_effective));
        rep.composite.push_back(rms(scomp) / std::pow(var.eps_effective, 1.4));
    }

    rep.slope_e0_X = loglog_slope(rep.eps_effective, rep.e0_X);
    rep.slope_e1_X = loglog_slope(rep.eps_effective, rep.e1_X);
    rep.slope_e2_X = loglog_slope(rep.eps_effective, rep.e2_X);
    rep.slope_e0_L = loglog_slope(rep.eps_effective, rep.e0_L);
    rep.slope_e1_L = loglog_slope(rep.eps_effective, rep.e1_L);
    rep.slope_e2_L = loglog_slope(rep.eps_effective, rep.e2_L);
    rep.slope_e0_U = loglog_slope(rep.eps_effective, rep.e0_U);
    rep.slope_e1_U = loglog_slope(rep.eps_effective, rep.e1_U);
    rep.slope_e2_U = loglog_slope(rep.eps_effective, rep.e2_U);
    return rep;
}

}  // namespace mfsmp
