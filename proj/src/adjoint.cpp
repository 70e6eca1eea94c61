#include "mfsmp/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfsmp/quadrature.hpp"

namespace mfsmp {

namespace {

void check_dims(const ForwardState& fwd, const NoisePlan& plan, const char* where) {
    if (fwd.X.dim0() != plan.M_outer || fwd.X.dim1() != plan.N_inner ||
        fwd.X.dim2() != plan.grid.K + 1)
        throw std::invalid_argument(std::string(where) +
                                    ": forward state does not match the plan");
}

/// Regression feature rows at one node, sample-major (j outer, i inner).
std::vector<std::vector<double>> basis_rows(const CoefficientSet& co, const ForwardState& fwd,
                                            std::size_t k, double t, double spike_t0) {
    const std::size_t M = fwd.X.dim0(), N = fwd.X.dim1();
    const bool sf = co.mode == FilterMode::StateFunctional;
    std::vector<std::vector<double>> rows;
    rows.reserve(M * N);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            const double x = fwd.X(j, i, k);
            const double l = fwd.L(j, i, k);
            const double u = sf ? fwd.U_sample(j, i, k) : fwd.U(j, k);
            std::vector<double> row = {1.0, x, l, u, x * x, x * l, u * u};
            if (spike_t0 >= 0.0) row.push_back(t >= spike_t0 ? 1.0 : 0.0);
            rows.push_back(std::move(row));
        }
    return rows;
}

/// Copy average of fn(t, X, mu, u; y) * weight on each grid node, where the
/// weight is the product of the provided per-sample factors.
std::vector<double> copy_grid_running(const YGrid& grid, const CoeffMuFn& fn, double t,
                                      const ForwardState& fwd, const Tensor2& u_base,
                                      std::size_t k, const EmpiricalMeasure& mu,
                                      const Tensor3* w1, const Tensor3* w2) {
    const auto& ys = grid.nodes();
    std::vector<double> out(ys.size(), 0.0);
    if (!fn) return out;
    const std::size_t M = fwd.X.dim0(), N = fwd.X.dim1();
    for (std::size_t j = 0; j < M; ++j) {
        const double u = u_base(j, k);
        for (std::size_t i = 0; i < N; ++i) {
            double w = 1.0;
            if (w1) w *= (*w1)(j, i, k);
            if (w2) w *= (*w2)(j, i, k);
            if (w == 0.0) continue;
            const double x = fwd.X(j, i, k);
            for (std::size_t g = 0; g < ys.size(); ++g) out[g] += fn(t, x, mu, u, ys[g]) * w;
        }
    }
    const double inv = 1.0 / static_cast<double>(M * N);
    for (double& v : out) v *= inv;
    return out;
}

std::vector<double> copy_grid_terminal(const YGrid& grid, const TerminalMuFn& fn,
                                       const ForwardState& fwd, std::size_t K,
                                       const EmpiricalMeasure& mu) {
    const auto& ys = grid.nodes();
    std::vector<double> out(ys.size(), 0.0);
    if (!fn) return out;
    const std::size_t M = fwd.X.dim0(), N = fwd.X.dim1();
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            const double x = fwd.X(j, i, K);
            for (std::size_t g = 0; g < ys.size(); ++g) out[g] += fn(x, mu, ys[g]);
        }
    const double inv = 1.0 / static_cast<double>(M * N);
    for (double& v : out) v *= inv;
    return out;
}

/// Fitted values of one increment regression: target * increment / dt.
std::vector<double> fit_integrand(const Tensor3& p, std::size_t k, double dt,
                                  const std::vector<std::vector<double>>& rows,
                                  const NoisePlan& plan, bool against_observation) {
    const std::size_t M = p.dim0(), N = p.dim1();
    std::vector<double> target(M * N);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            const double inc =
                against_observation ? plan.dY(j, k) : plan.dB1(j, i, k);
            target[j * N + i] = p(j, i, k + 1) * inc / dt;
        }
    return regress_conditional(target, rows).fitted;
}

void store_column(Tensor3& dst, std::size_t k, const std::vector<double>& vals) {
    const std::size_t M = dst.dim0(), N = dst.dim1();
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) dst(j, i, k) = vals[j * N + i];
}

}  // namespace

AdjointState solve_first_adjoint(const CoefficientSet& coeffs, const ForwardState& forward,
                                 const ControlPolicy& control, const NoisePlan& plan,
                                 double spike_t0, std::size_t sweeps) {
    coeffs.validate();
    check_dims(forward, plan, "solve_first_adjoint");
    if (sweeps < 1) throw std::invalid_argument("solve_first_adjoint: need at least one sweep");

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const double dt = plan.grid.dt();
    const bool sf = coeffs.mode == FilterMode::StateFunctional;
    const bool use_sigma_x = !coeffs.sigma_x_is_zero && static_cast<bool>(coeffs.sigma_x);
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);

    AdjointState adj;
    adj.p1 = Tensor3(M, N, K + 1);
    adj.q1 = Tensor3(M, N, K + 1);
    adj.qc1 = Tensor3(M, N, K + 1);
    adj.p2 = Tensor3(M, N, K + 1);
    adj.q2 = Tensor3(M, N, K + 1);
    adj.qc2 = Tensor3(M, N, K + 1);
    adj.r2_p1.assign(K, 0.0);
    adj.r2_p2.assign(K, 0.0);

    // Terminal conditions, exact per sample.
    {
        const EmpiricalMeasure& mu_T = forward.mu[K];
        const YGrid grid = YGrid::span_with_zero(mu_T.min_atom(), mu_T.max_atom());
        const std::vector<double> GPhi =
            copy_grid_terminal(grid, coeffs.Phi_mu, forward, K, mu_T);
        const std::vector<double> APhi = grid.antiderivative_from_zero(GPhi);
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t i = 0; i < N; ++i) {
                const double x = forward.X(j, i, K);
                const double l = forward.L(j, i, K);
                const double u_slot = sf ? forward.U_sample(j, i, K) : forward.U(j, K);
                const double gphi = grid.interp(GPhi, u_slot);
                const double aphi = grid.interp(APhi, u_slot);
                const double phi_x = eval(coeffs.Phi_x, x, forward.mu[K]);
                if (sf) {
                    const double sx = coeffs.state_map_x(x, y_paths.row(j));
                    adj.p1(j, i, K) = -phi_x - l * sx * gphi;
                    adj.p2(j, i, K) = -aphi;
                } else {
                    adj.p1(j, i, K) = -phi_x - l * gphi;
                    adj.p2(j, i, K) = -(x - forward.U(j, K)) * gphi - aphi;
                }
            }
    }

    std::vector<double> target(M * N), prev_fit1, prev_fit2;
    for (std::size_t kk = K; kk-- > 0;) {
        const std::size_t k = kk;
        const double t = plan.grid.node(k);
        const EmpiricalMeasure& mu = forward.mu[k];
        const auto rows = basis_rows(coeffs, forward, k, t, spike_t0);

        store_column(adj.q1, k, fit_integrand(adj.p1, k, dt, rows, plan, false));
        store_column(adj.qc1, k, fit_integrand(adj.p1, k, dt, rows, plan, true));
        store_column(adj.qc2, k, fit_integrand(adj.p2, k, dt, rows, plan, false));
        store_column(adj.q2, k, fit_integrand(adj.p2, k, dt, rows, plan, true));

        const YGrid grid = YGrid::span_with_zero(mu.min_atom(), mu.max_atom());
        const std::vector<double> Gq1s = copy_grid_running(grid, coeffs.sigma_mu, t, forward,
                                                           u_base, k, mu, &adj.q1, nullptr);
        const std::vector<double> Gq2h = copy_grid_running(grid, coeffs.h_mu, t, forward, u_base,
                                                           k, mu, &adj.q2, &forward.L);
        const std::vector<double> Gf =
            copy_grid_running(grid, coeffs.f_mu, t, forward, u_base, k, mu, nullptr, nullptr);
        const std::vector<double> Aq1s = grid.antiderivative_from_zero(Gq1s);
        const std::vector<double> Aq2h = grid.antiderivative_from_zero(Gq2h);
        const std::vector<double> Af = grid.antiderivative_from_zero(Gf);

        for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
            // Generator values from the integrands regressed at this step.
            std::vector<double> t1(M * N), t2(M * N);
            for (std::size_t j = 0; j < M; ++j) {
                const double u = u_base(j, k);
                for (std::size_t i = 0; i < N; ++i) {
                    const double x = forward.X(j, i, k);
                    const double l = forward.L(j, i, k);
                    const double u_slot = sf ? forward.U_sample(j, i, k) : forward.U(j, k);
                    const double q1v = adj.q1(j, i, k);
                    const double q2v = adj.q2(j, i, k);
                    const double g1 = grid.interp(Gq1s, u_slot);
                    const double g2 = grid.interp(Gq2h, u_slot);
                    const double g3 = grid.interp(Gf, u_slot);
                    const double a1 = grid.interp(Aq1s, u_slot);
                    const double a2 = grid.interp(Aq2h, u_slot);
                    const double a3 = grid.interp(Af, u_slot);
                    const double h_xv = coeffs.h_x ? coeffs.h_x(t, x, mu, u) : 0.0;
                    const double f_xv = coeffs.f_x ? coeffs.f_x(t, x, mu, u) : 0.0;

                    double alpha, beta;
                    if (sf) {
                        const double sx = coeffs.state_map_x(x, y_paths.row(j).subspan(0, k + 1));
                        alpha = l * sx * g1 + h_xv * l * q2v + l * sx * g2 - f_xv - l * sx * g3;
                        beta = coeffs.h(t, x, mu, u) * q2v + a1 + a2 - a3;
                    } else {
                        const double xu = x - forward.U(j, k);
                        alpha = l * g1 + h_xv * l * q2v + l * g2 - f_xv - l * g3;
                        beta = xu * g1 + a1 + coeffs.h(t, x, mu, u) * q2v + xu * g2 - xu * g3 - a3;
                    }
                    if (use_sigma_x) alpha += coeffs.sigma_x(t, x, mu, u) * q1v;

                    const std::size_t s = j * N + i;
                    t1[s] = adj.p1(j, i, k + 1) + alpha * dt;
                    t2[s] = adj.p2(j, i, k + 1) + beta * dt;
                }
            }
            RegressionResult r1 = regress_conditional(t1, rows);
            RegressionResult r2 = regress_conditional(t2, rows);
            if (sweep > 0) {
                for (std::size_t s = 0; s < M * N; ++s) {
                    adj.sweep_delta = std::max(adj.sweep_delta,
                                               std::abs(r1.fitted[s] - prev_fit1[s]));
                    adj.sweep_delta = std::max(adj.sweep_delta,
                                               std::abs(r2.fitted[s] - prev_fit2[s]));
                }
            }
            prev_fit1 = r1.fitted;
            prev_fit2 = r2.fitted;
            store_column(adj.p1, k, r1.fitted);
            store_column(adj.p2, k, r2.fitted);
            adj.r2_p1[k] = r1.r_squared;
            adj.r2_p2[k] = r2.r_squared;
        }
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t i = 0; i < N; ++i)
                if (!std::isfinite(adj.p1(j, i, k)) || !std::isfinite(adj.p2(j, i, k)))
                    throw std::runtime_error("solve_first_adjoint: non-finite adjoint value");
    }
    return adj;
}

AdjointState solve_second_adjoint(const CoefficientSet& coeffs, const ForwardState& forward,
                                  const ControlPolicy& control, const AdjointState& first,
                                  const NoisePlan& plan, double spike_t0, std::size_t sweeps) {
    coeffs.validate();
    check_dims(forward, plan, "solve_second_adjoint");
    if (first.p1.empty())
        throw std::invalid_argument("solve_second_adjoint: first-order adjoint not solved");
    if (sweeps < 1) throw std::invalid_argument("solve_second_adjoint: need at least one sweep");

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const double dt = plan.grid.dt();
    const bool sf = coeffs.mode == FilterMode::StateFunctional;
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);

    AdjointState adj = first;
    adj.P1 = Tensor3(M, N, K + 1);
    adj.Q11 = Tensor3(M, N, K + 1);
    adj.Q12 = Tensor3(M, N, K + 1);
    adj.r2_P1.assign(K, 0.0);
    if (sf) {
        adj.P2 = Tensor3(M, N, K + 1);
        adj.Q21 = Tensor3(M, N, K + 1);
        adj.Q22 = Tensor3(M, N, K + 1);
        adj.r2_P2.assign(K, 0.0);
    }

    if (!sf) {
        // Conditional-expectation representation: P1_t is the projection of
        // -(terminal curvature + remaining running curvature).
        std::vector<double> cumulative(M * N);
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t i = 0; i < N; ++i) {
                const double c = eval(coeffs.Phi_xx, forward.X(j, i, K), forward.mu[K]);
                cumulative[j * N + i] = c;
                adj.P1(j, i, K) = -c;
            }
        for (std::size_t kk = K; kk-- > 0;) {
            const std::size_t k = kk;
            const double t = plan.grid.node(k);
            const EmpiricalMeasure& mu = forward.mu[k];
            const auto rows = basis_rows(coeffs, forward, k, t, spike_t0);
            store_column(adj.Q11, k, fit_integrand(adj.P1, k, dt, rows, plan, false));
            store_column(adj.Q12, k, fit_integrand(adj.P1, k, dt, rows, plan, true));
            for (std::size_t j = 0; j < M; ++j)
                for (std::size_t i = 0; i < N; ++i) {
                    const double x = forward.X(j, i, k);
                    const double u = u_base(j, k);
                    const double h_xx = coeffs.h_xx ? coeffs.h_xx(t, x, mu, u) : 0.0;
                    const double f_xx = coeffs.f_xx ? coeffs.f_xx(t, x, mu, u) : 0.0;
                    const double H_xx =
                        h_xx * forward.L(j, i, k) * first.q2(j, i, k) - f_xx;
                    cumulative[j * N + i] += H_xx * dt;
                }
            RegressionResult rr = regress_conditional(cumulative, rows);
            adj.r2_P1[k] = rr.r_squared;
            for (std::size_t s = 0; s < M * N; ++s) rr.fitted[s] = -rr.fitted[s];
            store_column(adj.P1, k, rr.fitted);
        }
        return adj;
    }

    // StateFunctional: coupled pair with the Q-coupling generator terms.
    {
        const EmpiricalMeasure& mu_T = forward.mu[K];
        const YGrid grid = YGrid::span_with_zero(mu_T.min_atom(), mu_T.max_atom());
        const std::vector<double> GPhi =
            copy_grid_terminal(grid, coeffs.Phi_mu, forward, K, mu_T);
        const std::vector<double> GzPhi =
            copy_grid_terminal(grid, coeffs.Phi_zmu, forward, K, mu_T);
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t i = 0; i < N; ++i) {
                const double x = forward.X(j, i, K);
                const double l = forward.L(j, i, K);
                const double us = forward.U_sample(j, i, K);
                const double sx = coeffs.state_map_x(x, y_paths.row(j));
                adj.P1(j, i, K) = -eval(coeffs.Phi_xx, x, mu_T) -
                                  l * sx * sx * grid.interp(GzPhi, us);
                adj.P2(j, i, K) = -sx * grid.interp(GPhi, us);
            }
    }

    std::vector<double> prev1, prev2;
    for (std::size_t kk = K; kk-- > 0;) {
        const std::size_t k = kk;
        const double t = plan.grid.node(k);
        const EmpiricalMeasure& mu = forward.mu[k];
        const auto rows = basis_rows(coeffs, forward, k, t, spike_t0);
        store_column(adj.Q11, k, fit_integrand(adj.P1, k, dt, rows, plan, false));
        store_column(adj.Q12, k, fit_integrand(adj.P1, k, dt, rows, plan, true));
        store_column(adj.Q21, k, fit_integrand(adj.P2, k, dt, rows, plan, false));
        store_column(adj.Q22, k, fit_integrand(adj.P2, k, dt, rows, plan, true));

        const YGrid grid = YGrid::span_with_zero(mu.min_atom(), mu.max_atom());
        // Copy averages of the Hamiltonian measure derivatives against the
        // first-order integrands.
        auto combine = [&](const CoeffMuFn& s_fn, const CoeffMuFn& h_fn, const CoeffMuFn& f_fn) {
            std::vector<double> g = copy_grid_running(grid, s_fn, t, forward, u_base, k, mu,
                                                      &adj.q1, nullptr);
            const std::vector<double> gh = copy_grid_running(grid, h_fn, t, forward, u_base, k,
                                                             mu, &adj.q2, &forward.L);
            const std::vector<double> gf =
                copy_grid_running(grid, f_fn, t, forward, u_base, k, mu, nullptr, nullptr);
            for (std::size_t g_i = 0; g_i < g.size(); ++g_i) g[g_i] += gh[g_i] - gf[g_i];
            return g;
        };
        const std::vector<double> GH = combine(coeffs.sigma_mu, coeffs.h_mu, coeffs.f_mu);
        const std::vector<double> GzH = combine(coeffs.sigma_zmu, coeffs.h_zmu, coeffs.f_zmu);

        for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
            std::vector<double> t1(M * N), t2(M * N);
            for (std::size_t j = 0; j < M; ++j) {
                const double u = u_base(j, k);
                for (std::size_t i = 0; i < N; ++i) {
                    const double x = forward.X(j, i, k);
                    const double l = forward.L(j, i, k);
                    const double us = forward.U_sample(j, i, k);
                    const double sx = coeffs.state_map_x(x, y_paths.row(j).subspan(0, k + 1));
                    const double s_x = coeffs.sigma_x ? coeffs.sigma_x(t, x, mu, u) : 0.0;
                    const double s_xx = coeffs.sigma_xx ? coeffs.sigma_xx(t, x, mu, u) : 0.0;
                    const double h_v = coeffs.h(t, x, mu, u);
                    const double h_xv = coeffs.h_x ? coeffs.h_x(t, x, mu, u) : 0.0;
                    const double h_xx = coeffs.h_xx ? coeffs.h_xx(t, x, mu, u) : 0.0;
                    const double f_xx = coeffs.f_xx ? coeffs.f_xx(t, x, mu, u) : 0.0;
                    const double H_xx = s_xx * adj.q1(j, i, k) +
                                        h_xx * l * adj.q2(j, i, k) - f_xx;
                    const double H_xl = h_xv * adj.q2(j, i, k);

                    const double gen1 = H_xx + l * sx * sx * grid.interp(GzH, us) +
                                        s_x * s_x * adj.P1(j, i, k + 1) +
                                        2.0 * s_x * adj.Q11(j, i, k) +
                                        2.0 * l * h_xv * adj.Q22(j, i, k);
                    const double gen2 = H_xl + sx * grid.interp(GH, us) +
                                        s_x * adj.Q21(j, i, k) + h_v * adj.Q22(j, i, k);
                    const std::size_t s = j * N + i;
                    t1[s] = adj.P1(j, i, k + 1) + gen1 * dt;
                    t2[s] = adj.P2(j, i, k + 1) + gen2 * dt;
                }
            }
            RegressionResult r1 = regress_conditional(t1, rows);
            RegressionResult r2 = regress_conditional(t2, rows);
            if (sweep > 0) {
                for (std::size_t s = 0; s < M * N; ++s) {
                    adj.sweep_delta =
                        std::max(adj.sweep_delta, std::abs(r1.fitted[s] - prev1[s]));
                    adj.sweep_delta =
                        std::max(adj.sweep_delta, std::abs(r2.fitted[s] - prev2[s]));
                }
            }
            prev1 = r1.fitted;
            prev2 = r2.fitted;
            store_column(adj.P1, k, r1.fitted);
            store_column(adj.P2, k, r2.fitted);
            adj.r2_P1[k] = r1.r_squared;
            adj.r2_P2[k] = r2.r_squared;
        }
    }
    return adj;
}

DualityReport duality_check(const CoefficientSet& coeffs, const ForwardState& forward,
                            const VariationState& variation, const AdjointState& adjoint,
                            const ControlPolicy& control, const NoisePlan& plan) {
    coeffs.validate();
    check_dims(forward, plan, "duality_check");
    if (variation.Y1.dim0() != plan.M_outer || variation.Y1.dim2() != plan.grid.K + 1)
        throw std::invalid_argument("duality_check: variation state does not match the plan");
    if (adjoint.p1.dim0() != plan.M_outer || adjoint.p1.dim2() != plan.grid.K + 1)
        throw std::invalid_argument("duality_check: adjoint state does not match the plan");

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const double dt = plan.grid.dt();
    const bool sf = coeffs.mode == FilterMode::StateFunctional;
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);
    const Tensor2 u_spk =
        control_values(spike_control(control, variation.spike), y_paths, plan.grid);

    DualityReport rep;
    rep.eps = variation.eps;
    rep.eps_effective = variation.eps_effective;

    double lhs = 0.0;
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i)
            lhs += adjoint.p1(j, i, K) * variation.Y1(j, i, K) +
                   adjoint.p2(j, i, K) * variation.K1(j, i, K);
    lhs /= static_cast<double>(M * N);

    double rhs = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double t = plan.grid.node(k);
        const EmpiricalMeasure& mu = forward.mu[k];
        const bool win = variation.spike.covers(t);
        const YGrid grid = YGrid::span_with_zero(mu.min_atom(), mu.max_atom());
        const std::vector<double> Gf =
            copy_grid_running(grid, coeffs.f_mu, t, forward, u_base, k, mu, nullptr, nullptr);
        const std::vector<double> Af = grid.antiderivative_from_zero(Gf);

        double acc = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            const double u = u_base(j, k);
            const double v = u_spk(j, k);
            for (std::size_t i = 0; i < N; ++i) {
                const double x = forward.X(j, i, k);
                const double l = forward.L(j, i, k);
                const double u_slot = sf ? forward.U_sample(j, i, k) : forward.U(j, k);
                const double f_xv = coeffs.f_x ? coeffs.f_x(t, x, mu, u) : 0.0;
                double term;
                if (sf) {
                    const double sx = coeffs.state_map_x(x, y_paths.row(j).subspan(0, k + 1));
                    term = variation.Y1(j, i, k) * (f_xv + l * sx * grid.interp(Gf, u_slot)) +
                           variation.K1(j, i, k) * grid.interp(Af, u_slot);
                } else {
                    const double xu = x - forward.U(j, k);
                    term = variation.Y1(j, i, k) * (f_xv + l * grid.interp(Gf, u_slot)) +
                           variation.K1(j, i, k) *
                               (xu * grid.interp(Gf, u_slot) + grid.interp(Af, u_slot));
                }
                if (win && v != u) {
                    const double dsig = coeffs.sigma(t, x, mu, v) - coeffs.sigma(t, x, mu, u);
                    const double dh = coeffs.h(t, x, mu, v) - coeffs.h(t, x, mu, u);
                    term += adjoint.q1(j, i, k) * dsig + adjoint.q2(j, i, k) * l * dh;
                }
                acc += term;
            }
        }
        rhs += acc / static_cast<double>(M * N) * dt;
    }

    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.abs_residual = std::abs(lhs - rhs);
    const double eps2 = variation.eps * variation.eps;
    const double denom = std::max({std::abs(lhs), std::abs(rhs), eps2});
    rep.rel_residual = denom > 0.0 ? rep.abs_residual / denom : 0.0;
    rep.residual_over_eps =
        variation.eps > 0.0 ? rep.abs_residual / variation.eps : 0.0;
    return rep;
}

}  // namespace mfsmp
