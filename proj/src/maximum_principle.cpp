#include "mfsmp/maximum_principle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfsmp/parallel.hpp"
#include "mfsmp/quadrature.hpp"
#include "mfsmp/regression.hpp"

namespace mfsmp {

namespace {

constexpr double kDensityFloor = 1e-300;
constexpr std::size_t kSearchCap = 4096;

/// Observation features {1, Y, Y^2, running max} for every outer path at node k.
std::vector<std::vector<double>> observation_rows(const Tensor2& y_paths, std::size_t k) {
    const std::size_t M = y_paths.dim0();
    std::vector<std::vector<double>> rows;
    rows.reserve(M);
    for (std::size_t j = 0; j < M; ++j) {
        double run_max = y_paths(j, 0);
        for (std::size_t m = 1; m <= k; ++m) run_max = std::max(run_max, y_paths(j, m));
        rows.push_back(observation_features(y_paths(j, k), run_max));
    }
    return rows;
}

/// Copy average of the Hamiltonian measure derivative on the grid nodes:
/// q1*sigma_mu + q2*L*h_mu - f_mu, all with copy base arguments.
std::vector<double> hamiltonian_measure_grid(const YGrid& grid, const CoeffMuFn& s_fn,
                                             const CoeffMuFn& h_fn, const CoeffMuFn& f_fn,
                                             double t, const ForwardState& fwd,
                                             const AdjointState& adj, const Tensor2& u_base,
                                             std::size_t k, const EmpiricalMeasure& mu) {
    const auto& ys = grid.nodes();
    std::vector<double> out(ys.size(), 0.0);
    const std::size_t M = fwd.X.dim0(), N = fwd.X.dim1();
    for (std::size_t j = 0; j < M; ++j) {
        const double u = u_base(j, k);
        for (std::size_t i = 0; i < N; ++i) {
            const double x = fwd.X(j, i, k);
            const double l = fwd.L(j, i, k);
            const double q1 = adj.q1(j, i, k);
            const double q2 = adj.q2(j, i, k);
            for (std::size_t g = 0; g < ys.size(); ++g) {
                double v = 0.0;
                if (s_fn) v += q1 * s_fn(t, x, mu, u, ys[g]);
                if (h_fn) v += q2 * l * h_fn(t, x, mu, u, ys[g]);
                if (f_fn) v -= f_fn(t, x, mu, u, ys[g]);
                out[g] += v;
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(M * N);
    for (double& v : out) v *= inv;
    return out;
}

std::vector<double> terminal_measure_grid(const YGrid& grid, const TerminalMuFn& fn,
                                          const ForwardState& fwd, std::size_t K) {
    const auto& ys = grid.nodes();
    std::vector<double> out(ys.size(), 0.0);
    if (!fn) return out;
    const std::size_t M = fwd.X.dim0(), N = fwd.X.dim1();
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            const double x = fwd.X(j, i, K);
            for (std::size_t g = 0; g < ys.size(); ++g) out[g] += fn(x, fwd.mu[K], ys[g]);
        }
    const double inv = 1.0 / static_cast<double>(M * N);
    for (double& v : out) v *= inv;
    return out;
}

std::vector<double> per_path_cost(const CoefficientSet& coeffs, const ForwardState& state,
                                  const Tensor2& u_base, const NoisePlan& plan) {
    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const double dt = plan.grid.dt();
    std::vector<double> cost(M, 0.0);
    for (std::size_t j = 0; j < M; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double sample = coeffs.Phi(state.X(j, i, K), state.mu[K]);
            for (std::size_t k = 0; k < K; ++k)
                sample += coeffs.f(plan.grid.node(k), state.X(j, i, k), state.mu[k],
                                   u_base(j, k)) *
                          dt;
            acc += sample;
        }
        cost[j] = acc / static_cast<double>(N);
    }
    return cost;
}

}  // namespace

double hamiltonian(double t, double x, double l, const EmpiricalMeasure& mu, double v,
                   double q1, double q2, const CoefficientSet& coeffs) {
    return coeffs.sigma(t, x, mu, v) * q1 + coeffs.h(t, x, mu, v) * l * q2 -
           coeffs.f(t, x, mu, v);
}

Tensor2 h_window(const CoefficientSet& coeffs, const ForwardState& forward,
                 const ControlPolicy& control, const NoisePlan& plan, std::size_t s_index,
                 std::size_t t_index) {
    if (s_index > t_index)
        throw std::invalid_argument("h_window: start index past end index");
    if (t_index > plan.grid.K) throw std::invalid_argument("h_window: index past the horizon");
    const std::size_t M = plan.M_outer, N = plan.N_inner;
    const double dt = plan.grid.dt();
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);

    Tensor2 out(M, N);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (std::size_t r = s_index; r < t_index; ++r) {
                const double tr = plan.grid.node(r);
                const double x = forward.X(j, i, r);
                const double u = u_base(j, r);
                const double hx =
                    coeffs.h_x ? coeffs.h_x(tr, x, forward.mu[r], u) : 0.0;
                if (hx == 0.0) continue;
                const double hv = coeffs.h(tr, x, forward.mu[r], u);
                acc += hx * plan.dY(j, r) - hv * hx * dt;
            }
            out(j, i) = acc;
        }
    return out;
}

MRResult compute_MR(const CoefficientSet& coeffs, const ForwardState& forward,
                    const AdjointState& first_adjoint, const ControlPolicy& control,
                    const NoisePlan& plan) {
    coeffs.validate();
    if (coeffs.mode != FilterMode::ConditionalLaw || !coeffs.sigma_x_is_zero ||
        !coeffs.has_h_split())
        throw std::invalid_argument(
            "compute_MR: needs conditional-law mode, x-free sigma and the split "
            "observation drift h0 + phi*h1");
    if (first_adjoint.p1.empty())
        throw std::invalid_argument("compute_MR: first-order adjoint not solved");

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const double dt = plan.grid.dt();
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);

    // Cumulative per-sample window increments: C(j,i,m) accumulates
    // h_x dY - h*h_x dt from node 0, so the window over [k, m) is a difference.
    Tensor3 C(M, N, K + 1);
    parallel_over(M, [&](std::size_t j) {
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            C(j, i, 0) = 0.0;
            for (std::size_t r = 0; r < K; ++r) {
                const double tr = plan.grid.node(r);
                const double x = forward.X(j, i, r);
                const double u = u_base(j, r);
                const double hx = coeffs.h_x ? coeffs.h_x(tr, x, forward.mu[r], u) : 0.0;
                if (hx != 0.0) {
                    const double hv = coeffs.h(tr, x, forward.mu[r], u);
                    acc += hx * plan.dY(j, r) - hv * hx * dt;
                }
                C(j, i, r + 1) = acc;
            }
        }
    });

    // Per-path interpolants of the copy-averaged Hamiltonian measure
    // derivatives, the x-derivative conditional term and the density sums.
    Tensor2 GH(M, K), GZ(M, K), E2(M, K), SL(M, K + 1);
    std::vector<double> gphi(M), gzphi(M);
    for (std::size_t m = 0; m <= K; ++m) {
        const EmpiricalMeasure& mu = forward.mu[m];
        const YGrid grid = YGrid::span_with_zero(mu.min_atom(), mu.max_atom());
        std::vector<double> gH, gZ;
        if (m < K) {
            const double t = plan.grid.node(m);
            gH = hamiltonian_measure_grid(grid, coeffs.sigma_mu, coeffs.h_mu, coeffs.f_mu, t,
                                          forward, first_adjoint, u_base, m, mu);
            gZ = hamiltonian_measure_grid(grid, coeffs.sigma_zmu, coeffs.h_zmu, coeffs.f_zmu,
                                          t, forward, first_adjoint, u_base, m, mu);
        } else {
            gH = terminal_measure_grid(grid, coeffs.Phi_mu, forward, K);
            gZ = terminal_measure_grid(grid, coeffs.Phi_zmu, forward, K);
        }
        for (std::size_t j = 0; j < M; ++j) {
            double sl = 0.0;
            for (std::size_t i = 0; i < N; ++i) sl += forward.L(j, i, m);
            if (sl < kDensityFloor) throw std::runtime_error("compute_MR: density mean underflow");
            SL(j, m) = sl;
            if (m < K) {
                const double t = plan.grid.node(m);
                GH(j, m) = grid.interp(gH, forward.U(j, m));
                GZ(j, m) = grid.interp(gZ, forward.U(j, m));
                double e2 = 0.0;
                if (coeffs.h_x) {
                    const double u = u_base(j, m);
                    for (std::size_t i = 0; i < N; ++i)
                        e2 += coeffs.h_x(t, forward.X(j, i, m), mu, u) *
                              first_adjoint.q2(j, i, m);
                }
                E2(j, m) = e2 / static_cast<double>(N);
            } else {
                gphi[j] = grid.interp(gH, forward.U(j, K));
                gzphi[j] = grid.interp(gZ, forward.U(j, K));
            }
        }
    }

    MRResult out;
    out.M = Tensor2(M, K + 1);
    out.R = Tensor2(M, K + 1);
    out.r2_M.assign(K + 1, 0.0);
    out.r2_R.assign(K + 1, 0.0);
    const double invN = 1.0 / static_cast<double>(N);

    std::vector<double> target_M(M), target_R(M);
    for (std::size_t k = 0; k <= K; ++k) {
        parallel_over(M, [&](std::size_t j) {
            // One block per future node m, phi evaluated at the scan time k.
            // The window factor g_window feeds M; the brace in R carries only
            // the pure measure-derivative factor g_brace.
            auto block = [&](std::size_t m, double g_window, double g_brace, double g_zmu,
                             double& accM, double& accR) {
                double s_lc = 0.0, s_lphi = 0.0, s_lxu = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    const double l = forward.L(j, i, m);
                    const double phi = coeffs.phi_h(forward.X(j, i, k));
                    s_lc += l * (C(j, i, m) - C(j, i, k));
                    s_lphi += l * phi;
                    s_lxu += l * (forward.X(j, i, m) - forward.U(j, m)) * phi;
                }
                const double e_phi = s_lphi / SL(j, m);
                const double m_lphi = s_lphi * invN;
                const double a = s_lxu / SL(j, m);
                accM += g_window * s_lc * invN;
                double r = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    const double l = forward.L(j, i, m);
                    r += a * (g_brace * m_lphi - g_brace * l * e_phi) +
                         0.5 * a * a * g_zmu * l;
                }
                accR += r * invN;
            };
            double accM = 0.0, accR = 0.0;
            block(K, gphi[j], gphi[j], gzphi[j], accM, accR);
            accM = -accM;
            accR = -accR;
            for (std::size_t m = k; m < K; ++m) {
                double bM = 0.0, bR = 0.0;
                block(m, GH(j, m) + E2(j, m), GH(j, m), GZ(j, m), bM, bR);
                accM += bM * dt;
                accR += bR * dt;
            }
            target_M[j] = accM;
            target_R[j] = accR;
        });
        const auto rows = observation_rows(y_paths, k);
        RegressionResult rm = regress_conditional(target_M, rows);
        RegressionResult rr = regress_conditional(target_R, rows);
        out.r2_M[k] = rm.r_squared;
        out.r2_R[k] = rr.r_squared;
        for (std::size_t j = 0; j < M; ++j) {
            out.M(j, k) = rm.fitted[j];
            out.R(j, k) = rr.fitted[j];
        }
    }
    return out;
}

SMPReport smp_scan(const CoefficientSet& coeffs, const ForwardState& forward,
                   const AdjointState& adjoint, const ControlPolicy& control,
                   const NoisePlan& plan, const std::vector<double>& candidates,
                   ScanVariant variant) {
    coeffs.validate();
    if (candidates.empty()) throw std::invalid_argument("smp_scan: no candidate controls");
    for (double v : candidates)
        if (std::find(control.U_set.begin(), control.U_set.end(), v) == control.U_set.end())
            throw std::invalid_argument("smp_scan: candidate outside the admissible set");
    if (adjoint.p1.empty() || adjoint.P1.empty())
        throw std::invalid_argument("smp_scan: both adjoint orders must be solved");

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const std::size_t V = candidates.size();
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(control, y_paths, plan.grid);

    SMPReport rep;
    rep.variant = variant;
    rep.candidates = candidates;
    rep.gap = Tensor2(V, K);
    rep.gap_se = Tensor2(V, K);
    rep.gap_max = Tensor2(V, K);
    rep.Gamma1 = Tensor3(M, N, K + 1);
    rep.Gamma = Tensor3(M, N, K + 1);

    Tensor2 mean_L(M, K + 1);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t k = 0; k <= K; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < N; ++i) acc += forward.L(j, i, k);
            acc /= static_cast<double>(N);
            if (acc < kDensityFloor) throw std::runtime_error("smp_scan: density mean underflow");
            mean_L(j, k) = acc;
            for (std::size_t i = 0; i < N; ++i) {
                rep.Gamma1(j, i, k) = forward.L(j, i, k) / acc;
                rep.Gamma(j, i, k) = (forward.X(j, i, k) - forward.U(j, k)) / acc;
            }
        }

    if (variant == ScanVariant::Main) {
        MRResult mr = compute_MR(coeffs, forward, adjoint, control, plan);
        rep.M = std::move(mr.M);
        rep.R = std::move(mr.R);
        rep.r2_M = std::move(mr.r2_M);
        rep.r2_R = std::move(mr.r2_R);
    } else {
        rep.M = Tensor2(M, K + 1);
        rep.R = Tensor2(M, K + 1);
    }

    const bool main_variant = variant == ScanVariant::Main;
    parallel_over(V, [&](std::size_t vi) {
        const double v = candidates[vi];
        std::vector<double> g(M);
        for (std::size_t k = 0; k < K; ++k) {
            const double t = plan.grid.node(k);
            const EmpiricalMeasure& mu = forward.mu[k];
            for (std::size_t j = 0; j < M; ++j) {
                const double u = u_base(j, k);
                if (v == u) {
                    g[j] = 0.0;
                    continue;
                }
                double dh1 = 0.0;
                if (main_variant && coeffs.h1) dh1 = coeffs.h1(t, mu, v) - coeffs.h1(t, mu, u);
                const double r_term = main_variant ? rep.R(j, k) * dh1 * dh1 : 0.0;
                const double m_jk = main_variant ? rep.M(j, k) : 0.0;
                double acc = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    const double x = forward.X(j, i, k);
                    const double l = forward.L(j, i, k);
                    const double q1 = adjoint.q1(j, i, k);
                    const double q2 = adjoint.q2(j, i, k);
                    const double dH = hamiltonian(t, x, l, mu, v, q1, q2, coeffs) -
                                      hamiltonian(t, x, l, mu, u, q1, q2, coeffs);
                    const double dsig = coeffs.sigma(t, x, mu, v) - coeffs.sigma(t, x, mu, u);
                    acc += dH + (0.5 * adjoint.P1(j, i, k) + m_jk) * dsig * dsig + r_term;
                }
                g[j] = acc / static_cast<double>(N);
            }
            double wsum = 0.0, mean = 0.0;
            for (std::size_t j = 0; j < M; ++j) {
                wsum += mean_L(j, k);
                mean += mean_L(j, k) * g[j];
            }
            mean /= wsum;
            double var = 0.0;
            double worst = g[0];
            for (std::size_t j = 0; j < M; ++j) {
                var += mean_L(j, k) * (g[j] - mean) * (g[j] - mean);
                worst = std::max(worst, g[j]);
            }
            var /= wsum;
            rep.gap(vi, k) = mean;
            rep.gap_se(vi, k) = std::sqrt(var / static_cast<double>(M));
            rep.gap_max(vi, k) = worst;
        }
    });

    rep.verdict = rep.gap(0, 0);
    rep.argmax_candidate = 0;
    rep.argmax_node = 0;
    for (std::size_t vi = 0; vi < V; ++vi)
        for (std::size_t k = 0; k < K; ++k)
            if (rep.gap(vi, k) > rep.verdict) {
                rep.verdict = rep.gap(vi, k);
                rep.argmax_candidate = vi;
                rep.argmax_node = k;
            }
    rep.verdict_se = rep.gap_se(rep.argmax_candidate, rep.argmax_node);
    return rep;
}

BruteForceResult brute_force_control(const CoefficientSet& coeffs, const NoisePlan& plan,
                                     const std::vector<double>& U_set, std::size_t blocks,
                                     double picard_tol, std::size_t max_iter) {
    if (U_set.empty()) throw std::invalid_argument("brute_force_control: empty control set");
    if (blocks == 0) throw std::invalid_argument("brute_force_control: need at least one block");
    std::size_t total = 1;
    for (std::size_t b = 0; b < blocks; ++b) {
        total *= U_set.size();
        if (total > kSearchCap)
            throw std::invalid_argument(
                "brute_force_control: search space exceeds 4096 policies");
    }

    const Tensor2 y_paths = observed_paths(plan);
    BruteForceResult out;
    out.costs.resize(total);
    out.cost_se.resize(total);
    bool have_best = false;
    for (std::size_t n = 0; n < total; ++n) {
        std::vector<std::size_t> choice(blocks);
        std::size_t rem = n;
        for (std::size_t b = blocks; b-- > 0;) {
            choice[b] = rem % U_set.size();
            rem /= U_set.size();
        }
        ControlPolicy policy = block_policy(U_set, choice, plan.grid.T);
        ForwardState state = picard_forward(coeffs, policy, plan, picard_tol, max_iter);
        const Tensor2 u_base = control_values(policy, y_paths, plan.grid);
        const std::vector<double> per_path = per_path_cost(coeffs, state, u_base, plan);
        double mean = 0.0;
        for (double c : per_path) mean += c;
        mean /= static_cast<double>(per_path.size());
        double var = 0.0;
        for (double c : per_path) var += (c - mean) * (c - mean);
        var /= static_cast<double>(per_path.size());
        out.costs[n] = state.cost;
        out.cost_se[n] = std::sqrt(var / static_cast<double>(per_path.size()));
        if (!have_best || state.cost < out.best_cost) {
            have_best = true;
            out.best_cost = state.cost;
            out.best_cost_se = out.cost_se[n];
            out.best_index = n;
            out.choice = choice;
            out.policy = std::move(policy);
        }
    }
    return out;
}

}  // namespace mfsmp
