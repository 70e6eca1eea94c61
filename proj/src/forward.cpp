#include "mfsmp/forward.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mfsmp/parallel.hpp"

namespace mfsmp {

namespace {

[[noreturn]] void throw_blowup(const char* where, std::size_t j, std::size_t i, std::size_t k) {
    std::ostringstream msg;
    msg << where << ": non-finite value at (j=" << j << ", i=" << i << ", k=" << k << ")";
    throw std::runtime_error(msg.str());
}

/// Filtered state and flow of laws read off one Euler pass.
struct LawUpdate {
    Tensor2 U;
    Tensor3 U_sample;
    std::vector<EmpiricalMeasure> mu;
};

LawUpdate laws_from_paths(const CoefficientSet& coeffs, const NoisePlan& plan,
                          const Tensor2& y_paths, const Tensor3& X, const Tensor3& L) {
    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    LawUpdate out;
    out.U = Tensor2(M, K + 1);

    if (coeffs.mode == FilterMode::StateFunctional) {
        out.U_sample = Tensor3(M, N, K + 1);
        parallel_over(M, [&](std::size_t j) {
            const auto y = y_paths.row(j);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t k = 0; k <= K; ++k)
                    out.U_sample(j, i, k) = coeffs.state_map(X(j, i, k), y.subspan(0, k + 1));
        });
    }

    std::vector<double> xs(N), ls(N);
    std::vector<double> atoms, weights;
    out.mu.reserve(K + 1);
    for (std::size_t k = 0; k <= K; ++k) {
        atoms.clear();
        weights.clear();
        for (std::size_t j = 0; j < M; ++j) {
            for (std::size_t i = 0; i < N; ++i) {
                xs[i] = coeffs.mode == FilterMode::StateFunctional ? out.U_sample(j, i, k)
                                                                  : X(j, i, k);
                ls[i] = L(j, i, k);
            }
            const double u_jk = conditional_ratio(xs, ls);
            out.U(j, k) = u_jk;
            if (coeffs.mode == FilterMode::StateFunctional) {
                // Law of the filter map across all samples, density weighted.
                for (std::size_t i = 0; i < N; ++i) {
                    atoms.push_back(xs[i]);
                    weights.push_back(ls[i]);
                }
            } else {
                // Atoms are the filtered states; weight = inner density mass.
                atoms.push_back(u_jk);
                weights.push_back(mean_of(ls));
            }
        }
        out.mu.push_back(weighted_law(atoms, weights));
    }
    return out;
}

double cost_of(const CoefficientSet& coeffs, const TimeGrid& grid, const Tensor3& X,
               const std::vector<EmpiricalMeasure>& mu, const Tensor2& u_grid) {
    const std::size_t M = X.dim0(), N = X.dim1(), K = grid.K;
    const double dt = grid.dt();
    double total = 0.0;
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t i = 0; i < N; ++i) {
            double acc = coeffs.Phi(X(j, i, K), mu[K]);
            for (std::size_t k = 0; k < K; ++k)
                acc += coeffs.f(grid.node(k), X(j, i, k), mu[k], u_grid(j, k)) * dt;
            total += acc;
        }
    return total / static_cast<double>(M * N);
}

}  // namespace

Tensor2 control_values(const ControlPolicy& control, const Tensor2& y_paths,
                       const TimeGrid& grid) {
    Tensor2 u(y_paths.dim0(), grid.K);
    for (std::size_t j = 0; j < y_paths.dim0(); ++j) {
        const auto y = y_paths.row(j);
        for (std::size_t k = 0; k < grid.K; ++k)
            u(j, k) = control.u(grid.node(k), y.subspan(0, k + 1));
    }
    return u;
}

ForwardPaths euler_forward_given_mu(const CoefficientSet& coeffs, const ControlPolicy& control,
                                    const NoisePlan& plan,
                                    const std::vector<EmpiricalMeasure>& mu_sequence,
                                    bool use_literal_density) {
    coeffs.validate();
    control.validate();
    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    if (mu_sequence.size() != K + 1)
        throw std::invalid_argument("euler_forward_given_mu: need one law per node");

    const double dt = plan.grid.dt();
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_grid = control_values(control, y_paths, plan.grid);

    ForwardPaths out;
    out.X = Tensor3(M, N, K + 1);
    out.L = Tensor3(M, N, K + 1);
    std::atomic<bool> bound_hit{false};

    parallel_over(M, [&](std::size_t j) {
        for (std::size_t i = 0; i < N; ++i) {
            double x = coeffs.x0;
            double l = 1.0;
            out.X(j, i, 0) = x;
            out.L(j, i, 0) = l;
            for (std::size_t k = 0; k < K; ++k) {
                const double t = plan.grid.node(k);
                const double u = u_grid(j, k);
                const double s = coeffs.sigma(t, x, mu_sequence[k], u);
                const double hh = coeffs.h(t, x, mu_sequence[k], u);
                if (!std::isfinite(s) || !std::isfinite(hh))
                    throw_blowup("euler_forward_given_mu", j, i, k);
                if (std::abs(s) > coeffs.bound || std::abs(hh) > coeffs.bound)
                    bound_hit.store(true, std::memory_order_relaxed);
                x = x + s * plan.dB1(j, i, k);
                if (use_literal_density) {
                    l = l * (1.0 + hh * plan.dY(j, k));
                    if (!(l > 0.0)) throw_blowup("euler_forward_given_mu(literal density)", j, i, k);
                } else {
                    l = l * std::exp(hh * plan.dY(j, k) - 0.5 * hh * hh * dt);
                }
                if (!std::isfinite(x) || !std::isfinite(l))
                    throw_blowup("euler_forward_given_mu", j, i, k);
                out.X(j, i, k + 1) = x;
                out.L(j, i, k + 1) = l;
            }
        }
    });

    if (bound_hit.load())
        out.warnings.push_back(
            "coefficient magnitude exceeded the declared bound; moment estimates are unreliable");
    return out;
}

ForwardState picard_forward(const CoefficientSet& coeffs, const ControlPolicy& control,
                            const NoisePlan& plan, double tol, std::size_t max_iter,
                            bool use_literal_density) {
    if (!(tol > 0.0)) throw std::invalid_argument("picard_forward: tolerance must be positive");
    coeffs.validate();

    const std::size_t K = plan.grid.K;
    const Tensor2 y_paths = observed_paths(plan);
    std::vector<EmpiricalMeasure> mu(K + 1, EmpiricalMeasure::dirac(coeffs.x0));

    ForwardState state;
    for (std::size_t m = 1; m <= max_iter; ++m) {
        ForwardPaths paths = euler_forward_given_mu(coeffs, control, plan, mu, use_literal_density);
        LawUpdate update = laws_from_paths(coeffs, plan, y_paths, paths.X, paths.L);

        double gap = 0.0;
        for (std::size_t k = 0; k <= K; ++k) {
            const double d = wasserstein1(update.mu[k], mu[k]);
            if (d > gap) gap = d;
        }
        state.gap_history.push_back(gap);
        mu = update.mu;

        if (gap <= tol) {
            state.X = std::move(paths.X);
            state.L = std::move(paths.L);
            state.U = std::move(update.U);
            state.U_sample = std::move(update.U_sample);
            state.mu = std::move(mu);
            state.iterations = m;
            state.warnings = std::move(paths.warnings);
            if (plan.N_inner == 1)
                state.warnings.push_back(
                    "N_inner = 1: filtered state equals the single sample path; "
                    "statistically meaningless");
            const Tensor2 u_grid = control_values(control, y_paths, plan.grid);
            state.cost = cost_of(coeffs, plan.grid, state.X, state.mu, u_grid);
            return state;
        }
    }

    std::ostringstream msg;
    msg << "picard_forward: no contraction after " << max_iter << " iterations; law gaps:";
    for (double g : state.gap_history) msg << " " << g;
    throw std::runtime_error(msg.str());
}

Tensor2 fkk_filter(const CoefficientSet& coeffs, const ControlPolicy& control,
                   const ForwardState& forward, const NoisePlan& plan) {
    coeffs.validate();
    if (coeffs.mode != FilterMode::ConditionalLaw)
        throw std::invalid_argument("fkk_filter: requires ConditionalLaw mode");

    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const double dt = plan.grid.dt();
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_grid = control_values(control, y_paths, plan.grid);

    Tensor2 U_fkk(M, K + 1);
    parallel_over(M, [&](std::size_t j) {
        double u_f = coeffs.x0;
        U_fkk(j, 0) = u_f;
        for (std::size_t k = 0; k < K; ++k) {
            const double t = plan.grid.node(k);
            // Density-weighted conditional moments of (X, h) given the
            // observed path, from the inner ensemble.
            double wl = 0.0, wx = 0.0, wh = 0.0, wxh = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double l = forward.L(j, i, k);
                const double x = forward.X(j, i, k);
                const double hh = coeffs.h(t, x, forward.mu[k], u_grid(j, k));
                wl += l;
                wx += l * x;
                wh += l * hh;
                wxh += l * x * hh;
            }
            if (!(wl / static_cast<double>(N) >= 1e-300))
                throw std::runtime_error("fkk_filter: density mean underflow");
            const double ex = wx / wl;
            const double eh = wh / wl;
            const double exh = wxh / wl;
            const double gain = exh - ex * eh;
            u_f = u_f + gain * plan.dY(j, k) + (ex * eh * eh - exh * eh) * dt;
            U_fkk(j, k + 1) = u_f;
        }
    });
    return U_fkk;
}

std::vector<double> contraction_diagnostic(const CoefficientSet& coeffs,
                                           const ControlPolicy& control, const NoisePlan& plan,
                                           std::size_t iterations) {
    if (iterations < 3)
        throw std::invalid_argument("contraction_diagnostic: need at least 3 iterations");
    coeffs.validate();

    const std::size_t K = plan.grid.K;
    const Tensor2 y_paths = observed_paths(plan);
    std::vector<EmpiricalMeasure> mu(K + 1, EmpiricalMeasure::dirac(coeffs.x0));

    std::vector<double> gaps;
    gaps.reserve(iterations);
    for (std::size_t m = 1; m <= iterations; ++m) {
        ForwardPaths paths = euler_forward_given_mu(coeffs, control, plan, mu);
        LawUpdate update = laws_from_paths(coeffs, plan, y_paths, paths.X, paths.L);
        double gap = 0.0;
        for (std::size_t k = 0; k <= K; ++k) {
            const double d = wasserstein1(update.mu[k], mu[k]);
            if (d > gap) gap = d;
        }
        gaps.push_back(gap);
        mu = update.mu;
    }
    return gaps;
}

}  // namespace mfsmp
