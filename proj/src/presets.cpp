#include "mfsmp/presets.hpp"

#include <cmath>
#include <stdexcept>

namespace mfsmp {

namespace {

int phi_code(const std::string& kind) {
    if (kind == "zero") return 0;
    if (kind == "one") return 1;
    if (kind == "identity") return 2;
    if (kind == "tanh") return 3;
    throw std::invalid_argument("make_coefficients: unknown phi_kind '" + kind + "'");
}

double phi_val(int code, double x) {
    switch (code) {
        case 0: return 0.0;
        case 1: return 1.0;
        case 2: return x;
        default: return std::tanh(x);
    }
}

double phi_der(int code, double x) {
    switch (code) {
        case 0:
        case 1: return 0.0;
        case 2: return 1.0;
        default: {
            const double th = std::tanh(x);
            return 1.0 - th * th;
        }
    }
}

double phi_der2(int code, double x) {
    if (code != 3) return 0.0;
    const double th = std::tanh(x);
    return -2.0 * th * (1.0 - th * th);
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "zero-h", "control-only-sigma", "mean-feedback", "linear-filtering", "smp-reference"};
    return names;
}

void apply_preset(ExperimentConfig& c, const std::string& name) {
    if (name == "inline") return;
    c.coeffs = InlineCoefficients{};
    if (name == "zero-h") {
        // Diffusion with mild mean feedback, no observation drift: the
        // density stays exactly one and the filter reduces to plain averages.
        c.coeffs.x0 = 1.0;
        c.coeffs.s0 = 0.3;
        c.coeffs.sm = 0.1;
        c.coeffs.fu = 0.5;
        c.coeffs.px2 = 1.0;
        c.U_set = {0.0};
        c.blocks = 1;
        c.spike_t0 = 0.5;
        c.spike_alt = 0.0;
    } else if (name == "control-only-sigma") {
        // Control enters only through the diffusion; linear terminal cost
        // gives constant adjoint closed forms.
        c.coeffs.x0 = 1.0;
        c.coeffs.s0 = 0.4;
        c.coeffs.su = 0.2;
        c.coeffs.px = 1.0;
        c.U_set = {0.0, 1.0};
        c.blocks = 1;
        c.spike_t0 = 0.25;
        c.spike_alt = 1.0;
    } else if (name == "mean-feedback") {
        // Strong mean coupling in the diffusion to expose the fixed-point
        // contraction rate.  Runs the iteration far past the default stop so
        // the geometric decay of the law gaps is visible over many sweeps.
        c.coeffs.x0 = 1.0;
        c.coeffs.s0 = 0.6;
        c.coeffs.sm = 1.2;
        c.coeffs.px2 = 1.0;
        c.U_set = {0.0};
        c.blocks = 1;
        c.spike_t0 = 0.5;
        c.spike_alt = 0.0;
        c.picard_tol = 1e-11;
        c.picard_max_iter = 60;
    } else if (name == "linear-filtering") {
        // Constant diffusion with h(x) = x: the Kalman-Bucy benchmark.
        // Ships its own scale: the exact-filter comparison needs a finer
        // grid and deeper inner ensemble than the default desk scale.
        c.coeffs.x0 = 0.5;
        c.coeffs.s0 = 1.0;
        c.coeffs.hx = 1.0;
        c.coeffs.px2 = 1.0;
        c.U_set = {0.0};
        c.blocks = 1;
        c.spike_t0 = 0.5;
        c.spike_alt = 0.0;
        c.grid.K = 128;
        c.M_outer = 16;
        c.N_inner = 2048;
    } else if (name == "smp-reference") {
        // Full structural-split configuration: control and measure in the
        // diffusion, split observation drift with a linear state factor, and
        // measure coupling in both costs.  The control action is strong
        // relative to the measure couplings so pairing and inequality
        // checks read signal rather than ensemble noise at desk scale.
        c.coeffs.x0 = 1.0;
        c.coeffs.s0 = 0.35;
        c.coeffs.su = 0.35;
        c.coeffs.sm = 0.03;
        c.coeffs.sv = 0.01;
        c.coeffs.hx = 0.1;
        c.coeffs.hm = 0.02;
        c.coeffs.hv = 0.01;
        c.coeffs.phi_kind = "identity";
        c.coeffs.gu = 0.3;
        c.coeffs.gm = 0.02;
        c.coeffs.fu = 0.5;
        c.coeffs.ustar = 0.15;
        c.coeffs.fx2 = 0.1;
        c.coeffs.fxm = 0.05;
        c.coeffs.fm2 = 0.05;
        c.coeffs.fv = 0.02;
        c.coeffs.px2 = 0.5;
        c.coeffs.pm2 = 0.05;
        c.coeffs.pv = 0.02;
        c.U_set = {0.0, 1.0};
        c.blocks = 4;
        c.spike_t0 = 0.5;
        c.spike_alt = 1.0;
    } else {
        throw std::invalid_argument("apply_preset: unknown preset '" + name + "'");
    }
}

CoefficientSet make_coefficients(const ExperimentConfig& config) {
    const InlineCoefficients ic = config.coeffs;
    const int pc = phi_code(ic.phi_kind);
    CoefficientSet co;
    co.mode = config.mode;
    co.x0 = ic.x0;

    co.sigma = [ic](double, double, const EmpiricalMeasure& mu, double u) {
        return ic.s0 + ic.su * u + ic.sm * mu.mean() + ic.sv * mu.second_moment();
    };
    co.sigma_x_is_zero = true;
    if (ic.sm != 0.0 || ic.sv != 0.0)
        co.sigma_mu = [ic](double, double, const EmpiricalMeasure&, double, double y) {
            return ic.sm + 2.0 * ic.sv * y;
        };
    if (ic.sv != 0.0)
        co.sigma_zmu = [ic](double, double, const EmpiricalMeasure&, double, double) {
            return 2.0 * ic.sv;
        };

    const bool has_h1 = pc != 0 && (ic.g0 != 0.0 || ic.gu != 0.0 || ic.gm != 0.0);
    co.h = [ic, pc](double, double x, const EmpiricalMeasure& mu, double u) {
        const double m1 = mu.mean();
        double v = ic.hc + ic.hx * x + ic.hm * m1 + ic.hv * mu.second_moment();
        v += phi_val(pc, x) * (ic.g0 + ic.gu * u + ic.gm * m1);
        return v;
    };
    if (ic.hx != 0.0 || (has_h1 && pc >= 2))
        co.h_x = [ic, pc](double, double x, const EmpiricalMeasure& mu, double u) {
            return ic.hx + phi_der(pc, x) * (ic.g0 + ic.gu * u + ic.gm * mu.mean());
        };
    if (has_h1 && pc == 3)
        co.h_xx = [ic, pc](double, double x, const EmpiricalMeasure& mu, double u) {
            return phi_der2(pc, x) * (ic.g0 + ic.gu * u + ic.gm * mu.mean());
        };
    if (ic.hm != 0.0 || ic.hv != 0.0 || (has_h1 && ic.gm != 0.0))
        co.h_mu = [ic, pc](double, double x, const EmpiricalMeasure&, double, double y) {
            return ic.hm + 2.0 * ic.hv * y + phi_val(pc, x) * ic.gm;
        };
    if (ic.hv != 0.0)
        co.h_zmu = [ic](double, double, const EmpiricalMeasure&, double, double) {
            return 2.0 * ic.hv;
        };
    if (has_h1) {
        co.h0 = [ic](double, double x, const EmpiricalMeasure& mu) {
            return ic.hc + ic.hx * x + ic.hm * mu.mean() + ic.hv * mu.second_moment();
        };
        co.phi_h = [pc](double x) { return phi_val(pc, x); };
        co.phi_h_x = [pc](double x) { return phi_der(pc, x); };
        co.h1 = [ic](double, const EmpiricalMeasure& mu, double u) {
            return ic.g0 + ic.gu * u + ic.gm * mu.mean();
        };
    }

    co.f = [ic](double, double x, const EmpiricalMeasure& mu, double u) {
        const double m1 = mu.mean();
        const double du = u - ic.ustar;
        return ic.fu * du * du + ic.fx1 * x + ic.fx2 * x * x + ic.fxm * x * m1 +
               ic.fm2 * m1 * m1 + ic.fv * mu.second_moment();
    };
    if (ic.fx1 != 0.0 || ic.fx2 != 0.0 || ic.fxm != 0.0)
        co.f_x = [ic](double, double x, const EmpiricalMeasure& mu, double) {
            return ic.fx1 + 2.0 * ic.fx2 * x + ic.fxm * mu.mean();
        };
    if (ic.fx2 != 0.0)
        co.f_xx = [ic](double, double, const EmpiricalMeasure&, double) { return 2.0 * ic.fx2; };
    if (ic.fxm != 0.0 || ic.fm2 != 0.0 || ic.fv != 0.0)
        co.f_mu = [ic](double, double x, const EmpiricalMeasure& mu, double, double y) {
            return 2.0 * ic.fm2 * mu.mean() + 2.0 * ic.fv * y + ic.fxm * x;
        };
    if (ic.fv != 0.0)
        co.f_zmu = [ic](double, double, const EmpiricalMeasure&, double, double) {
            return 2.0 * ic.fv;
        };

    co.Phi = [ic](double x, const EmpiricalMeasure& mu) {
        const double m1 = mu.mean();
        return ic.px * x + ic.px2 * x * x + ic.pm2 * m1 * m1 + ic.pv * mu.second_moment();
    };
    if (ic.px != 0.0 || ic.px2 != 0.0)
        co.Phi_x = [ic](double x, const EmpiricalMeasure&) { return ic.px + 2.0 * ic.px2 * x; };
    if (ic.px2 != 0.0)
        co.Phi_xx = [ic](double, const EmpiricalMeasure&) { return 2.0 * ic.px2; };
    if (ic.pm2 != 0.0 || ic.pv != 0.0)
        co.Phi_mu = [ic](double, const EmpiricalMeasure& mu, double y) {
            return 2.0 * ic.pm2 * mu.mean() + 2.0 * ic.pv * y;
        };
    if (ic.pv != 0.0)
        co.Phi_zmu = [ic](double, const EmpiricalMeasure&, double) { return 2.0 * ic.pv; };

    if (config.mode == FilterMode::StateFunctional) {
        co.state_map = [](double x, std::span<const double>) { return x; };
        co.state_map_x = [](double, std::span<const double>) { return 1.0; };
    }
    return co;
}

}  // namespace mfsmp
