#include "mfsmp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mfsmp/adjoint.hpp"
#include "mfsmp/forward.hpp"
#include "mfsmp/maximum_principle.hpp"
#include "mfsmp/noise.hpp"
#include "mfsmp/presets.hpp"
#include "mfsmp/variation.hpp"

namespace mfsmp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void add_row(ReportBundle& b, std::string quantity, std::int64_t index, double value,
             double se) {
    b.rows.push_back(CsvRow{std::move(quantity), index, value, se});
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    var /= static_cast<double>(xs.size());
    out.se = std::sqrt(var / static_cast<double>(xs.size()));
    return out;
}

std::vector<double> per_path_cost(const CoefficientSet& co, const ForwardState& st,
                                  const Tensor2& u_base, const NoisePlan& plan) {
    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const double dt = plan.grid.dt();
    std::vector<double> cost(M, 0.0);
    for (std::size_t j = 0; j < M; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double sample = co.Phi(st.X(j, i, K), st.mu[K]);
            for (std::size_t k = 0; k < K; ++k)
                sample += co.f(plan.grid.node(k), st.X(j, i, k), st.mu[k], u_base(j, k)) * dt;
            acc += sample;
        }
        cost[j] = acc / static_cast<double>(N);
    }
    return cost;
}

bool linear_filter_shape(const InlineCoefficients& ic) {
    const bool phi_inactive =
        ic.phi_kind == "zero" || (ic.g0 == 0.0 && ic.gu == 0.0 && ic.gm == 0.0);
    return ic.hx != 0.0 && phi_inactive && ic.hc == 0.0 && ic.hm == 0.0 && ic.hv == 0.0 &&
           ic.su == 0.0 && ic.sm == 0.0 && ic.sv == 0.0 && ic.s0 > 0.0;
}

bool control_responsive(const InlineCoefficients& ic) {
    return ic.su != 0.0 || (ic.phi_kind != "zero" && ic.gu != 0.0);
}

ControlPolicy base_policy_of(const ExperimentConfig& cfg) {
    std::vector<std::size_t> choice = cfg.base_policy;
    if (choice.empty()) choice.assign(cfg.blocks, 0);
    return block_policy(cfg.U_set, choice, cfg.grid.T);
}

bool pipeline_forward(const ExperimentConfig& cfg, const CoefficientSet& co,
                      const NoisePlan& plan, ReportBundle& b, ordered_json& js) {
    const ControlPolicy policy = base_policy_of(cfg);
    const ForwardState st =
        picard_forward(co, policy, plan, cfg.picard_tol, cfg.picard_max_iter);
    const std::size_t M = plan.M_outer, N = plan.N_inner, K = plan.grid.K;
    const Tensor2 y_paths = observed_paths(plan);
    const Tensor2 u_base = control_values(policy, y_paths, plan.grid);

    const MeanSe cost = mean_se(per_path_cost(co, st, u_base, plan));
    add_row(b, "forward.cost", 0, st.cost, cost.se);
    for (std::size_t k = 0; k <= K; ++k) {
        std::vector<double> l_means(M), u_vals(M);
        for (std::size_t j = 0; j < M; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < N; ++i) acc += st.L(j, i, k);
            l_means[j] = acc / static_cast<double>(N);
            u_vals[j] = st.U(j, k);
        }
        const MeanSe lm = mean_se(l_means);
        const MeanSe um = mean_se(u_vals);
        add_row(b, "forward.L_mean", static_cast<std::int64_t>(k), lm.mean, lm.se);
        add_row(b, "forward.U_mean", static_cast<std::int64_t>(k), um.mean, um.se);
    }
    for (std::size_t m = 0; m < st.gap_history.size(); ++m)
        add_row(b, "forward.picard_gap", static_cast<std::int64_t>(m), st.gap_history[m], 0.0);

    js["iterations"] = st.iterations;
    js["cost"] = st.cost;
    js["cost_se"] = cost.se;
    js["warnings"] = st.warnings;
    js["pass"] = true;
    return true;
}

bool pipeline_filter_check(const ExperimentConfig& cfg, const CoefficientSet& co,
                           const NoisePlan& plan, ReportBundle& b, ordered_json& js) {
    if (!linear_filter_shape(cfg.coeffs))
        throw std::invalid_argument(
            "filter-check requires the linear-filtering shape (h = hx*x, constant sigma)");
    const ControlPolicy policy = base_policy_of(cfg);
    const ForwardState st =
        picard_forward(co, policy, plan, cfg.picard_tol, cfg.picard_max_iter);
    const Tensor2 fkk = fkk_filter(co, policy, st, plan);

    // Exact gain for dX = s dB, dY = hx X dt + dW with a deterministic start:
    // the error variance solves P' = s^2 - hx^2 P^2, P(0) = 0.
    const double s = cfg.coeffs.s0;
    const double hx = cfg.coeffs.hx;
    const std::size_t M = plan.M_outer, K = plan.grid.K;
    const double dt = plan.grid.dt();
    auto gain = [&](double t) { return (s / hx) * std::tanh(s * hx * t); };

    double sup_err = 0.0;
    std::vector<double> kb_mean(K + 1, 0.0), fkk_mean(K + 1, 0.0);
    for (std::size_t j = 0; j < M; ++j) {
        double u_kb = co.x0;
        sup_err = std::max(sup_err, std::abs(fkk(j, 0) - u_kb));
        kb_mean[0] += u_kb;
        fkk_mean[0] += fkk(j, 0);
        for (std::size_t k = 0; k < K; ++k) {
            const double p = gain(plan.grid.node(k));
            u_kb += p * hx * (plan.dY(j, k) - hx * u_kb * dt);
            sup_err = std::max(sup_err, std::abs(fkk(j, k + 1) - u_kb));
            kb_mean[k + 1] += u_kb;
            fkk_mean[k + 1] += fkk(j, k + 1);
        }
    }
    for (std::size_t k = 0; k <= K; ++k) {
        kb_mean[k] /= static_cast<double>(M);
        fkk_mean[k] /= static_cast<double>(M);
        add_row(b, "filter.fkk_mean", static_cast<std::int64_t>(k), fkk_mean[k], 0.0);
        add_row(b, "filter.kb_mean", static_cast<std::int64_t>(k), kb_mean[k], 0.0);
        add_row(b, "filter.kb_gain", static_cast<std::int64_t>(k), gain(plan.grid.node(k)),
                0.0);
    }
    add_row(b, "filter.sup_error", 0, sup_err, 0.0);

    const bool pass = sup_err <= 0.1;
    js["sup_error"] = sup_err;
    js["pass"] = pass;
    return pass;
}

ControlPolicy alt_policy_of(const ExperimentConfig& cfg) {
    return constant_policy({cfg.spike_alt}, cfg.spike_alt);
}

bool pipeline_taylor(const ExperimentConfig& cfg, const CoefficientSet& co,
                     const NoisePlan& plan, ReportBundle& b, ordered_json& js) {
    const ControlPolicy policy = base_policy_of(cfg);
    const TaylorReport rep =
        taylor_orders(co, policy, cfg.spike_t0, alt_policy_of(cfg), cfg.eps_ladder, plan,
                      cfg.picard_tol, cfg.picard_max_iter);

    const struct {
        const char* name;
        const std::vector<double>* values;
    } series[] = {
        {"taylor.e0_x", &rep.e0_X}, {"taylor.e1_x", &rep.e1_X}, {"taylor.e2_x", &rep.e2_X},
        {"taylor.e0_l", &rep.e0_L}, {"taylor.e1_l", &rep.e1_L}, {"taylor.e2_l", &rep.e2_L},
        {"taylor.e0_u", &rep.e0_U}, {"taylor.e1_u", &rep.e1_U}, {"taylor.e2_u", &rep.e2_U},
    };
    for (const auto& sr : series)
        for (std::size_t r = 0; r < sr.values->size(); ++r)
            add_row(b, sr.name, static_cast<std::int64_t>(r), (*sr.values)[r], 0.0);
    for (std::size_t r = 0; r < rep.eps_effective.size(); ++r)
        add_row(b, "taylor.eps_effective", static_cast<std::int64_t>(r), rep.eps_effective[r],
                0.0);

    auto slope_block = [](double s0, double s1, double s2) {
        ordered_json o;
        o["order0"] = s0;
        o["order1"] = s1;
        o["order2"] = s2;
        return o;
    };
    ordered_json slopes;
    slopes["X"] = slope_block(rep.slope_e0_X, rep.slope_e1_X, rep.slope_e2_X);
    slopes["L"] = slope_block(rep.slope_e0_L, rep.slope_e1_L, rep.slope_e2_L);
    slopes["U"] = slope_block(rep.slope_e0_U, rep.slope_e1_U, rep.slope_e2_U);
    js["slopes"] = slopes;
    js["smallness"] = rep.smallness;
    js["composite"] = rep.composite;

    // A residual series at machine scale satisfies its order vacuously; the
    // fitted slope of rounding noise means nothing.
    constexpr double kFloor = 1e-10;
    auto degenerate = [&](const std::vector<double>& e) {
        return *std::max_element(e.begin(), e.end()) <= kFloor;
    };
    auto ok = [&](const std::vector<double>& e0, const std::vector<double>& e1,
                  const std::vector<double>& e2, double s0, double s1, double s2) {
        const bool ok0 = degenerate(e0) || s0 >= 0.4;
        const bool ok1 = degenerate(e1) || s1 >= 0.85;
        const bool ok2 = degenerate(e2) || s2 >= s1 + 0.1;
        return ok0 && ok1 && ok2;
    };
    const bool pass =
        ok(rep.e0_X, rep.e1_X, rep.e2_X, rep.slope_e0_X, rep.slope_e1_X, rep.slope_e2_X) &&
        ok(rep.e0_L, rep.e1_L, rep.e2_L, rep.slope_e0_L, rep.slope_e1_L, rep.slope_e2_L) &&
        ok(rep.e0_U, rep.e1_U, rep.e2_U, rep.slope_e0_U, rep.slope_e1_U, rep.slope_e2_U);
    js["pass"] = pass;
    return pass;
}

bool pipeline_duality(const ExperimentConfig& cfg, const CoefficientSet& co,
                      const NoisePlan& plan, ReportBundle& b, ordered_json& js) {
    const ControlPolicy policy = base_policy_of(cfg);
    const ForwardState st =
        picard_forward(co, policy, plan, cfg.picard_tol, cfg.picard_max_iter);
    const AdjointState adj = solve_first_adjoint(co, st, policy, plan, cfg.spike_t0);

    std::vector<double> rels, ratios;
    for (std::size_t r = 0; r < cfg.eps_ladder.size(); ++r) {
        const SpikeSpec spike{cfg.spike_t0, cfg.eps_ladder[r], alt_policy_of(cfg)};
        const VariationState var = solve_first_variation(co, st, policy, spike, plan);
        const DualityReport rep = duality_check(co, st, var, adj, policy, plan);
        add_row(b, "duality.lhs", static_cast<std::int64_t>(r), rep.lhs, 0.0);
        add_row(b, "duality.rhs", static_cast<std::int64_t>(r), rep.rhs, 0.0);
        add_row(b, "duality.abs_residual", static_cast<std::int64_t>(r), rep.abs_residual,
                0.0);
        add_row(b, "duality.rel_residual", static_cast<std::int64_t>(r), rep.rel_residual,
                0.0);
        add_row(b, "duality.residual_over_eps", static_cast<std::int64_t>(r),
                rep.residual_over_eps, 0.0);
        rels.push_back(rep.rel_residual);
        ratios.push_back(rep.residual_over_eps);
    }

    std::size_t ref = cfg.eps_ladder.size() - 1;
    for (std::size_t r = 0; r < cfg.eps_ladder.size(); ++r)
        if (cfg.eps_ladder[r] == 0.05) ref = r;
    // Rungs where the identity already holds to numerical precision carry no
    // order information, so they do not count against monotonicity.
    constexpr double kRatioFloor = 1e-6;
    std::size_t inversions = 0;
    for (std::size_t r = 0; r + 1 < ratios.size(); ++r)
        if (!(ratios[r + 1] < ratios[r]) && ratios[r + 1] > kRatioFloor) ++inversions;

    const bool pass = rels[ref] <= 0.1 && inversions <= 1;
    js["rel_residual"] = rels;
    js["residual_over_eps"] = ratios;
    js["reference_rung"] = ref;
    js["rel_at_reference"] = rels[ref];
    js["inversions"] = inversions;
    js["pass"] = pass;
    return pass;
}

bool pipeline_brute_force(const ExperimentConfig& cfg, const CoefficientSet& co,
                          const NoisePlan& plan, ReportBundle& b, ordered_json& js) {
    const BruteForceResult bf = brute_force_control(co, plan, cfg.U_set, cfg.blocks,
                                                   cfg.picard_tol, cfg.picard_max_iter);
    for (std::size_t n = 0; n < bf.costs.size(); ++n)
        add_row(b, "brute.policy_cost", static_cast<std::int64_t>(n), bf.costs[n],
                bf.cost_se[n]);
    js["best_index"] = bf.best_index;
    js["best_choice"] = bf.choice;
    js["best_cost"] = bf.best_cost;
    js["best_cost_se"] = bf.best_cost_se;
    js["policies"] = bf.costs.size();
    js["certified_relative_to"] = "block-constant deterministic policies";
    js["pass"] = true;
    return true;
}

bool pipeline_smp_scan(const ExperimentConfig& cfg, const CoefficientSet& co,
                       const NoisePlan& plan, ReportBundle& b, ordered_json& js) {
    ControlPolicy policy;
    if (cfg.base_policy.empty()) {
        const BruteForceResult bf = brute_force_control(co, plan, cfg.U_set, cfg.blocks,
                                                        cfg.picard_tol, cfg.picard_max_iter);
        policy = bf.policy;
        js["policy_choice"] = bf.choice;
        js["policy_source"] = "brute-force optimum";
    } else {
        policy = block_policy(cfg.U_set, cfg.base_policy, cfg.grid.T);
        js["policy_choice"] = cfg.base_policy;
        js["policy_source"] = "config base_policy";
    }
    const ForwardState st =
        picard_forward(co, policy, plan, cfg.picard_tol, cfg.picard_max_iter);
    const AdjointState adj1 = solve_first_adjoint(co, st, policy, plan, cfg.spike_t0);
    const AdjointState adj2 =
        solve_second_adjoint(co, st, policy, adj1, plan, cfg.spike_t0);
    const ScanVariant variant = cfg.mode == FilterMode::ConditionalLaw ? ScanVariant::Main
                                                                       : ScanVariant::Appendix;
    const SMPReport rep = smp_scan(co, st, adj2, policy, plan, cfg.U_set, variant);

    const std::size_t K = plan.grid.K, M = plan.M_outer;
    for (std::size_t vi = 0; vi < rep.candidates.size(); ++vi) {
        const std::string tag = "smp.gap_v" + std::to_string(vi);
        const std::string tag_max = "smp.gap_max_v" + std::to_string(vi);
        for (std::size_t k = 0; k < K; ++k) {
            add_row(b, tag, static_cast<std::int64_t>(k), rep.gap(vi, k), rep.gap_se(vi, k));
            add_row(b, tag_max, static_cast<std::int64_t>(k), rep.gap_max(vi, k), 0.0);
        }
    }
    if (variant == ScanVariant::Main) {
        for (std::size_t k = 0; k <= K; ++k) {
            std::vector<double> m_col(M), r_col(M);
            for (std::size_t j = 0; j < M; ++j) {
                m_col[j] = rep.M(j, k);
                r_col[j] = rep.R(j, k);
            }
            const MeanSe mm = mean_se(m_col);
            const MeanSe rr = mean_se(r_col);
            add_row(b, "smp.M_mean", static_cast<std::int64_t>(k), mm.mean, mm.se);
            add_row(b, "smp.R_mean", static_cast<std::int64_t>(k), rr.mean, rr.se);
        }
    }
    add_row(b, "smp.verdict", 0, rep.verdict, rep.verdict_se);

    const double tol = cfg.tol_smp + 3.0 * rep.verdict_se;
    const bool pass = rep.verdict <= tol;
    js["variant"] = variant == ScanVariant::Main ? "main" : "appendix";
    js["candidates"] = rep.candidates;
    js["verdict"] = rep.verdict;
    js["verdict_se"] = rep.verdict_se;
    js["tolerance"] = tol;
    js["argmax_candidate"] = rep.argmax_candidate;
    js["argmax_node"] = rep.argmax_node;
    if (variant == ScanVariant::Main) {
        js["r2_M_min"] = *std::min_element(rep.r2_M.begin(), rep.r2_M.end());
        js["r2_R_min"] = *std::min_element(rep.r2_R.begin(), rep.r2_R.end());
    }
    js["optimality_label"] = "relative to the block-constant brute-force class";
    js["pass"] = pass;
    return pass;
}

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& config, const std::string& subcommand) {
    config.validate();
    static const std::vector<std::string> known = {
        "forward", "filter-check", "taylor", "duality", "smp-scan", "brute-force", "all"};
    if (std::find(known.begin(), known.end(), subcommand) == known.end())
        throw std::invalid_argument("unknown subcommand '" + subcommand + "'");

    const CoefficientSet co = make_coefficients(config);
    const NoisePlan plan =
        make_plan(config.seed, config.M_outer, config.N_inner, config.grid);

    ReportBundle bundle;
    bundle.experiment_id = config.id;
    bundle.subcommand = subcommand;

    ordered_json pipelines, verdicts;
    auto run_one = [&](const std::string& name) {
        ordered_json js;
        bool pass = true;
        if (name == "forward")
            pass = pipeline_forward(config, co, plan, bundle, js);
        else if (name == "filter-check")
            pass = pipeline_filter_check(config, co, plan, bundle, js);
        else if (name == "taylor")
            pass = pipeline_taylor(config, co, plan, bundle, js);
        else if (name == "duality")
            pass = pipeline_duality(config, co, plan, bundle, js);
        else if (name == "brute-force")
            pass = pipeline_brute_force(config, co, plan, bundle, js);
        else if (name == "smp-scan")
            pass = pipeline_smp_scan(config, co, plan, bundle, js);
        pipelines[name] = std::move(js);
        verdicts[name] = pass;
        return pass;
    };

    bool all_pass = true;
    if (subcommand == "all") {
        all_pass = run_one("forward") && all_pass;
        if (linear_filter_shape(config.coeffs)) all_pass = run_one("filter-check") && all_pass;
        if (control_responsive(config.coeffs)) {
            all_pass = run_one("taylor") && all_pass;
            all_pass = run_one("duality") && all_pass;
        }
        if (config.U_set.size() >= 2) {
            all_pass = run_one("brute-force") && all_pass;
            all_pass = run_one("smp-scan") && all_pass;
        }
    } else {
        all_pass = run_one(subcommand);
    }

    ordered_json summary;
    summary["experiment_id"] = config.id;
    summary["subcommand"] = subcommand;
    summary["noise_plan_hash"] = hash_hex(plan_content_hash(plan));
    summary["verdicts"] = std::move(verdicts);
    summary["pipelines"] = std::move(pipelines);
    summary["config_text"] = serialize_config(config);
    bundle.summary = std::move(summary);
    bundle.exit_code = all_pass ? 0 : 2;
    bundle.summary["exit_code"] = bundle.exit_code;
    return bundle;
}

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("emit_report: cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw std::runtime_error("emit_report: write failed " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

ReportPaths emit_report(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string stem = bundle.experiment_id + "_" + bundle.subcommand;
    ReportPaths paths;
    paths.csv = out_dir / (stem + ".csv");
    paths.json = out_dir / (stem + ".json");

    std::string csv = "experiment_id,quantity,index,value,stderr\n";
    for (const CsvRow& row : bundle.rows) {
        char buf[128];
        std::snprintf(buf, sizeof buf, ",%lld,%.17g,%.17g\n",
                      static_cast<long long>(row.index), row.value, row.se);
        csv += bundle.experiment_id + "," + row.quantity + buf;
    }
    atomic_write(paths.csv, csv);
    atomic_write(paths.json, bundle.summary.dump(2) + "\n");
    return paths;
}

}  // namespace mfsmp
