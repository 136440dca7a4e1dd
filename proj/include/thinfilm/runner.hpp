// Subcommand orchestration: deterministic artifact emission for kernel
// tabulation, IBVP and Cauchy runs, the lemma verification suite, and the
// linear convergence study.
//
// Exit codes: 0 success, 2 config error (handled by the CLI), 3 solver
// non-convergence, 4 blow-up/horizon refusal.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "thinfilm/bounds.hpp"
#include "thinfilm/initial_data.hpp"
#include "thinfilm/io.hpp"
#include "thinfilm/kernel.hpp"
#include "thinfilm/mild.hpp"
#include "thinfilm/rothe.hpp"

namespace thinfilm {

namespace detail {

inline GridPtr make_grid(const RunConfig& cfg) {
    return Grid::make(cfg.extents, cfg.points, cfg.boundary);
}

// lattice Riemann sum of b_N over the table's support; trapezoid on a
// decaying smooth function, so the error is dominated by the table itself
inline double kernel_mass_lattice(const KernelTable& table, double alpha_n,
                                  double t, int points_per_axis) {
    const int N = table.dimension();
    const double t4 = std::pow(t, 0.25);
    const double R = table.eta_max() * t4;
    const double h = 2.0 * R / points_per_axis;
    const double scale = alpha_n * std::pow(t, -0.25 * N);
    double sum = 0.0;
    if (N == 1) {
        for (int i = 0; i < points_per_axis; ++i) {
            const double x = -R + (i + 0.5) * h;
            sum += table.interpolate(std::abs(x) / t4);
        }
        return scale * sum * h;
    }
    for (int i = 0; i < points_per_axis; ++i) {
        const double x = -R + (i + 0.5) * h;
        for (int j = 0; j < points_per_axis; ++j) {
            const double y = -R + (j + 0.5) * h;
            sum += table.interpolate(std::hypot(x, y) / t4);
        }
    }
    return scale * sum * h * h;
}

inline int run_kernel(const RunConfig& cfg, ArtifactWriter& out) {
    QuadratureSpec quad;
    quad.absolute_tolerance = cfg.tol_quad;
    const int N = cfg.kernel_dimension;
    auto table = KernelTable::build(N, cfg.kernel_eta_max, cfg.kernel_resolution,
                                    quad);
    out.write_text("kernel_table.csv", table.to_csv());

    nlohmann::ordered_json meta;
    meta["dimension"] = N;
    meta["eta_max"] = table.eta_max();
    meta["resolution"] = cfg.kernel_resolution;
    meta["quad_tolerance"] = quad.absolute_tolerance;
    meta["envelope_K"] = table.envelope().K;
    meta["envelope_mu"] = table.envelope().mu;
    out.write_text("kernel_meta.json", meta.dump(2) + "\n");

    std::vector<std::pair<std::string, std::vector<double>>> rows;
    auto push = [&](const std::string& name, double value, double reference,
                    bool pass) {
        rows.push_back({name, {value, reference, pass ? 1.0 : 0.0}});
    };

    const double closed = std::pow(2.0, 0.5 * (2 - N)) * std::tgamma(0.25 * N) /
                          (4.0 * std::tgamma(0.5 * N));
    const double f0 = eval_f(N, 0.0, quad);
    push("f0_vs_closed_form", f0, closed, std::abs(f0 - closed) < 1e-10);

    const double alpha_n = alpha_normalization(N, quad);
    const double alpha_exact = std::pow(2.0 * kPi, -0.5 * N);
    push("alpha_vs_exact", alpha_n, alpha_exact,
         std::abs(alpha_n - alpha_exact) < 1e-7 * alpha_exact);

    if (N <= 2) {
        for (double t : {0.25, 1.0, 4.0}) {
            const double mass = kernel_mass_lattice(table, alpha_n, t, 1024);
            push("normalization_t" + format_g17(t), mass, 1.0,
                 std::abs(mass - 1.0) < 1e-6);
        }
    }

    double sup_res = 0.0;
    for (int i = 0; i < 34; ++i) {
        const double eta = 0.1 + (10.0 - 0.1) * i / 33.0;
        sup_res = std::max(sup_res, std::abs(ode_residual(N, eta, quad)));
    }
    push("f1_ode_residual_sup", sup_res, 1e-5, sup_res < 1e-5);

    double f3_gap = 0.0;
    for (int i = 1; i <= 12; ++i) {
        const double eta = i * 0.8;
        const double h = 1e-3;
        const double numeric = (-eval_f(N, eta + 2 * h, quad) +
                                8 * eval_f(N, eta + h, quad) -
                                8 * eval_f(N, eta - h, quad) +
                                eval_f(N, eta - 2 * h, quad)) /
                               (12 * h);
        f3_gap = std::max(f3_gap,
                          std::abs(numeric - eval_f_deriv(N, eta, 1, quad)));
    }
    push("f3_numeric_derivative_gap", f3_gap, 1e-4, f3_gap < 1e-4);

    push("envelope_mu", table.envelope().mu, 0.0, table.envelope().mu > 0.0);
    push("envelope_K", table.envelope().K, 0.0, table.envelope().K > 0.0);
    push("sign_changes", table.sign_changes(), 3.0, table.sign_changes() >= 3);

    for (double frac : {0.0, 0.25, 0.5, 0.75, 0.99}) {
        const double beta = frac * N;
        const double m = radial_moment(N, beta, quad);
        push("moment_beta" + format_g17(beta), m, 0.0, m > 0.0);
    }

    const double m1 = lq_scaling_mass(N, 1, 2.0, 1.0, quad);
    const double m16 = lq_scaling_mass(N, 1, 2.0, 16.0, quad);
    const double ratio = m16 / (std::pow(16.0, 0.25 * N) * m1);
    push("scaling_mass_t16_ratio", ratio, 1.0, std::abs(ratio - 1.0) < 1e-6);

    out.write_labeled_csv("kernel_report.csv", "name,value,reference,pass", rows);
    bool all = true;
    for (const auto& r : rows) all = all && r.second[2] == 1.0;
    return all ? 0 : 3;
}

inline int run_ibvp_cmd(const RunConfig& cfg, ArtifactWriter& out) {
    auto grid = make_grid(cfg);
    auto u0 = make_initial_data(grid, cfg);
    auto spec = make_nonlinearity(cfg, grid, &u0);
    const int N = grid->dimension();
    const double run_alpha = spec.growth_alpha();

    RotheConfig rcfg;
    rcfg.horizon = cfg.horizon;
    rcfg.steps = cfg.steps;
    rcfg.inner_tolerance = cfg.tol_inner;
    rcfg.inner_max_iterations = cfg.inner_max_iterations;
    rcfg.alpha = run_alpha;
    rcfg.allow_unsupported = cfg.allow_unsupported;

    std::string note;
    AlphaRegime regime = alpha_classify(N, run_alpha);
    if (regime == AlphaRegime::unsupported && spec.conservative())
        regime = AlphaRegime::global;
    if (regime == AlphaRegime::local) {
        const auto info = gronwall_horizon_info(u0, run_alpha, N, cfg.horizon_c1,
                                                cfg.horizon_c2, cfg.horizon_k);
        note = "gronwall_horizon=" + format_g17(info.horizon) +
               " sigma=" + format_g17(info.sigma) +
               " k=" + std::to_string(info.k_used);
        if (cfg.horizon >= info.horizon && !cfg.allow_unsupported) {
            out.write_manifest(cfg, 4,
                               note + " ; requested horizon reaches the blow-up "
                                      "bound; refusing the run");
            return 4;
        }
    }

    Trajectory traj = run_ibvp(u0, spec, rcfg);

    // trajectory.csv with the energy-or-NA column
    std::string tcsv = "t,l2,grad_l2,lap_l2,mass,energy\n";
    for (int k = 0; k <= traj.completed_steps(); ++k) {
        const ScalarField& u = traj.knot(k);
        const double t = k * traj.tau();
        tcsv += format_g17(t);
        tcsv += ',' + format_g17(lp_norm(u, 2.0));
        tcsv += ',' + format_g17(lp_norm(gradient(u), 2.0));
        tcsv += ',' + format_g17(lp_norm(laplacian(u), 2.0));
        tcsv += ',' + format_g17(integral(u));
        tcsv += ',';
        tcsv += spec.conservative() ? format_g17(lyapunov_energy(u, spec)) : "NA";
        tcsv += '\n';
    }
    out.write_text("trajectory.csv", tcsv);

    const EstimateReport rep = estimate_report(
        traj, run_alpha, spec.conservative() ? &spec : nullptr);
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    rows.push_back({"sup_h1", {rep.sup_h1}});
    rows.push_back({"tau_sup_u2", {rep.tau_sup_u2}});
    rows.push_back({"int_psi_h1", {rep.int_psi_h1}});
    rows.push_back({"tau_int_psi2", {rep.tau_int_psi2}});
    rows.push_back({"int_grad_2alpha", {rep.int_grad_2alpha}});
    out.write_labeled_csv("estimate_report.csv", "entry,value", rows);

    for (std::size_t s = 0; s < cfg.snapshot_times.size(); ++s) {
        const double t = cfg.snapshot_times[s];
        const int k = std::clamp(static_cast<int>(std::lround(t / traj.tau())), 0,
                                 traj.completed_steps());
        const std::string stem = "snapshot_" + std::to_string(s);
        out.write_field_csv(stem + ".csv", traj.knot(k));
        out.write_field_raw(stem, traj.knot(k));
    }

    int code = 0;
    if (!traj.complete()) {
        code = traj.blew_up() ? 4 : 3;
        note += (note.empty() ? "" : " ; ") + *traj.failure();
    }
    out.write_manifest(cfg, code, note);
    return code;
}

inline int run_cauchy(const RunConfig& cfg, ArtifactWriter& out) {
    auto grid = make_grid(cfg);
    auto u0 = make_initial_data(grid, cfg);
    auto spec = make_nonlinearity(cfg, grid, &u0);

    PicardConfig pcfg;
    pcfg.horizon = cfg.horizon;
    pcfg.max_iterations = cfg.picard_max_iterations;
    pcfg.tolerance = cfg.tol_inner;
    pcfg.time_samples = cfg.picard_time_samples;
    pcfg.quad_points = cfg.picard_quad_points;
    pcfg.duhamel_residual_tolerance = cfg.tol_duhamel;
    pcfg.wrap_tolerance = cfg.tol_wrap;

    std::string note;
    int code = 0;
    std::string mcsv = "window,k,a_k,b_k,d_k,d_ratio\n";
    ScalarField current = u0;
    std::vector<PicardRun> runs;
    for (int w = 0; w < cfg.windows; ++w) {
        PicardRun run;
        try {
            run = picard_solve(current, spec, pcfg);
        } catch (const SolverError& err) {
            note = err.what();
            code = 3;
            break;
        }
        for (std::size_t k = 0; k < run.monitors.size(); ++k) {
            const auto& st = run.monitors[k];
            mcsv += std::to_string(w) + ',' + std::to_string(st.k);
            mcsv += ',' + format_g17(st.a_k);
            mcsv += ',' + format_g17(st.b_k);
            mcsv += ',' + format_g17(st.d_k);
            const double prev = k >= 2 ? run.monitors[k - 1].d_k : 0.0;
            mcsv += ',' + (k >= 2 && prev > 0.0 ? format_g17(st.d_k / prev)
                                                : std::string("NA"));
            mcsv += '\n';
        }
        if (!run.converged) {
            note = "picard window " + std::to_string(w) +
                   " hit the iteration cap without meeting tolerance";
            code = 3;
        }
        current = run.iterate.back();
        runs.push_back(std::move(run));
        if (code != 0) break;
    }
    out.write_text("picard_monitors.csv", mcsv);

    if (!runs.empty()) {
        // decay fit of the free propagation over a wrap-safe window
        const double t_hi = cfg.decay_t_hi > 0.0 ? cfg.decay_t_hi : cfg.horizon;
        const double t_lo = cfg.decay_t_lo > 0.0 ? cfg.decay_t_lo : t_hi / 20.0;
        const double p = cfg.decay_p == "inf"
                             ? std::numeric_limits<double>::infinity()
                             : std::stod(cfg.decay_p);
        try {
            auto fit = decay_exponent_fit(u0, p, t_lo, t_hi, 10);
            std::string dcsv = "t,grad_sup,slope,expected\n";
            for (std::size_t i = 0; i < fit.times.size(); ++i) {
                dcsv += format_g17(fit.times[i]) + ',' + format_g17(fit.norms[i]);
                dcsv += ',' + format_g17(fit.slope) + ',' + format_g17(fit.expected);
                dcsv += '\n';
            }
            out.write_text("decay_fit.csv", dcsv);
        } catch (const std::exception& e) {
            note += std::string(note.empty() ? "" : " ; ") +
                    "decay fit skipped: " + e.what();
        }

        if (spec.form() == GForm::truncated) {
            auto clamp = truncation_consistency(runs.front(),
                                                spec.base(), u0);
            nlohmann::ordered_json tj;
            tj["first_clamp_time"] =
                clamp.has_value() ? nlohmann::ordered_json(*clamp)
                                  : nlohmann::ordered_json(nullptr);
            out.write_text("truncation.json", tj.dump(2) + "\n");
        }
        if (spec.form() == GForm::power && spec.alpha() > 2.0 &&
            spec.alpha() < 3.0) {
            auto rep = smallness_check(u0, spec.alpha(), 1.0, cfg.horizon);
            nlohmann::ordered_json sj;
            sj["b0"] = rep.b0;
            sj["holds"] = rep.holds;
            sj["bound"] = rep.bound;
            sj["lambda_hat"] = 1.0;
            out.write_text("smallness.json", sj.dump(2) + "\n");
        }

        const auto& last = runs.back();
        for (std::size_t s = 0; s < cfg.snapshot_times.size(); ++s) {
            const ScalarField snap =
                picard_evaluate(last, last.iterate.front(),
                                std::clamp(cfg.snapshot_times[s], 0.0, cfg.horizon),
                                cfg.picard_quad_points);
            const std::string stem = "snapshot_" + std::to_string(s);
            out.write_field_csv(stem + ".csv", snap);
            out.write_field_raw(stem, snap);
        }
    }

    out.write_manifest(cfg, code, note);
    return code;
}

inline int run_verify(const RunConfig& cfg, ArtifactWriter& out) {
    Rng rng(cfg.seed);
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    auto push = [&](const std::string& name, double lhs, double rhs, bool pass) {
        rows.push_back({name, {lhs, rhs, rhs != 0.0 ? lhs / rhs : 0.0,
                               pass ? 1.0 : 0.0}});
    };

    // Gronwall: ODE oracle vs closed form
    double worst_excess = 0.0, worst_eq_gap = 0.0;
    for (int trial = 0; trial < cfg.verify_draws; ++trial) {
        const double y0 = rng.uniform(0.0, 2.0);
        const double sigma = rng.uniform(0.2, 2.0);
        const double c1 = rng.uniform(0.1, 2.0);
        const double c2 = rng.uniform(0.1, 2.0);
        const double horizon =
            std::log1p((c2 / c1) * std::pow(y0 + 1.0, -sigma)) / (sigma * c2);
        auto eq = integrate_ode(
            [&](double v) { return c1 * std::pow(v, 1.0 + sigma) + c2 * v; },
            y0 + 1.0, 0.8 * horizon);
        for (std::size_t i = 0; i < eq.t.size(); ++i) {
            auto bound = gronwall_closed_form(y0, sigma, c1, c2, eq.t[i]);
            if (!bound) break;
            worst_eq_gap = std::max(
                worst_eq_gap, std::abs(eq.y[i] - 1.0 - *bound) / (1.0 + *bound));
        }
        auto dom = integrate_ode(
            [&](double y) { return c1 * std::pow(y, 1.0 + sigma) + c2; }, y0,
            0.8 * horizon);
        for (std::size_t i = 0; i < dom.t.size(); ++i) {
            auto bound = gronwall_closed_form(y0, sigma, c1, c2, dom.t[i]);
            if (!bound) break;
            worst_excess = std::max(worst_excess, dom.y[i] - *bound);
        }
    }
    push("gronwall_domination_excess", worst_excess, 1e-8, worst_excess <= 1e-8);
    push("gronwall_equality_gap", worst_eq_gap, 1e-6, worst_eq_gap <= 1e-6);

    // small-data recursion
    double worst_frac = 0.0;
    int conforming = 0;
    while (conforming < cfg.verify_draws) {
        const double b0 = rng.uniform(0.0, 0.6);
        const double lambda = rng.uniform(0.05, 2.0);
        const double alpha = rng.uniform(0.5, 3.0);
        if (!(2.0 * lambda * std::pow(2.0 * b0, alpha) < 1.0)) continue;
        ++conforming;
        auto res = small_sequence_bound(b0, lambda, alpha, 100);
        for (double b : res.trace)
            if (res.bound > 0.0) worst_frac = std::max(worst_frac, b / res.bound);
    }
    push("small_recursion_trace_fraction", worst_frac, 1.0, worst_frac <= 1.0);
    auto viol = small_sequence_bound(2.0, 1.0, 2.0, 60);
    push("small_recursion_violation_diverges", viol.diverged ? 1.0 : 0.0, 1.0,
         viol.diverged && !viol.condition_ok);

    // sequences
    auto hd = interp_sequences(InterpMode::highdim, 3.0, 19.0 / 9.0, 10);
    push("interp_a2_n3", hd.a[2], 2.0, std::abs(hd.a[2] - 2.0) < 1e-12);
    push("interp_b2_n3", hd.b[2], 5.0 / 3.0,
         std::abs(hd.b[2] - 5.0 / 3.0) < 1e-12);
    push("interp_recursion_gap", hd.recursion_gap, 1e-12,
         hd.recursion_gap <= 1e-12);
    bool detector = true;
    for (double N : {3.0, 4.0, 5.0}) {
        const double crit = (N * N + 2.0 * N + 4.0) / (N * N);
        detector =
            detector &&
            interp_sequences(InterpMode::highdim, N, crit - 1e-6, 4).a2_le_2 &&
            !interp_sequences(InterpMode::highdim, N, crit + 1e-6, 4).a2_le_2;
    }
    push("interp_a2_boundary_detector", detector ? 1.0 : 0.0, 1.0, detector);
    const double thr101 = (std::pow(1.01, 4) + 1.01 * 1.01 + 1.0) / std::pow(1.01, 4);
    push("planar_threshold_near_3", thr101, 3.0, thr101 > 2.9 && thr101 < 3.0);

    // interpolation inequality, in-sample constants then out-of-sample fields
    {
        const int n = cfg.verify_points;
        auto g3 = Grid::make({kPi, kPi, kPi}, {n, n, n}, Boundary::neumann_box);
        auto dc = estimate_constants(g3, cfg.verify_samples, cfg.seed + 1);
        auto dc2 = estimate_constants(g3, 2 * cfg.verify_samples, cfg.seed + 1);
        const double stab = std::max(
            std::abs(dc2.c_omega - dc.c_omega) / dc.c_omega,
            std::abs(dc2.c_cz - dc.c_cz) / dc.c_cz);
        push("constants_stability", stab, 0.05, stab < 0.05);
        push("constants_cz_lower", dc.c_cz, 1.0, dc.c_cz >= 1.0);

        Rng oos(cfg.seed + 1000);
        double worst = 0.0;
        for (int f = 0; f < cfg.verify_fields; ++f) {
            auto u = normalize_h1(random_neumann_field(g3, oos));
            worst = std::max(
                worst, interp_inequality_check(u, 19.0 / 9.0, 2, dc).ratio);
        }
        push("interp_inequality_highdim_worst", worst, 1.0, worst <= 1.0);
    }
    {
        const int n = std::max(16, cfg.verify_points);
        auto g2 = Grid::make({kPi, kPi}, {n, n}, Boundary::neumann_box);
        auto dc = estimate_constants(g2, cfg.verify_samples, cfg.seed + 2);
        Rng oos(cfg.seed + 2000);
        double worst = 0.0;
        for (int f = 0; f < cfg.verify_fields; ++f) {
            auto u = normalize_h1(random_neumann_field(g2, oos));
            worst = std::max(
                worst, interp_inequality_check(u, 2.5, 2, dc, 1.2).ratio);
        }
        push("interp_inequality_planar_worst", worst, 1.0, worst <= 1.0);
    }

    // Young's convolution inequality spot check
    {
        auto gp = Grid::make({3.0}, {128}, Boundary::periodic);
        double worst = 0.0;
        for (int trial = 0; trial < 8; ++trial) {
            auto f = band_limited_data(gp, 8, 1.0, 1.0, 0.2, cfg.seed + 31 + trial);
            auto h = band_limited_data(gp, 8, 1.0, 1.0, -0.1, cfg.seed + 91 + trial);
            auto conv = periodic_convolution(f, h);
            for (double q : {2.0, 3.0}) {
                worst = std::max(worst, lp_norm(conv, q) /
                                            (lp_norm(f, q) * lp_norm(h, 1.0)));
            }
        }
        push("young_convolution_worst", worst, 1.0, worst <= 1.0 + 1e-12);
    }

    out.write_labeled_csv("bounds_report.csv", "name,lhs,rhs,ratio,pass", rows);
    bool all = true;
    for (const auto& r : rows) all = all && r.second[3] == 1.0;
    out.write_manifest(cfg, all ? 0 : 3);
    return all ? 0 : 3;
}

inline int run_convergence(const RunConfig& cfg, ArtifactWriter& out) {
    auto grid = Grid::make({kPi}, {std::max(32, cfg.points[0])},
                           Boundary::neumann_box);
    const double lam = std::pow(cfg.conv_mode, 2); // (pi m / pi)^2
    auto u0 = ScalarField::sample(grid, [&](const std::vector<double>& x) {
        return std::cos(cfg.conv_mode * x[0]);
    });
    auto exact = u0;
    for (auto& v : exact.values()) v *= std::exp(-lam * lam * cfg.horizon);

    std::string csv = "tau,error,observed_order\n";
    double prev_err = 0.0;
    bool first = true;
    for (int j : cfg.conv_steps) {
        RotheConfig rcfg;
        rcfg.horizon = cfg.horizon;
        rcfg.steps = j;
        rcfg.inner_tolerance = cfg.tol_inner;
        auto traj = run_ibvp(u0, NonlinearitySpec::zero(), rcfg);
        if (!traj.complete()) {
            out.write_manifest(cfg, 3, "convergence run failed at j=" +
                                           std::to_string(j));
            return 3;
        }
        double e2 = 0.0;
        const ScalarField& end = traj.knot(j);
        for (std::size_t i = 0; i < u0.size(); ++i) {
            const double d = end[i] - exact[i];
            e2 += d * d;
        }
        const double err = std::sqrt(e2 * grid->cell_volume());
        csv += format_g17(cfg.horizon / j) + ',' + format_g17(err) + ',';
        csv += first ? "NA" : format_g17(std::log2(prev_err / err));
        csv += '\n';
        prev_err = err;
        first = false;
    }
    out.write_text("convergence.csv", csv);
    out.write_manifest(cfg, 0);
    return 0;
}

} // namespace detail

// Execute a validated configuration; artifacts land in cfg.out_dir.
inline int run(const RunConfig& cfg) {
    ArtifactWriter out(cfg.out_dir);
    try {
        if (cfg.subcommand == "kernel") {
            const int code = detail::run_kernel(cfg, out);
            out.write_manifest(cfg, code);
            return code;
        }
        if (cfg.subcommand == "ibvp") return detail::run_ibvp_cmd(cfg, out);
        if (cfg.subcommand == "cauchy") return detail::run_cauchy(cfg, out);
        if (cfg.subcommand == "verify") return detail::run_verify(cfg, out);
        if (cfg.subcommand == "convergence") return detail::run_convergence(cfg, out);
        throw std::invalid_argument("unknown subcommand " + cfg.subcommand);
    } catch (const SolverError& e) {
        out.write_manifest(cfg, 3, e.what());
        return 3;
    } catch (const QuadratureError& e) {
        out.write_manifest(cfg, 3, e.what());
        return 3;
    }
}

} // namespace thinfilm
