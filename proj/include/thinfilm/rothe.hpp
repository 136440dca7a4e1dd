// Semi-implicit time discretization of the Neumann problem: at each step the
// coupled system
//   (u_k - u_{k-1})/tau - div(grad psi_k + g(grad u_k)) + tau psi_k = 0
//   (-Lap + tau) u_k = psi_k
// is reduced by eliminating psi to ((-Lap+tau)^2 + 1/tau) u = v/tau + div g(grad u)
// and solved by a damped Picard iteration; every linear solve is diagonal in
// the grid basis.  The zero mode is pinned to its exact value v0/(1+tau^3),
// which makes the discrete mass law hold to roundoff.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thinfilm/energy.hpp"
#include "thinfilm/nonlinearity.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm {

enum class AlphaRegime { global, local, unsupported };

// Theorem regimes: (R1) alpha <= 1 global; (R2) local for
// 1 < alpha <= (N^2+2N+4)/N^2 when N > 2, or 1 < alpha < 3 when N = 2.
inline AlphaRegime alpha_classify(int N, double alpha) {
    if (N < 1 || !(alpha > 0.0))
        throw std::invalid_argument("alpha_classify: need N >= 1, alpha > 0");
    if (alpha <= 1.0) return AlphaRegime::global;
    if (N > 2 && alpha <= (N * N + 2.0 * N + 4.0) / (N * N))
        return AlphaRegime::local;
    if (N == 2 && alpha < 3.0) return AlphaRegime::local;
    return AlphaRegime::unsupported;
}

struct RotheConfig {
    double horizon = 1.0; // T
    int steps = 64;       // j, tau = T/j
    double inner_tolerance = 1e-10;
    int inner_max_iterations = 200;
    double damping = 1.0; // halved on residual increase, floor 0.25
    double alpha = 1.0;   // growth exponent of the run, for classification
    bool allow_unsupported = false;
    double blowup_guard = 1e8; // abort when the H1 quantity exceeds this
};

struct RotheStep {
    int index = 0;
    ScalarField u;
    ScalarField psi;
    int inner_iterations = 0;
    double inner_residual = 0.0;
};

// One implicit step from v with step size tau.
inline RotheStep rothe_step(const ScalarField& v, const NonlinearitySpec& spec,
                            double tau, const RotheConfig& config,
                            int index = 0) {
    if (!(tau > 0.0)) throw std::invalid_argument("rothe_step: tau must be > 0");
    if (!v.all_finite()) throw std::invalid_argument("rothe_step: input not finite");
    const double inv_tau = 1.0 / tau;
    auto solve = [&](const ScalarField& rhs) {
        return apply_mode_multiplier(rhs, [tau, inv_tau](double lam) {
            const double a = lam + tau;
            return 1.0 / (a * a + inv_tau);
        });
    };
    const double target_mean = mean_value(v) / (1.0 + tau * tau * tau);

    ScalarField u = v;
    double damping = std::clamp(config.damping, 0.25, 1.0);
    double prev_residual = std::numeric_limits<double>::infinity();
    double residual = prev_residual;
    int used = 0;
    for (int it = 0; it < config.inner_max_iterations; ++it) {
        const ScalarField forcing = divergence(spec.apply(gradient(u)));
        ScalarField rhs = v;
        rhs *= inv_tau;
        rhs += forcing;
        ScalarField next = solve(rhs);
        if (damping < 1.0) {
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] = (1.0 - damping) * u[i] + damping * next[i];
        }
        // zero mode decouples from the nonlinearity; hold it at the exact value
        const double shift = target_mean - mean_value(next);
        for (auto& x : next.values()) x += shift;

        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            const double d = next[i] - u[i];
            num += d * d;
            den += next[i] * next[i];
        }
        residual = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
        u = std::move(next);
        used = it + 1;
        if (residual <= config.inner_tolerance) break;
        if (residual > prev_residual) damping = std::max(0.25, 0.5 * damping);
        prev_residual = residual;
    }
    if (residual > config.inner_tolerance)
        throw SolverError("rothe_step: inner fixed point did not reach tolerance "
                          "(tau too large or data too rough)",
                          residual, used);

    RotheStep out;
    out.index = index;
    out.psi = apply_mode_multiplier(u, [tau](double lam) { return lam + tau; });
    out.u = std::move(u);
    out.inner_iterations = used;
    out.inner_residual = residual;
    return out;
}

class Trajectory {
public:
    Trajectory() = default;
    Trajectory(ScalarField u0, double horizon, int steps)
        : u0_(std::move(u0)), horizon_(horizon), steps_hint_(steps) {}

    void push(RotheStep step) { steps_.push_back(std::move(step)); }

    const ScalarField& initial() const { return u0_; }
    double horizon() const { return horizon_; }
    double tau() const { return horizon_ / steps_hint_; }
    int planned_steps() const { return steps_hint_; }
    int completed_steps() const { return static_cast<int>(steps_.size()); }
    const std::vector<RotheStep>& steps() const { return steps_; }
    bool complete() const { return completed_steps() == steps_hint_ && !failure_; }

    const std::optional<std::string>& failure() const { return failure_; }
    void mark_failure(std::string why) { failure_ = std::move(why); }
    bool blew_up() const { return blew_up_; }
    void mark_blowup() { blew_up_ = true; }

    // u_k with k = 0..completed_steps()
    const ScalarField& knot(int k) const { return k == 0 ? u0_ : steps_[k - 1].u; }

    // piecewise-constant interpolant: u_k on (t_{k-1}, t_k]
    const ScalarField& piecewise_constant(double t) const {
        const int k = std::clamp(static_cast<int>(std::ceil(t / tau() - 1e-12)), 0,
                                 completed_steps());
        return knot(k);
    }

    // piecewise-linear interpolant
    ScalarField piecewise_linear(double t) const {
        const double s = std::clamp(t / tau(), 0.0, double(completed_steps()));
        const int k = std::min(static_cast<int>(s), completed_steps() - 1);
        const double w = s - k;
        ScalarField out = knot(k);
        const ScalarField& hi = knot(k + 1);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (1.0 - w) * out[i] + w * hi[i];
        return out;
    }

private:
    ScalarField u0_;
    double horizon_ = 0.0;
    int steps_hint_ = 1;
    std::vector<RotheStep> steps_;
    std::optional<std::string> failure_;
    bool blew_up_ = false;
};

struct HorizonInfo {
    double horizon = 0.0;
    double sigma = 0.0;
    int k_used = 0;
    double s_used = 0.0; // planar parameter, 0 for N > 2
};

namespace detail {
// sigma from 1 + sigma = [b_k + e_k a_k] / (2 - b_k) with
// e_k = (2/N)^k (N > 2) or s^{-2k} (N = 2).
inline double sigma_highdim(int N, double alpha, int k) {
    const double r = static_cast<double>(N) / (N - 2.0);
    const double ak = 2.0 * r - 2.0 * (r - alpha) * std::pow(0.5 * N, k);
    const double bk = (1.0 - std::pow(2.0 / N, k)) / (1.0 - 2.0 / N);
    if (ak < -1e-12 || ak > 2.0 + 1e-12 || bk >= 2.0) return -1.0;
    const double ek = std::pow(2.0 / N, k);
    return (bk + ek * ak) / (2.0 - bk) - 1.0;
}
inline double sigma_planar(double alpha, int k, double x /* = s^{-2} */) {
    const double r = 1.0 / (1.0 - x);
    const double ak = 2.0 * r - 2.0 * (r - alpha) / std::pow(x, k);
    const double bk = (1.0 - std::pow(x, k)) / (1.0 - x);
    if (ak < -1e-12 || ak > 2.0 + 1e-12 || bk >= 2.0) return -1.0;
    return (bk + std::pow(x, k) * ak) / (2.0 - bk) - 1.0;
}
} // namespace detail

// Blow-up horizon of the Gronwall bound for the (R2) regime; any T0 strictly
// below it is a valid run horizon.  k follows the paper's choice (k = 2)
// wherever that is feasible; k_override forces a specific k.
inline HorizonInfo gronwall_sigma(int N, double alpha, int k_override = 0) {
    HorizonInfo info;
    if (alpha_classify(N, alpha) != AlphaRegime::local)
        throw std::invalid_argument("gronwall horizon: alpha outside the local regime");
    if (N > 2) {
        double best = -1.0;
        int bestk = 0;
        for (int k = 1; k <= 6; ++k) {
            if (k_override > 0 && k != k_override) continue;
            const double s = detail::sigma_highdim(N, alpha, k);
            if (s > 0.0 && (best < 0.0 || s < best)) {
                best = s;
                bestk = k;
            }
        }
        if (best <= 0.0)
            throw std::invalid_argument("gronwall horizon: no feasible k (sigma <= 0)");
        info.sigma = best;
        info.k_used = bestk;
        return info;
    }
    // planar: minimize sigma over the feasible window of x = s^{-2}
    double best = -1.0, bestx = 0.0;
    int bestk = 0;
    for (int k : {1, 2}) {
        if (k_override > 0 && k != k_override) continue;
        for (int i = 1; i < 4000; ++i) {
            const double x = i / 4000.0;
            const double s = detail::sigma_planar(alpha, k, x);
            if (s > 0.0 && (best < 0.0 || s < best)) {
                best = s;
                bestx = x;
                bestk = k;
            }
        }
    }
    if (best <= 0.0)
        throw std::invalid_argument("gronwall horizon: no feasible planar s");
    info.sigma = best;
    info.k_used = bestk;
    info.s_used = 1.0 / std::sqrt(bestx);
    return info;
}

// Blow-up time of the Lemma 2.1 closed form; reduces to ln(v0^{-sigma}+1)/(sigma c2)
// when c1 = c2.
inline double gronwall_horizon_formula(double v0, double sigma, double c1, double c2) {
    if (!(c1 > 0.0 && c2 > 0.0 && sigma > 0.0))
        throw std::invalid_argument("gronwall horizon: constants must be > 0");
    return std::log1p((c2 / c1) * std::pow(v0, -sigma)) / (sigma * c2);
}

inline HorizonInfo gronwall_horizon_info(const ScalarField& u0, double alpha, int N,
                                         double c1, double c2, int k_override = 0) {
    HorizonInfo info = gronwall_sigma(N, alpha, k_override);
    const VectorField g0 = gradient(u0);
    double h1 = inner_product(u0, u0);
    for (int d = 0; d < u0.grid()->dimension(); ++d) h1 += inner_product(g0[d], g0[d]);
    info.horizon = gronwall_horizon_formula(h1 + 1.0, info.sigma, c1, c2);
    return info;
}

inline double gronwall_horizon(const ScalarField& u0, double alpha, int N,
                               double c1 = 1.0, double c2 = 1.0) {
    return gronwall_horizon_info(u0, alpha, N, c1, c2).horizon;
}

// j chained steps.  On an inner-solve failure or blow-up the partial
// trajectory is retained (complete() == false) for diagnosis.
inline Trajectory run_ibvp(const ScalarField& u0, const NonlinearitySpec& spec,
                           const RotheConfig& config) {
    if (!u0.all_finite())
        throw std::invalid_argument("run_ibvp: initial datum has non-finite values");
    if (config.steps < 1) throw std::invalid_argument("run_ibvp: steps >= 1");
    const int N = u0.grid()->dimension();

    AlphaRegime regime = alpha_classify(N, config.alpha);
    // conservative g has a decaying Lyapunov functional, which extends the
    // global regime to every alpha
    if (regime == AlphaRegime::unsupported && spec.conservative())
        regime = AlphaRegime::global;
    if (regime == AlphaRegime::unsupported && !config.allow_unsupported)
        throw std::invalid_argument(
            "run_ibvp: alpha regime unsupported; set the explicit override to run "
            "an exploratory trajectory");

    const double tau = config.horizon / config.steps;
    Trajectory traj(u0, config.horizon, config.steps);
    const VectorField g0 = gradient(u0);
    double h1_0 = inner_product(u0, u0);
    for (int d = 0; d < N; ++d) h1_0 += inner_product(g0[d], g0[d]);
    const double guard = config.blowup_guard * (h1_0 + 1.0);

    ScalarField v = u0;
    for (int k = 1; k <= config.steps; ++k) {
        RotheStep step;
        try {
            step = rothe_step(v, spec, tau, config, k);
        } catch (const SolverError& err) {
            traj.mark_failure(err.what());
            return traj;
        }
        const VectorField gu = gradient(step.u);
        double h1 = inner_product(step.u, step.u);
        for (int d = 0; d < N; ++d) h1 += inner_product(gu[d], gu[d]);
        if (!std::isfinite(h1) || h1 > guard) {
            traj.mark_failure("run_ibvp: blow-up guard tripped at step " +
                              std::to_string(k));
            traj.mark_blowup();
            traj.push(std::move(step));
            return traj;
        }
        v = step.u;
        traj.push(std::move(step));
    }
    return traj;
}

struct EstimateReport {
    double sup_h1 = 0.0;         // sup_t int(u^2 + |grad u|^2)
    double tau_sup_u2 = 0.0;     // tau * sup_t int u^2
    double int_psi_h1 = 0.0;     // iint(psi^2 + |grad psi|^2)
    double tau_int_psi2 = 0.0;   // tau * iint psi^2
    double int_grad_2alpha = 0.0; // iint |grad u|^{2 alpha}
    std::vector<double> energy_series; // lyapunov energy at knots, conservative g
    bool all_finite() const {
        return std::isfinite(sup_h1) && std::isfinite(tau_sup_u2) &&
               std::isfinite(int_psi_h1) && std::isfinite(tau_int_psi2) &&
               std::isfinite(int_grad_2alpha);
    }
};

// Prop. 5.1 ledger over the piecewise-constant interpolant.
inline EstimateReport estimate_report(const Trajectory& traj, double alpha,
                                      const NonlinearitySpec* spec_for_energy = nullptr) {
    EstimateReport rep;
    const double tau = traj.tau();
    double sup_u2 = 0.0;
    for (int k = 0; k <= traj.completed_steps(); ++k) {
        const ScalarField& u = traj.knot(k);
        const VectorField gu = gradient(u);
        double u2 = inner_product(u, u);
        double h1 = u2;
        for (int d = 0; d < u.grid()->dimension(); ++d)
            h1 += inner_product(gu[d], gu[d]);
        rep.sup_h1 = std::max(rep.sup_h1, h1);
        sup_u2 = std::max(sup_u2, u2);
        if (k >= 1) {
            const ScalarField& psi = traj.steps()[k - 1].psi;
            const VectorField gpsi = gradient(psi);
            double p2 = inner_product(psi, psi);
            double ph1 = p2;
            for (int d = 0; d < u.grid()->dimension(); ++d)
                ph1 += inner_product(gpsi[d], gpsi[d]);
            rep.int_psi_h1 += tau * ph1;
            rep.tau_int_psi2 += tau * tau * p2;
            const ScalarField mag = gu.magnitude();
            double ga = 0.0;
            for (double m : mag.values()) ga += std::pow(m, 2.0 * alpha);
            rep.int_grad_2alpha += tau * ga * u.grid()->cell_volume();
        }
        if (spec_for_energy && spec_for_energy->conservative())
            rep.energy_series.push_back(lyapunov_energy(u, *spec_for_energy));
    }
    rep.tau_sup_u2 = tau * sup_u2;
    return rep;
}

} // namespace thinfilm
