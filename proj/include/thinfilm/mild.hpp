// Cauchy-problem machinery on a periodic truncation of R^N: biharmonic
// semigroup propagation, the Duhamel increment with a square-root
// substitution in time, the Picard sequence with its a_k/b_k/d_k monitors,
// the small-data check, decay-exponent fits, and truncation consistency.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "thinfilm/kernel.hpp"
#include "thinfilm/nonlinearity.hpp"
#include "thinfilm/quadrature.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm {

// Exponential envelope |f_N| <= K exp(-mu eta^{4/3}).  Defaults are fitted
// values (reproducible from KernelTable::envelope); they only guard the
// wrap-around estimate.
struct KernelEnvelope {
    double K = 0.0;
    double mu = 0.0;
};

inline KernelEnvelope default_envelope(int N) {
    switch (N) {
        case 1: return {0.78, 0.245};
        case 2: return {0.50, 0.256};
        case 3: return {0.29, 0.264};
        default: throw std::invalid_argument("default_envelope: N in 1..3");
    }
}

// Kernel mass outside half the (smallest) box extent at time t, relative to
// the unit total mass: N omega_N alpha_N K int_{eta_half}^inf e^{-mu eta^{4/3}}
// eta^{N-1} d eta.
inline double wraparound_mass(const Grid& g, double t,
                              const KernelEnvelope& env_in = {}) {
    const int N = g.dimension();
    KernelEnvelope env = env_in.K > 0.0 ? env_in : default_envelope(N);
    double half = g.extent(0) / 2.0;
    for (int d = 1; d < N; ++d) half = std::min(half, g.extent(d) / 2.0);
    const double eta_half = half / std::pow(t, 0.25);
    auto integrand = [&](double eta) {
        return std::exp(-env.mu * std::pow(eta, 4.0 / 3.0)) * std::pow(eta, N - 1);
    };
    auto r = adaptive_gk(integrand, eta_half, eta_half + 60.0, 1e-14, 400, 8);
    const double alpha_n = std::pow(2.0 * kPi, -0.5 * N);
    return unit_sphere_area(N) * alpha_n * env.K * r.value;
}

// v0(., t) = b_N(t) * u0 via the exact multiplier exp(-lambda^2 t).
inline ScalarField heat_propagate(const ScalarField& u0, double t,
                                  double wrap_tolerance = 1e-8) {
    if (u0.grid()->boundary() != Boundary::periodic)
        throw std::invalid_argument("heat_propagate: periodic grids only");
    if (t < 0.0) throw std::invalid_argument("heat_propagate: t >= 0");
    if (t == 0.0) return u0;
    const double wrap = wraparound_mass(*u0.grid(), t);
    if (wrap > wrap_tolerance)
        throw std::invalid_argument(
            "heat_propagate: kernel wrap-around mass " + std::to_string(wrap) +
            " above tolerance; enlarge the box or shorten the horizon");
    return apply_mode_multiplier(u0, [t](double lam) { return std::exp(-lam * lam * t); });
}

// Direct-convolution cross-check path using a tabulated profile and
// minimum-image distances.
inline ScalarField heat_propagate_table(const ScalarField& u0, double t,
                                        const KernelTable& table,
                                        const QuadratureSpec& quad = {}) {
    const Grid& g = *u0.grid();
    if (g.boundary() != Boundary::periodic)
        throw std::invalid_argument("heat_propagate_table: periodic grids only");
    const int N = g.dimension();
    if (table.dimension() != N)
        throw std::invalid_argument("heat_propagate_table: table dimension mismatch");
    const double t4 = std::pow(t, 0.25);
    const double alpha_n = alpha_normalization(N, quad);
    const double scale = alpha_n * std::pow(t, -0.25 * N) * g.cell_volume();
    ScalarField out(u0.grid());
    std::vector<int> xi, yi;
    for (std::size_t p = 0; p < out.size(); ++p) {
        g.unravel(p, xi);
        double acc = 0.0;
        for (std::size_t q = 0; q < u0.size(); ++q) {
            g.unravel(q, yi);
            double r2 = 0.0;
            for (int d = 0; d < N; ++d) {
                double dx = std::abs(g.coord(d, xi[d]) - g.coord(d, yi[d]));
                dx = std::min(dx, g.extent(d) - dx); // minimum image
                r2 += dx * dx;
            }
            acc += table.interpolate(std::sqrt(r2) / t4) * u0[q];
        }
        out[p] = scale * acc;
    }
    return out;
}

// Spectral storage of a time-indexed vector field with linear interpolation
// in time; feeds the per-mode Duhamel integral.
class VectorHistory {
public:
    VectorHistory() = default;
    VectorHistory(GridPtr grid, std::vector<double> times)
        : grid_(std::move(grid)), times_(std::move(times)) {
        const int dim = grid_->dimension();
        coeffs_.assign(dim, std::vector<std::vector<std::complex<double>>>(
                                times_.size()));
    }

    static VectorHistory from_fields(const std::vector<double>& times,
                                     const std::vector<VectorField>& fields) {
        VectorHistory h(fields.front().grid(), times);
        for (std::size_t i = 0; i < times.size(); ++i) h.set(i, fields[i]);
        return h;
    }

    void set(std::size_t time_index, const VectorField& field) {
        const Grid& g = *grid_;
        std::lock_guard<std::mutex> lk(g.op_mutex());
        auto& ws = detail::workspace(g);
        for (int d = 0; d < g.dimension(); ++d)
            coeffs_[d][time_index] = ws.fft_forward(field[d].values());
    }

    const GridPtr& grid() const { return grid_; }
    const std::vector<double>& times() const { return times_; }

    // linear interpolation weights for time s
    void bracket(double s, std::size_t& lo, double& w) const {
        auto it = std::upper_bound(times_.begin(), times_.end(), s);
        std::size_t hi = std::clamp<std::size_t>(it - times_.begin(), 1,
                                                 times_.size() - 1);
        lo = hi - 1;
        const double dt = times_[hi] - times_[lo];
        w = dt > 0.0 ? std::clamp((s - times_[lo]) / dt, 0.0, 1.0) : 0.0;
    }

    std::complex<double> coeff(int d, std::size_t time_index, std::size_t mode) const {
        return coeffs_[d][time_index][mode];
    }

private:
    GridPtr grid_;
    std::vector<double> times_;
    // [component][time][mode]
    std::vector<std::vector<std::vector<std::complex<double>>>> coeffs_;
};

namespace detail {
// per-mode quadrature of int_0^t e^{-lam^2 (t-s)} i k . h(k, s) ds with the
// substitution s = t - r^2 (Gauss-Legendre in r)
inline std::vector<std::complex<double>> duhamel_modes(const VectorHistory& h,
                                                       double t, int points) {
    const Grid& g = *h.grid();
    auto& ws = workspace(g);
    const std::size_t total = ws.total();
    std::vector<std::complex<double>> acc(total, {0.0, 0.0});
    std::vector<double> xs, wq;
    gauss_legendre(points, xs, wq);
    const double rmax = std::sqrt(t);
    for (int q = 0; q < points; ++q) {
        const double r = 0.5 * rmax * (xs[q] + 1.0);
        const double weight = 0.5 * rmax * wq[q] * 2.0 * r;
        const double s = std::max(0.0, t - r * r);
        std::size_t lo;
        double w;
        h.bracket(s, lo, w);
        for (std::size_t m = 0; m < total; ++m) {
            const double lam = ws.lambda()[m];
            const double decay = std::exp(-lam * lam * r * r);
            if (decay < 1e-300) continue;
            std::complex<double> div_h(0.0, 0.0);
            for (int d = 0; d < g.dimension(); ++d) {
                const double k = ws.deriv_wavenumber(d, ws.axis_index(m, d));
                if (k == 0.0) continue;
                const std::complex<double> hv =
                    (1.0 - w) * h.coeff(d, lo, m) + w * h.coeff(d, lo + 1, m);
                div_h += std::complex<double>(0.0, k) * hv;
            }
            acc[m] += weight * decay * div_h;
        }
    }
    return acc;
}
} // namespace detail

// v1(., t) = int_0^t grad b_N(t-s) * h(., s) ds.  The residual estimate
// compares `quad_points` against doubled points; the returned field uses the
// doubled rule.
inline ScalarField duhamel_increment(const VectorHistory& h, double t,
                                     int quad_points = 16,
                                     double* residual_out = nullptr,
                                     double residual_tolerance = 1e-6) {
    if (quad_points < 4)
        throw std::invalid_argument("duhamel_increment: quad_points >= 4");
    const Grid& g = *h.grid();
    if (t <= 0.0) return ScalarField(h.grid());
    std::lock_guard<std::mutex> lk(g.op_mutex());
    auto& ws = detail::workspace(g);
    const auto coarse = detail::duhamel_modes(h, t, quad_points);
    const auto fine = detail::duhamel_modes(h, t, 2 * quad_points);
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < fine.size(); ++m) {
        num += std::norm(fine[m] - coarse[m]);
        den += std::norm(fine[m]);
    }
    const double residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    if (residual_out) *residual_out = residual;
    if (residual > residual_tolerance)
        throw QuadratureError("duhamel_increment: s-quadrature residual above "
                              "tolerance",
                              residual);
    return ScalarField(h.grid(), ws.fft_inverse_real(fine));
}

struct PicardConfig {
    double horizon = 0.1; // T
    int max_iterations = 30;
    double tolerance = 1e-10; // on d_k relative to the gradient scale
    int time_samples = 32;    // Chebyshev-distributed sample count (+1 knots)
    int quad_points = 16;
    double duhamel_residual_tolerance = 1e-6;
    double wrap_tolerance = 1e-8;
    double ahat_window = -1.0; // window for a_k; < 0 means the full horizon
    int divergence_patience = 5;
};

struct PicardState {
    int k = 0;
    double a_k = 0.0; // sup_{[0, ahat]} ||grad w_k||_inf
    double b_k = 0.0; // sup_t t^{1/(2(alpha-1))} ||grad w_k||_inf
    double d_k = 0.0; // sup_t ||grad w_k - grad w_{k-1}||_inf
};

struct PicardRun {
    std::vector<double> times;
    std::vector<ScalarField> iterate;      // final w at the sample times
    std::vector<VectorField> grad_iterate; // its gradients
    std::vector<PicardState> monitors;
    VectorHistory h_history; // g(grad w_{K-1}), drives the final iterate
    bool converged = false;
    int iterations = 0;
    double bk_exponent = 0.0;
};

// Successive mild-solution approximations w_k = v0 + Duhamel(g(grad w_{k-1})).
inline PicardRun picard_solve(const ScalarField& u0, const NonlinearitySpec& spec,
                              const PicardConfig& config) {
    if (u0.grid()->boundary() != Boundary::periodic)
        throw std::invalid_argument("picard_solve: periodic grids only");
    if (!u0.all_finite())
        throw std::invalid_argument("picard_solve: initial datum not finite");
    const double T = config.horizon;
    const int M = std::max(4, config.time_samples);

    PicardRun run;
    const double alpha = spec.growth_alpha();
    run.bk_exponent = alpha > 1.0 + 1e-9 ? 1.0 / (2.0 * (alpha - 1.0)) : 0.0;
    run.times.resize(M + 1);
    for (int i = 0; i <= M; ++i)
        run.times[i] = 0.5 * T * (1.0 - std::cos(kPi * i / M));
    run.times.front() = 0.0;
    run.times.back() = T;

    // w_0 = v0
    std::vector<ScalarField> w;
    w.reserve(M + 1);
    for (double t : run.times)
        w.push_back(heat_propagate(u0, t, config.wrap_tolerance));
    std::vector<ScalarField> v0 = w;
    std::vector<VectorField> gw;
    gw.reserve(M + 1);
    for (const auto& f : w) gw.push_back(gradient(f));

    const double ahat = config.ahat_window > 0.0 ? config.ahat_window : T;
    const double inf = std::numeric_limits<double>::infinity();
    auto monitors_of = [&](int k, const std::vector<VectorField>& grads,
                           const std::vector<VectorField>* prev) {
        PicardState st;
        st.k = k;
        for (int i = 0; i <= M; ++i) {
            const double gn = lp_norm(grads[i], inf);
            if (run.times[i] <= ahat + 1e-15) st.a_k = std::max(st.a_k, gn);
            st.b_k = std::max(st.b_k, std::pow(run.times[i], run.bk_exponent) * gn);
            if (prev) {
                double dmax = 0.0;
                const VectorField& a = grads[i];
                const VectorField& b = (*prev)[i];
                for (int d = 0; d < a.dimension(); ++d)
                    for (std::size_t p = 0; p < a[d].size(); ++p)
                        dmax = std::max(dmax, std::abs(a[d][p] - b[d][p]));
                st.d_k = std::max(st.d_k, dmax);
            }
        }
        return st;
    };
    run.monitors.push_back(monitors_of(0, gw, nullptr));

    int stall = 0;
    for (int k = 1; k <= config.max_iterations; ++k) {
        std::vector<VectorField> h_fields;
        h_fields.reserve(M + 1);
        for (int i = 0; i <= M; ++i) h_fields.push_back(spec.apply(gw[i]));
        VectorHistory history = VectorHistory::from_fields(run.times, h_fields);

        std::vector<ScalarField> w_next;
        w_next.reserve(M + 1);
        for (int i = 0; i <= M; ++i) {
            if (run.times[i] == 0.0) {
                w_next.push_back(u0); // all iterates share the initial datum
                continue;
            }
            ScalarField incr =
                duhamel_increment(history, run.times[i], config.quad_points,
                                  nullptr, config.duhamel_residual_tolerance);
            incr += v0[i];
            w_next.push_back(std::move(incr));
        }
        std::vector<VectorField> gw_next;
        gw_next.reserve(M + 1);
        for (const auto& f : w_next) gw_next.push_back(gradient(f));

        PicardState st = monitors_of(k, gw_next, &gw);
        run.monitors.push_back(st);
        const bool done = st.d_k <= config.tolerance * std::max(1.0, st.a_k);
        if (run.monitors.size() >= 2) {
            const double dprev = run.monitors[run.monitors.size() - 2].d_k;
            if (k >= 2 && st.d_k >= dprev) {
                if (++stall >= config.divergence_patience)
                    throw SolverError("picard_solve: d_k non-decreasing over " +
                                          std::to_string(stall) +
                                          " iterates (contraction failed; shorten T)",
                                      st.d_k, k);
            } else {
                stall = 0;
            }
        }
        w = std::move(w_next);
        gw = std::move(gw_next);
        run.iterations = k;
        if (done) {
            run.converged = true;
            run.h_history = std::move(history);
            break;
        }
        if (k == config.max_iterations) run.h_history = std::move(history);
    }
    run.iterate = std::move(w);
    run.grad_iterate = std::move(gw);
    return run;
}

// Evaluate the final iterate at an arbitrary time (used for sampling-density
// stability checks).
inline ScalarField picard_evaluate(const PicardRun& run, const ScalarField& u0,
                                   double t, int quad_points = 16) {
    ScalarField v = heat_propagate(u0, t, 1.0);
    if (t == 0.0) return v;
    ScalarField incr = duhamel_increment(run.h_history, t, quad_points);
    incr += v;
    return incr;
}

struct SmallnessReport {
    bool holds = false;
    double b0 = 0.0;
    double bound = 0.0;
};

// Lemma 2.2 driver: b0 is measured from the free propagation of u0 over the
// window; holds iff 2 lambda (2 b0)^alpha < 1.
inline SmallnessReport smallness_check(const ScalarField& u0, double alpha,
                                       double lambda_hat, double T,
                                       int samples = 24) {
    if (!(alpha > 2.0 && alpha < 3.0))
        throw std::invalid_argument("smallness_check: alpha must lie in (2, 3)");
    if (!(lambda_hat > 0.0))
        throw std::invalid_argument("smallness_check: lambda_hat must be > 0");
    SmallnessReport rep;
    const double expo = 1.0 / (2.0 * (alpha - 1.0));
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= samples; ++i) {
        const double t = T * i / samples;
        const double gn = lp_norm(gradient(heat_propagate(u0, t, 1.0)), inf);
        rep.b0 = std::max(rep.b0, std::pow(t, expo) * gn);
    }
    const double contraction = lambda_hat * std::pow(2.0 * rep.b0, alpha);
    rep.holds = 2.0 * contraction < 1.0;
    rep.bound = rep.holds || contraction < 1.0 ? rep.b0 / (1.0 - contraction) : inf;
    return rep;
}

struct DecayFit {
    double slope = 0.0;
    double expected = 0.0;
    std::vector<double> times;
    std::vector<double> norms;
};

// Least-squares slope of log ||grad v0(t)||_inf against log t; expected
// -(N+p)/(4p), with p = +inf giving -1/4.
inline DecayFit decay_exponent_fit(const ScalarField& u0, double p, double t_lo,
                                   double t_hi, int samples = 10) {
    if (samples < 4)
        throw std::invalid_argument("decay_exponent_fit: need >= 4 sample times");
    const int N = u0.grid()->dimension();
    DecayFit fit;
    fit.expected = std::isinf(p) ? -0.25 : -(N + p) / (4.0 * p);
    const double inf = std::numeric_limits<double>::infinity();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < samples; ++i) {
        const double t = t_lo * std::pow(t_hi / t_lo, double(i) / (samples - 1));
        const double gn = lp_norm(gradient(heat_propagate(u0, t)), inf);
        fit.times.push_back(t);
        fit.norms.push_back(gn);
        const double x = std::log(t), y = std::log(gn);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.slope = (samples * sxy - sx * sy) / (samples * sxx - sx * sx);
    return fit;
}

// Earliest sample time at which any componentwise clamp of the truncation
// activates; nullopt means the truncated run solves the original equation on
// the whole window.
inline std::optional<double> truncation_consistency(const PicardRun& run,
                                                    const NonlinearitySpec& base,
                                                    const ScalarField& u0) {
    const VectorField ref = gradient(u0);
    const VectorField gref = base.apply(ref);
    for (std::size_t i = 0; i < run.times.size(); ++i) {
        const VectorField gcur = base.apply(run.grad_iterate[i]);
        for (int d = 0; d < gcur.dimension(); ++d)
            for (std::size_t p = 0; p < gcur[d].size(); ++p)
                if (std::abs(gcur[d][p] - gref[d][p]) > 1.0)
                    return run.times[i];
    }
    return std::nullopt;
}

// circular convolution (f * g)(x) = int f(x-y) g(y) dy on a periodic grid
inline ScalarField periodic_convolution(const ScalarField& f, const ScalarField& g) {
    const Grid& grid = *f.grid();
    if (grid.boundary() != Boundary::periodic)
        throw std::invalid_argument("periodic_convolution: periodic grids only");
    std::lock_guard<std::mutex> lk(grid.op_mutex());
    auto& ws = detail::workspace(grid);
    auto zf = ws.fft_forward(f.values());
    const auto zg = ws.fft_forward(g.values());
    for (std::size_t m = 0; m < zf.size(); ++m) zf[m] *= zg[m] * grid.cell_volume();
    return ScalarField(f.grid(), ws.fft_inverse_real(zf));
}

} // namespace thinfilm
