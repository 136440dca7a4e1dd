// Stand-alone numerical verification of the estimate toolbox: the Gronwall
// closed form and its ODE oracle, the small-data recursion, the
// interpolation-inequality sequences a_k/b_k (N > 2 and planar variants), the
// inequality itself on sampled fields, and empirical Sobolev /
// Calderon-Zygmund constants.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "thinfilm/rng.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm {

// Bound of Lemma-type y' <= c1 y^{1+sigma} + c2:
//   y(t) <= [ ((v0^{-sigma} + c1/c2) e^{-sigma c2 t} - c1/c2)^+ ]^{-1/sigma} - 1,
// v0 = y0 + 1.  nullopt marks blow-up (the bracket is nonpositive).
inline std::optional<double> gronwall_closed_form(double y0, double sigma,
                                                  double c1, double c2, double t) {
    if (!(sigma > 0.0 && c1 > 0.0 && c2 > 0.0) || t < 0.0 || y0 < 0.0)
        throw std::invalid_argument("gronwall_closed_form: bad parameters");
    const double v0 = y0 + 1.0;
    const double ratio = c1 / c2;
    const double bracket =
        (std::pow(v0, -sigma) + ratio) * std::exp(-sigma * c2 * t) - ratio;
    if (bracket <= 0.0) return std::nullopt;
    return std::pow(bracket, -1.0 / sigma) - 1.0;
}

struct OdeTrace {
    std::vector<double> t;
    std::vector<double> y;
    bool blew_up = false;
};

// Adaptive Dormand-Prince 5(4) for scalar initial value problems; the oracle
// route for Gronwall checks.  Stops when y exceeds `cap` (reported as
// blow-up) or t reaches t_end.
template <typename F>
OdeTrace integrate_ode(const F& f, double y0, double t_end, double rtol = 1e-10,
                       double atol = 1e-12, double cap = 1e12,
                       int max_steps = 200000) {
    OdeTrace trace;
    double t = 0.0, y = y0;
    trace.t.push_back(t);
    trace.y.push_back(y);
    double h = t_end / 1024.0;
    for (int step = 0; step < max_steps && t < t_end; ++step) {
        h = std::min(h, t_end - t);
        const double k1 = f(y);
        const double k2 = f(y + h * (k1 / 5.0));
        const double k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
        const double k4 =
            f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
        const double k5 = f(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                     64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
        const double k6 =
            f(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                       46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                       5103.0 / 18656.0 * k5));
        const double y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                                   125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                                   11.0 / 84.0 * k6);
        const double k7 = f(y5);
        const double y4 = y + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                                   393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                                   187.0 / 2100.0 * k6 + k7 / 40.0);
        const double err = std::abs(y5 - y4);
        const double tol = atol + rtol * std::max(std::abs(y), std::abs(y5));
        if (err <= tol || h <= 1e-15 * std::max(1.0, t)) {
            t += h;
            y = y5;
            trace.t.push_back(t);
            trace.y.push_back(y);
            if (!std::isfinite(y) || y > cap) {
                trace.blew_up = true;
                return trace;
            }
        }
        const double factor =
            err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return trace;
}

struct SmallSequenceResult {
    bool condition_ok = false; // 2 lambda (2 b0)^alpha < 1
    double bound = 0.0;
    std::vector<double> trace;
    bool diverged = false;
};

// b_k <= b0 + lambda b_{k-1}^{1+alpha}; under the smallness condition the
// whole sequence stays below b0 / (1 - lambda (2 b0)^alpha).  The trace is
// the recursion itself with equality, the oracle for the bound.
inline SmallSequenceResult small_sequence_bound(double b0, double lambda,
                                                double alpha, int K) {
    if (!(b0 >= 0.0 && lambda > 0.0 && alpha > 0.0 && K >= 1))
        throw std::invalid_argument("small_sequence_bound: bad parameters");
    SmallSequenceResult res;
    res.condition_ok = 2.0 * lambda * std::pow(2.0 * b0, alpha) < 1.0;
    if (res.condition_ok)
        res.bound = b0 / (1.0 - lambda * std::pow(2.0 * b0, alpha));
    res.trace.reserve(K + 1);
    double b = b0;
    res.trace.push_back(b);
    for (int k = 1; k <= K; ++k) {
        b = b0 + lambda * std::pow(b, 1.0 + alpha);
        res.trace.push_back(b);
        if (!std::isfinite(b) || b > 1e100) {
            res.diverged = true;
            break;
        }
    }
    return res;
}

enum class InterpMode { highdim, planar };

struct InterpSequences {
    InterpMode mode = InterpMode::highdim;
    double alpha = 0.0;
    double param = 0.0; // N (highdim) or s (planar)
    std::vector<double> a, b;
    int k_star = 0; // largest k with a_k >= 0
    bool a2_le_2 = false;
    bool b2_lt_2 = false;
    double recursion_gap = 0.0; // max |closed form - recursion|
    // exponent on the lower-order integral at level k
    double exponent(int k) const {
        return mode == InterpMode::highdim ? std::pow(2.0 / param, k)
                                           : std::pow(param, -2.0 * k);
    }
};

// a_k and b_k in closed form, cross-checked against the recursion
// a_k = (a_{k-1} - 2) * (N/2 or s^2), a_0 = 2 alpha.
inline InterpSequences interp_sequences(InterpMode mode, double N_or_s,
                                        double alpha, int K) {
    InterpSequences seq;
    seq.mode = mode;
    seq.alpha = alpha;
    seq.param = N_or_s;
    double growth, r;
    if (mode == InterpMode::highdim) {
        const double N = N_or_s;
        if (!(N > 2.0))
            throw std::invalid_argument("interp_sequences: highdim needs N > 2");
        if (!(alpha > 1.0 && alpha < N / (N - 2.0)))
            throw std::invalid_argument(
                "interp_sequences: highdim needs 1 < alpha < N/(N-2)");
        growth = 0.5 * N;
        r = N / (N - 2.0);
    } else {
        const double s = N_or_s;
        if (!(s > 1.0)) throw std::invalid_argument("interp_sequences: planar s > 1");
        if (!(alpha > 1.0 && alpha < s * s / (s * s - 1.0)))
            throw std::invalid_argument(
                "interp_sequences: planar needs 1 < alpha < s^2/(s^2-1)");
        growth = s * s;
        r = s * s / (s * s - 1.0);
    }
    seq.a.resize(K + 1);
    seq.b.resize(K + 1);
    double a_rec = 2.0 * alpha;
    for (int k = 0; k <= K; ++k) {
        seq.a[k] = 2.0 * r - 2.0 * (r - alpha) * std::pow(growth, k);
        seq.b[k] = (1.0 - std::pow(1.0 / growth, k)) / (1.0 - 1.0 / growth);
        seq.recursion_gap = std::max(seq.recursion_gap, std::abs(seq.a[k] - a_rec));
        a_rec = (a_rec - 2.0) * growth;
        if (seq.a[k] >= 0.0) seq.k_star = k;
    }
    if (K >= 2) {
        seq.a2_le_2 = seq.a[2] <= 2.0 + 1e-12;
        seq.b2_lt_2 = seq.b[2] < 2.0;
    }
    return seq;
}

struct DomainConstants {
    double c_omega = 0.0; // Sobolev ||u - mean||_{2*} <= c ||grad u||_2
    double c_cz = 0.0;    // Calderon-Zygmund ||u||_{W^{2,p}} <= c ||Lap u||_p
    double two_star = 6.0;
    int sample_count = 0;
    std::uint64_t seed = 0;
};

// Random H1-normalized mean-zero field on a Neumann box with spectral decay
// exponent drawn from [1, 3]; the ensemble behind constant estimation and the
// out-of-sample inequality checks.
inline ScalarField random_neumann_field(const GridPtr& grid, Rng& rng,
                                        int band_limit = 0) {
    const Grid& g = *grid;
    if (g.boundary() != Boundary::neumann_box)
        throw std::invalid_argument("random_neumann_field: neumann-box grids only");
    std::lock_guard<std::mutex> lk(g.op_mutex());
    auto& ws = detail::workspace(g);
    const double decay = rng.uniform(1.0, 3.0);
    const int cut = band_limit > 0 ? band_limit : std::max(4, g.points(0) / 3);
    std::vector<double> coeff(ws.total(), 0.0);
    for (std::size_t m = 1; m < ws.total(); ++m) {
        bool inside = true;
        double mag = 0.0;
        for (int d = 0; d < g.dimension(); ++d) {
            const int md = ws.axis_index(m, d);
            if (md > cut) inside = false;
            mag += md * md;
        }
        if (!inside) continue;
        coeff[m] = rng.normal() / std::pow(std::max(1.0, mag), 0.5 * decay);
    }
    return ScalarField(grid, ws.cos_synthesize(coeff));
}

inline ScalarField normalize_h1(ScalarField u) {
    const VectorField gu = gradient(u);
    double h1 = inner_product(u, u);
    for (int d = 0; d < u.grid()->dimension(); ++d)
        h1 += inner_product(gu[d], gu[d]);
    const double scale = 1.0 / std::sqrt(std::max(h1, 1e-300));
    for (auto& v : u.values()) v *= scale;
    return u;
}

// In-sample maximization of the defining ratios, inflated by 1.1.
inline DomainConstants estimate_constants(const GridPtr& grid, int sample_count,
                                          std::uint64_t seed = 2024) {
    if (grid->boundary() != Boundary::neumann_box)
        throw std::invalid_argument("estimate_constants: neumann-box grids only");
    const int N = grid->dimension();
    DomainConstants dc;
    dc.two_star = N > 2 ? 2.0 * N / (N - 2.0) : 6.0; // 2* fixed at 6 for N = 2
    dc.sample_count = sample_count;
    dc.seed = seed;
    Rng rng(seed);
    bool any = false;
    for (int s = 0; s < sample_count; ++s) {
        ScalarField u = normalize_h1(random_neumann_field(grid, rng));
        const VectorField gu = gradient(u);
        double g2 = 0.0;
        for (int d = 0; d < N; ++d) g2 += inner_product(gu[d], gu[d]);
        if (g2 < 1e-20) continue; // degenerate constant sample
        any = true;
        ScalarField centered = u;
        const double mu = mean_value(u);
        for (auto& v : centered.values()) v -= mu;
        dc.c_omega = std::max(dc.c_omega,
                              lp_norm(centered, dc.two_star) / std::sqrt(g2));

        // Neumann solve -Lap u = g with mean-zero g
        ScalarField rhs = normalize_h1(random_neumann_field(grid, rng));
        const double rmu = mean_value(rhs);
        for (auto& v : rhs.values()) v -= rmu;
        ScalarField sol = apply_mode_multiplier(
            rhs, [](double lam) { return lam > 0.0 ? 1.0 / lam : 0.0; });
        const double w2p = lp_norm(hessian_frobenius(sol), dc.two_star) +
                           lp_norm(gradient(sol), dc.two_star) +
                           lp_norm(sol, dc.two_star);
        dc.c_cz = std::max(dc.c_cz, w2p / lp_norm(rhs, dc.two_star));
    }
    if (!any)
        throw std::runtime_error("estimate_constants: degenerate all-constant samples");
    dc.c_omega *= 1.1;
    dc.c_cz *= 1.1;
    return dc;
}

struct InterpCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double a_k = 0.0;
    double b_k = 0.0;
};

// Prop.-style bound of int |grad u|^{2 alpha} by
// (((2a-2)c_cz + 1) c_omega)^{b_k} ||Lap u||_{2*}^{b_k} ||grad u||_2^{b_k}
// (int |grad u|^{a_k})^{e_k}.
inline InterpCheck interp_inequality_check(const ScalarField& u, double alpha,
                                           int k, const DomainConstants& dc,
                                           double planar_s = 1.2) {
    const int N = u.grid()->dimension();
    if (u.grid()->boundary() != Boundary::neumann_box)
        throw std::invalid_argument("interp_inequality_check: neumann-box only");
    const InterpSequences seq =
        N > 2 ? interp_sequences(InterpMode::highdim, N, alpha, k)
              : interp_sequences(InterpMode::planar, planar_s, alpha, k);
    if (seq.a[k] < 0.0)
        throw std::invalid_argument("interp_inequality_check: a_k < 0 at this k");
    if (dc.c_omega <= 0.0 || dc.c_cz <= 0.0)
        throw std::invalid_argument("interp_inequality_check: constants missing");

    InterpCheck chk;
    chk.a_k = seq.a[k];
    chk.b_k = seq.b[k];
    const VectorField gu = gradient(u);
    const ScalarField mag = gu.magnitude();
    double lhs = 0.0, lower = 0.0, g2 = 0.0;
    for (double mv : mag.values()) {
        lhs += std::pow(mv, 2.0 * alpha);
        lower += std::pow(mv, seq.a[k]);
        g2 += mv * mv;
    }
    const double vol = u.grid()->cell_volume();
    lhs *= vol;
    lower *= vol;
    g2 *= vol;
    chk.lhs = lhs;
    const double C = ((2.0 * alpha - 2.0) * dc.c_cz + 1.0) * dc.c_omega;
    chk.rhs = std::pow(C, seq.b[k]) *
              std::pow(lp_norm(laplacian(u), dc.two_star), seq.b[k]) *
              std::pow(std::sqrt(g2), seq.b[k]) * std::pow(lower, seq.exponent(k));
    chk.ratio = chk.rhs > 0.0 ? chk.lhs / chk.rhs : (chk.lhs > 0.0 ? 1e300 : 0.0);
    return chk;
}

} // namespace thinfilm
