// Adaptive Gauss-Kronrod (G7, K15) panel integration plus Gauss-Legendre
// node generation for fixed-order rules.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "thinfilm/util.hpp"

namespace thinfilm {

namespace detail {

// Kronrod-15 abscissae on [0,1] side (symmetric) and weights; Gauss-7 weights
// sit on the odd-index nodes.  Values from the QUADPACK tables.
inline constexpr double kK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double value;
    double error;
};

template <typename F>
PanelResult gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = h * kK15Nodes[i];
        double fv;
        if (i == 7) {
            fv = f(c);
            resk += kK15Weights[i] * fv;
            resg += kG7Weights[3] * fv;
        } else {
            const double f1 = f(c - x);
            const double f2 = f(c + x);
            resk += kK15Weights[i] * (f1 + f2);
            if (i % 2 == 1) resg += kG7Weights[i / 2] * (f1 + f2);
        }
    }
    const double diff = std::abs(resk - resg) * std::abs(h);
    // QUADPACK-style sharpening: the K15 error is ~ |K15-G7|^{3/2}.
    const double scaled = 200.0 * diff;
    const double err = scaled < 1.0 ? diff * std::sqrt(scaled) : diff;
    return {resk * h, std::max(err, 1e-300)};
}

} // namespace detail

struct AdaptiveResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels_used = 0;
    bool converged = false;
};

// Bisection-adaptive GK15 on [a,b].  `initial_panels` seeds a uniform split
// (useful for oscillatory integrands); the worst panel is refined until the
// summed error estimate falls below abs_tol or the budget is exhausted.
template <typename F>
AdaptiveResult adaptive_gk(const F& f, double a, double b, double abs_tol,
                           int panel_budget = 2000, int initial_panels = 1) {
    struct Panel {
        double a, b, value, error;
    };
    std::vector<Panel> panels;
    initial_panels = std::max(1, initial_panels);
    panels.reserve(static_cast<std::size_t>(initial_panels) + 64);
    for (int i = 0; i < initial_panels; ++i) {
        const double pa = a + (b - a) * i / initial_panels;
        const double pb = a + (b - a) * (i + 1) / initial_panels;
        auto r = detail::gk15(f, pa, pb);
        panels.push_back({pa, pb, r.value, r.error});
    }
    AdaptiveResult out;
    out.panels_used = initial_panels;
    while (true) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        out.value = total;
        out.error_estimate = err;
        if (err <= abs_tol) {
            out.converged = true;
            return out;
        }
        if (out.panels_used >= panel_budget) {
            out.converged = false;
            return out;
        }
        Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        auto r1 = detail::gk15(f, p.a, mid);
        auto r2 = detail::gk15(f, mid, p.b);
        panels[worst] = {p.a, mid, r1.value, r1.error};
        panels.push_back({mid, p.b, r2.value, r2.error});
        ++out.panels_used;
    }
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

} // namespace thinfilm
