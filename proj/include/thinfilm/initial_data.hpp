// Catalog of deterministic initial data referenced by run configurations and
// the verification suites.
#pragma once

#include <cmath>

#include "thinfilm/config.hpp"
#include "thinfilm/nonlinearity.hpp"
#include "thinfilm/rng.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm {

// Random field from exact basis modes with amplitudes |m|^{-decay}; the
// workhorse "bands" datum.
inline ScalarField band_limited_data(const GridPtr& grid, int kmax, double decay,
                                     double amplitude, double mean,
                                     std::uint64_t seed) {
    const Grid& g = *grid;
    Rng rng(seed);
    ScalarField u(grid);
    {
        std::lock_guard<std::mutex> lk(g.op_mutex());
        auto& ws = detail::workspace(g);
        if (g.boundary() == Boundary::neumann_box) {
            std::vector<double> coeff(ws.total(), 0.0);
            for (std::size_t m = 1; m < ws.total(); ++m) {
                double mag = 0.0;
                bool inside = true;
                for (int d = 0; d < g.dimension(); ++d) {
                    const int md = ws.axis_index(m, d);
                    if (md > kmax) inside = false;
                    mag += md * md;
                }
                if (!inside || mag == 0.0) continue;
                coeff[m] = rng.normal() / std::pow(mag, 0.5 * decay);
            }
            u = ScalarField(grid, ws.cos_synthesize(coeff));
        } else {
            std::vector<std::complex<double>> z(ws.total(), {0.0, 0.0});
            for (std::size_t m = 0; m < ws.total(); ++m) {
                double mag = 0.0;
                bool inside = true;
                for (int d = 0; d < g.dimension(); ++d) {
                    const int f = ws.frequency(d, ws.axis_index(m, d));
                    if (std::abs(f) > kmax || 2 * ws.axis_index(m, d) == g.points(d))
                        inside = false;
                    mag += double(f) * f;
                }
                if (!inside || mag == 0.0) continue;
                const double amp = rng.normal() / std::pow(mag, 0.5 * decay);
                const double phase = rng.uniform(0.0, 2.0 * kPi);
                z[m] = std::polar(amp, phase);
            }
            // enforce Hermitian symmetry by synthesizing the real part only:
            // values = Re(ifft(z)) which equals the symmetrized field
            u = ScalarField(grid, ws.fft_inverse_real(z));
        }
    }
    double sup = 0.0;
    for (double v : u.values()) sup = std::max(sup, std::abs(v));
    const double scale = sup > 0.0 ? amplitude / sup : 0.0;
    for (auto& v : u.values()) v = scale * v + mean;
    return u;
}

// Flat-gradient-spectrum data: mode m carries amplitude 1/m, so every
// resolved wavenumber contributes comparably to |grad u|; `amplitude`
// normalizes sup |grad u0|.  Used by the contraction studies.
inline ScalarField envelope_data(const GridPtr& grid, int kmax, double amplitude,
                                 std::uint64_t seed) {
    const Grid& g = *grid;
    if (g.boundary() != Boundary::periodic)
        throw std::invalid_argument("envelope_data: periodic grids only");
    Rng rng(seed);
    ScalarField u(grid);
    {
        std::lock_guard<std::mutex> lk(g.op_mutex());
        auto& ws = detail::workspace(g);
        std::vector<std::complex<double>> z(ws.total(), {0.0, 0.0});
        for (std::size_t m = 0; m < ws.total(); ++m) {
            double mag = 0.0;
            bool inside = true;
            for (int d = 0; d < g.dimension(); ++d) {
                const int f = ws.frequency(d, ws.axis_index(m, d));
                if (std::abs(f) > kmax || 2 * ws.axis_index(m, d) == g.points(d))
                    inside = false;
                mag += double(f) * f;
            }
            if (!inside || mag == 0.0) continue;
            z[m] = std::polar(1.0 / std::sqrt(mag), rng.uniform(0.0, 2.0 * kPi));
        }
        u = ScalarField(grid, ws.fft_inverse_real(z));
    }
    const VectorField gu = gradient(u);
    const double sup = lp_norm(gu, std::numeric_limits<double>::infinity());
    const double scale = sup > 0.0 ? amplitude / sup : 0.0;
    for (auto& v : u.values()) v *= scale;
    return u;
}

// Gaussian bump at the box center (sharp datum for the L^1 decay rate).
inline ScalarField bump_data(const GridPtr& grid, double width, double amplitude) {
    return ScalarField::sample(grid, [&](const std::vector<double>& x) {
        double r2 = 0.0;
        for (int d = 0; d < grid->dimension(); ++d) {
            const double c = x[d] - 0.5 * grid->extent(d);
            r2 += c * c;
        }
        return amplitude * std::exp(-r2 / (width * width));
    });
}

// Opposing tanh walls at 1/4 and 3/4 of the box (deg-0 homogeneous locally;
// sharp datum for the L^inf decay rate).
inline ScalarField step_pair_data(const GridPtr& grid, double width,
                                  double amplitude) {
    return ScalarField::sample(grid, [&](const std::vector<double>& x) {
        const double L = grid->extent(0);
        return amplitude * (std::tanh((x[0] - 0.25 * L) / width) -
                            std::tanh((x[0] - 0.75 * L) / width) - 1.0);
    });
}

// (r^2 + a^2)^{-1/2} around the box center (|y|^{-N/p} homogeneity for the
// (N, p) = (2, 2) decay rate).
inline ScalarField inverse_sqrt_data(const GridPtr& grid, double a,
                                     double amplitude) {
    return ScalarField::sample(grid, [&](const std::vector<double>& x) {
        double r2 = 0.0;
        for (int d = 0; d < grid->dimension(); ++d) {
            const double c = x[d] - 0.5 * grid->extent(d);
            r2 += c * c;
        }
        return amplitude / std::sqrt(r2 + a * a);
    });
}

inline ScalarField make_initial_data(const GridPtr& grid, const RunConfig& cfg) {
    if (cfg.u0_kind == "constant") return ScalarField(grid, cfg.u0_mean);
    if (cfg.u0_kind == "bands")
        return band_limited_data(grid, cfg.u0_kmax, cfg.u0_decay, cfg.u0_amplitude,
                                 cfg.u0_mean, cfg.seed);
    if (cfg.u0_kind == "envelope")
        return envelope_data(grid, cfg.u0_kmax, cfg.u0_amplitude, cfg.seed);
    if (cfg.u0_kind == "bump") return bump_data(grid, cfg.u0_width, cfg.u0_amplitude);
    if (cfg.u0_kind == "step-pair")
        return step_pair_data(grid, cfg.u0_width, cfg.u0_amplitude);
    if (cfg.u0_kind == "inverse-sqrt")
        return inverse_sqrt_data(grid, cfg.u0_width, cfg.u0_amplitude);
    throw std::invalid_argument("make_initial_data: unknown u0.kind " + cfg.u0_kind);
}

inline NonlinearitySpec make_nonlinearity(const RunConfig& cfg,
                                          const GridPtr& grid_for_truncation,
                                          const ScalarField* u0 = nullptr) {
    if (cfg.g_form == "zero") return NonlinearitySpec::zero();
    if (cfg.g_form == "cubic") return NonlinearitySpec::cubic(cfg.g_c);
    if (cfg.g_form == "power") return NonlinearitySpec::power(cfg.g_alpha);
    if (cfg.g_form == "truncated") {
        if (!u0)
            throw std::invalid_argument("truncated g needs the initial datum");
        ThetaCutoff theta;
        theta.outer_radius = cfg.g_theta_outer;
        // base form from alpha: power growth is the (R4) reading
        auto base = NonlinearitySpec::power(cfg.g_alpha);
        return truncate_to_h(base, gradient(*u0), theta);
    }
    throw std::invalid_argument("make_nonlinearity: unknown g.form " + cfg.g_form);
}

} // namespace thinfilm
