// Spectral differential operators on Grid fields, backed by FFTW.
//
// Neumann boxes use the tensor cosine basis cos(pi m_d (j_d+1/2)/n_d)
// (DCT-II analysis / DCT-III synthesis); axis derivatives move that axis to
// the matching sine basis (DST-III synthesis, DST-II analysis), so gradient,
// divergence and the Laplacian are exact on resolved modes and exactly
// adjoint under the midpoint quadrature.  Periodic boxes use the complex
// trigonometric basis.  Diagonal operators (Helmholtz solves, semigroup
// multipliers) act on the -Laplacian eigenvalue of each mode.
#pragma once

#include <complex>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "thinfilm/grid.hpp"
#include "thinfilm/util.hpp"

namespace thinfilm {
namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class SpectralWorkspace {
public:
    explicit SpectralWorkspace(const Grid& g) : grid_(g) {
        const int dim = g.dimension();
        total_ = g.total_points();
        n_.resize(dim);
        stride_.assign(dim, 1);
        for (int d = 0; d < dim; ++d) n_[d] = g.points(d);
        for (int d = dim - 2; d >= 0; --d) stride_[d] = stride_[d + 1] * n_[d + 1];
        in_ = fftw_alloc_real(total_);
        out_ = fftw_alloc_real(total_);
        cin_ = fftw_alloc_complex(total_);
        cout_ = fftw_alloc_complex(total_);

        lambda_.resize(total_);
        if (g.boundary() == Boundary::neumann_box) {
            cos_analyze_scale_.resize(total_);
            cos_synth_scale_.resize(total_);
            for (std::size_t lin = 0; lin < total_; ++lin) {
                double lam = 0.0, sa = 1.0, ss = 1.0;
                for (int d = 0; d < dim; ++d) {
                    const int m = axis_index(lin, d);
                    const double km = kPi * m / g.extent(d);
                    lam += km * km;
                    sa *= (m == 0 ? 1.0 : 2.0) / (2.0 * n_[d]);
                    ss *= (m == 0 ? 1.0 : 0.5);
                }
                lambda_[lin] = lam;
                cos_analyze_scale_[lin] = sa;
                cos_synth_scale_[lin] = ss;
            }
        } else {
            for (std::size_t lin = 0; lin < total_; ++lin) {
                double lam = 0.0;
                for (int d = 0; d < dim; ++d) {
                    const double k = eigen_wavenumber(d, axis_index(lin, d));
                    lam += k * k;
                }
                lambda_[lin] = lam;
            }
        }
    }

    ~SpectralWorkspace() {
        std::lock_guard<std::mutex> lk(fftw_planner_mutex());
        for (auto& [key, plan] : r2r_plans_) fftw_destroy_plan(plan);
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
        fftw_free(in_);
        fftw_free(out_);
        fftw_free(cin_);
        fftw_free(cout_);
    }

    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    int dim() const { return static_cast<int>(n_.size()); }
    std::size_t total() const { return total_; }
    const std::vector<double>& lambda() const { return lambda_; }

    int axis_index(std::size_t lin, int d) const {
        return static_cast<int>((lin / stride_[d]) % n_[d]);
    }
    std::size_t stride(int d) const { return stride_[d]; }
    int points(int d) const { return n_[d]; }

    // signed frequency for the periodic basis
    int frequency(int d, int m) const { return m <= n_[d] / 2 ? m : m - n_[d]; }
    double eigen_wavenumber(int d, int m) const {
        return 2.0 * kPi * frequency(d, m) / grid_.extent(d);
    }
    // first-derivative wavenumber: Nyquist mode maps to zero to keep output real
    double deriv_wavenumber(int d, int m) const {
        if (2 * m == n_[d]) return 0.0;
        return eigen_wavenumber(d, m);
    }

    // ----- Neumann (r2r) paths -----

    // values -> cosine coefficients A (value_j = sum_m A_m prod cos)
    std::vector<double> cos_analyze(const std::vector<double>& v) {
        run_r2r(all_kinds(FFTW_REDFT10), v.data());
        std::vector<double> a(total_);
        for (std::size_t i = 0; i < total_; ++i) a[i] = out_[i] * cos_analyze_scale_[i];
        return a;
    }

    std::vector<double> cos_synthesize(const std::vector<double>& a) {
        std::vector<double> buf(total_);
        for (std::size_t i = 0; i < total_; ++i) buf[i] = a[i] * cos_synth_scale_[i];
        run_r2r(all_kinds(FFTW_REDFT01), buf.data());
        return take_out();
    }

    // Synthesis of a coefficient array that is a sine series along the axes in
    // `sine_mask` (mode p stored at slot p-1) and cosine along the rest.
    std::vector<double> mixed_synthesize(const std::vector<double>& coeff,
                                         unsigned sine_mask) {
        std::vector<fftw_r2r_kind> kinds(dim());
        std::vector<double> buf(total_, 0.0);
        for (int d = 0; d < dim(); ++d)
            kinds[d] = (sine_mask >> d) & 1u ? FFTW_RODFT01 : FFTW_REDFT01;
        for (std::size_t i = 0; i < total_; ++i) {
            double s = coeff[i];
            if (s == 0.0) continue;
            for (int d = 0; d < dim(); ++d) {
                const int m = axis_index(i, d);
                if ((sine_mask >> d) & 1u) {
                    s *= (m == n_[d] - 1) ? 1.0 : 0.5; // top slot is the (-1)^j term
                } else {
                    s *= (m == 0 ? 1.0 : 0.5);
                }
            }
            buf[i] = s;
        }
        run_r2r(kinds, buf.data());
        return take_out();
    }

    // Analysis with a sine basis along the axes in `sine_mask`; the returned
    // coefficients use slot p-1 for sine mode p.
    std::vector<double> mixed_analyze(const std::vector<double>& v,
                                      unsigned sine_mask) {
        std::vector<fftw_r2r_kind> kinds(dim());
        for (int d = 0; d < dim(); ++d)
            kinds[d] = (sine_mask >> d) & 1u ? FFTW_RODFT10 : FFTW_REDFT10;
        run_r2r(kinds, v.data());
        std::vector<double> a(total_);
        for (std::size_t i = 0; i < total_; ++i) {
            double s = out_[i];
            for (int d = 0; d < dim(); ++d) {
                const int m = axis_index(i, d);
                if ((sine_mask >> d) & 1u) {
                    s *= (m == n_[d] - 1 ? 1.0 : 2.0) / (2.0 * n_[d]);
                } else {
                    s *= (m == 0 ? 1.0 : 2.0) / (2.0 * n_[d]);
                }
            }
            a[i] = s;
        }
        return a;
    }

    // ----- periodic (complex) paths -----

    std::vector<std::complex<double>> fft_forward(const std::vector<double>& v) {
        for (std::size_t i = 0; i < total_; ++i) {
            cin_[i][0] = v[i];
            cin_[i][1] = 0.0;
        }
        ensure_c2c();
        fftw_execute(fwd_);
        std::vector<std::complex<double>> z(total_);
        for (std::size_t i = 0; i < total_; ++i) z[i] = {cout_[i][0], cout_[i][1]};
        return z;
    }

    std::vector<double> fft_inverse_real(const std::vector<std::complex<double>>& z) {
        for (std::size_t i = 0; i < total_; ++i) {
            cin_[i][0] = z[i].real();
            cin_[i][1] = z[i].imag();
        }
        ensure_c2c();
        fftw_execute(bwd_);
        std::vector<double> v(total_);
        const double scale = 1.0 / static_cast<double>(total_);
        for (std::size_t i = 0; i < total_; ++i) v[i] = cout_[i][0] * scale;
        return v;
    }

private:
    std::vector<fftw_r2r_kind> all_kinds(fftw_r2r_kind k) const {
        return std::vector<fftw_r2r_kind>(dim(), k);
    }

    void run_r2r(const std::vector<fftw_r2r_kind>& kinds, const double* src) {
        std::memcpy(in_, src, total_ * sizeof(double));
        fftw_plan plan = nullptr;
        auto key = kinds;
        auto it = r2r_plans_.find(key);
        if (it == r2r_plans_.end()) {
            std::lock_guard<std::mutex> lk(fftw_planner_mutex());
            plan = fftw_plan_r2r(dim(), n_.data(), in_, out_,
                                 const_cast<fftw_r2r_kind*>(kinds.data()),
                                 FFTW_ESTIMATE);
            r2r_plans_.emplace(std::move(key), plan);
        } else {
            plan = it->second;
        }
        fftw_execute(plan);
    }

    void ensure_c2c() {
        if (fwd_) return;
        std::lock_guard<std::mutex> lk(fftw_planner_mutex());
        fwd_ = fftw_plan_dft(dim(), n_.data(), cin_, cout_, FFTW_FORWARD,
                             FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(dim(), n_.data(), cin_, cout_, FFTW_BACKWARD,
                             FFTW_ESTIMATE);
    }

    std::vector<double> take_out() const {
        return std::vector<double>(out_, out_ + total_);
    }

    const Grid& grid_;
    std::size_t total_ = 0;
    std::vector<int> n_;
    std::vector<std::size_t> stride_;
    double* in_ = nullptr;
    double* out_ = nullptr;
    fftw_complex* cin_ = nullptr;
    fftw_complex* cout_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    std::map<std::vector<fftw_r2r_kind>, fftw_plan> r2r_plans_;
    std::vector<double> lambda_;
    std::vector<double> cos_analyze_scale_;
    std::vector<double> cos_synth_scale_;
};

inline SpectralWorkspace& workspace(const Grid& g) {
    auto& slot = g.workspace_slot();
    if (!slot) {
        slot = std::shared_ptr<void>(new SpectralWorkspace(g), [](void* p) {
            delete static_cast<SpectralWorkspace*>(p);
        });
    }
    return *static_cast<SpectralWorkspace*>(slot.get());
}

} // namespace detail

// u -> grad u.  Exact for resolved modes on both boundary types.
inline VectorField gradient(const ScalarField& u) {
    const Grid& g = *u.grid();
    std::lock_guard<std::mutex> lk(g.op_mutex());
    auto& ws = detail::workspace(g);
    VectorField out(u.grid());
    if (g.boundary() == Boundary::neumann_box) {
        const auto a = ws.cos_analyze(u.values());
        for (int d = 0; d < g.dimension(); ++d) {
            std::vector<double> coeff(ws.total(), 0.0);
            for (std::size_t i = 0; i < ws.total(); ++i) {
                const int m = ws.axis_index(i, d);
                if (m == 0) continue;
                const double km = kPi * m / g.extent(d);
                coeff[i - ws.stride(d)] = -km * a[i]; // sine mode m at slot m-1
            }
            out[d] = ScalarField(u.grid(), ws.mixed_synthesize(coeff, 1u << d));
        }
    } else {
        const auto z = ws.fft_forward(u.values());
        for (int d = 0; d < g.dimension(); ++d) {
            std::vector<std::complex<double>> zc(ws.total());
            for (std::size_t i = 0; i < ws.total(); ++i) {
                const double k = ws.deriv_wavenumber(d, ws.axis_index(i, d));
                zc[i] = std::complex<double>(0.0, k) * z[i];
            }
            out[d] = ScalarField(u.grid(), ws.fft_inverse_real(zc));
        }
    }
    return out;
}

// v -> div v, the adjoint route to gradient.
inline ScalarField divergence(const VectorField& v) {
    const Grid& g = *v.grid();
    std::lock_guard<std::mutex> lk(g.op_mutex());
    auto& ws = detail::workspace(g);
    if (g.boundary() == Boundary::neumann_box) {
        std::vector<double> acc(ws.total(), 0.0);
        for (int d = 0; d < g.dimension(); ++d) {
            const auto s = ws.mixed_analyze(v[d].values(), 1u << d);
            for (std::size_t i = 0; i < ws.total(); ++i) {
                const int m = ws.axis_index(i, d);
                if (m == 0) continue; // cosine target mode m from sine slot m-1
                const double km = kPi * m / g.extent(d);
                acc[i] += km * s[i - ws.stride(d)];
            }
        }
        return ScalarField(v.grid(), ws.cos_synthesize(acc));
    }
    std::vector<std::complex<double>> zc(ws.total(), 0.0);
    for (int d = 0; d < g.dimension(); ++d) {
        const auto z = ws.fft_forward(v[d].values());
        for (std::size_t i = 0; i < ws.total(); ++i) {
            const double k = ws.deriv_wavenumber(d, ws.axis_index(i, d));
            zc[i] += std::complex<double>(0.0, k) * z[i];
        }
    }
    return ScalarField(v.grid(), ws.fft_inverse_real(zc));
}

// Diagonal operator: each mode with -Laplacian eigenvalue lambda is scaled by
// mult(lambda).  Covers the Laplacian, Helmholtz solves and semigroups.
template <typename F>
ScalarField apply_mode_multiplier(const ScalarField& u, F&& mult) {
    const Grid& g = *u.grid();
    std::lock_guard<std::mutex> lk(g.op_mutex());
    auto& ws = detail::workspace(g);
    if (g.boundary() == Boundary::neumann_box) {
        auto a = ws.cos_analyze(u.values());
        for (std::size_t i = 0; i < ws.total(); ++i) a[i] *= mult(ws.lambda()[i]);
        return ScalarField(u.grid(), ws.cos_synthesize(a));
    }
    auto z = ws.fft_forward(u.values());
    for (std::size_t i = 0; i < ws.total(); ++i) z[i] *= mult(ws.lambda()[i]);
    return ScalarField(u.grid(), ws.fft_inverse_real(z));
}

inline ScalarField laplacian(const ScalarField& u) {
    return apply_mode_multiplier(u, [](double lam) { return -lam; });
}

// (-Lap + tau) w = rhs;  tau > 0 keeps the mean mode invertible.
inline ScalarField helmholtz_solve(const ScalarField& rhs, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("helmholtz_solve: tau must be > 0");
    return apply_mode_multiplier(rhs, [tau](double lam) { return 1.0 / (lam + tau); });
}

// d2u/dx_i dx_j
inline ScalarField second_derivative(const ScalarField& u, int i, int j) {
    const Grid& g = *u.grid();
    std::lock_guard<std::mutex> lk(g.op_mutex());
    auto& ws = detail::workspace(g);
    if (g.boundary() == Boundary::neumann_box) {
        const auto a = ws.cos_analyze(u.values());
        std::vector<double> coeff(ws.total(), 0.0);
        if (i == j) {
            for (std::size_t lin = 0; lin < ws.total(); ++lin) {
                const int m = ws.axis_index(lin, i);
                const double km = kPi * m / g.extent(i);
                coeff[lin] = -km * km * a[lin];
            }
            return ScalarField(u.grid(), ws.cos_synthesize(coeff));
        }
        for (std::size_t lin = 0; lin < ws.total(); ++lin) {
            const int mi = ws.axis_index(lin, i);
            const int mj = ws.axis_index(lin, j);
            if (mi == 0 || mj == 0) continue;
            const double ki = kPi * mi / g.extent(i);
            const double kj = kPi * mj / g.extent(j);
            coeff[lin - ws.stride(i) - ws.stride(j)] = ki * kj * a[lin];
        }
        return ScalarField(u.grid(),
                           ws.mixed_synthesize(coeff, (1u << i) | (1u << j)));
    }
    auto z = ws.fft_forward(u.values());
    for (std::size_t lin = 0; lin < ws.total(); ++lin) {
        const double ki = i == j ? ws.eigen_wavenumber(i, ws.axis_index(lin, i))
                                 : ws.deriv_wavenumber(i, ws.axis_index(lin, i));
        const double kj = i == j ? ki : ws.deriv_wavenumber(j, ws.axis_index(lin, j));
        z[lin] *= -ki * kj;
    }
    return ScalarField(u.grid(), ws.fft_inverse_real(z));
}

// pointwise Frobenius norm of the Hessian
inline ScalarField hessian_frobenius(const ScalarField& u) {
    const int dim = u.grid()->dimension();
    ScalarField acc(u.grid());
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            const ScalarField dij = second_derivative(u, i, j);
            for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += dij[p] * dij[p];
        }
    }
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] = std::sqrt(acc[p]);
    return acc;
}

// Coefficient-space l2 sum for Parseval checks: returns sum over modes of
// |coefficient|^2 times the mode's L2 mass, which equals ||u||_2^2.
inline double coefficient_norm_sq(const ScalarField& u) {
    const Grid& g = *u.grid();
    std::lock_guard<std::mutex> lk(g.op_mutex());
    auto& ws = detail::workspace(g);
    double s = 0.0;
    if (g.boundary() == Boundary::neumann_box) {
        const auto a = ws.cos_analyze(u.values());
        for (std::size_t i = 0; i < ws.total(); ++i) {
            double mass = 1.0;
            for (int d = 0; d < g.dimension(); ++d)
                mass *= (ws.axis_index(i, d) == 0 ? 1.0 : 0.5) * g.extent(d);
            s += a[i] * a[i] * mass;
        }
        return s;
    }
    const auto z = ws.fft_forward(u.values());
    const double scale = g.volume() / (static_cast<double>(ws.total()) *
                                       static_cast<double>(ws.total()));
    for (const auto& c : z) s += std::norm(c);
    return s * scale;
}

} // namespace thinfilm
