// The vector field g(xi): built-in catalog (zero, cubic, power), optional
// potentials, the growth envelope |g| <= c_g |xi|^{alpha_g} + c_g, and the
// bounded truncation h(x, xi) = g(grad u0) + theta(g(xi) - g(grad u0)).
#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "thinfilm/grid.hpp"
#include "thinfilm/rng.hpp"

namespace thinfilm {

// C-infinity cutoff with theta(s) = s on (-1,1) and theta = 0 for |s| >= R.
// The taper is the standard exp(-1/x) partition bump, flat to all orders at
// both junctions.
struct ThetaCutoff {
    double outer_radius = 2.0;

    double operator()(double s) const {
        const double a = std::abs(s);
        if (a <= 1.0) return s;
        if (a >= outer_radius) return 0.0;
        const double x = (a - 1.0) / (outer_radius - 1.0);
        auto phi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
        const double ramp = phi(1.0 - x) / (phi(x) + phi(1.0 - x));
        return s * ramp;
    }

    // max |theta|, scanned once (the taper peaks a little above 1)
    double sup() const {
        double m = 1.0;
        for (int i = 0; i <= 2000; ++i) {
            const double s = 1.0 + (outer_radius - 1.0) * i / 2000.0;
            m = std::max(m, std::abs((*this)(s)));
        }
        return m;
    }
};

enum class GForm { zero, cubic, power, truncated };

class NonlinearitySpec {
public:
    static NonlinearitySpec zero() {
        NonlinearitySpec s;
        s.form_ = GForm::zero;
        s.conservative_ = true;
        s.growth_c_ = 1.0;
        s.growth_alpha_ = 1.0;
        return s;
    }

    // g(xi) = (c |xi|^2 + 1) xi, potential c|xi|^4/4 + |xi|^2/2
    static NonlinearitySpec cubic(double c) {
        if (!(c > 0.0)) throw std::invalid_argument("cubic: c must be > 0");
        NonlinearitySpec s;
        s.form_ = GForm::cubic;
        s.c_ = c;
        s.conservative_ = true;
        s.growth_c_ = c + 1.0;
        s.growth_alpha_ = 3.0;
        return s;
    }

    // g(xi) = |xi|^{alpha-1} xi, potential |xi|^{alpha+1}/(alpha+1)
    static NonlinearitySpec power(double alpha) {
        if (!(alpha > 0.0)) throw std::invalid_argument("power: alpha must be > 0");
        NonlinearitySpec s;
        s.form_ = GForm::power;
        s.alpha_ = alpha;
        s.conservative_ = true;
        s.growth_c_ = 1.0;
        s.growth_alpha_ = alpha;
        return s;
    }

    GForm form() const { return form_; }
    double c() const { return c_; }
    double alpha() const { return alpha_; }
    bool conservative() const { return conservative_; }
    double growth_c() const { return growth_c_; }
    double growth_alpha() const { return growth_alpha_; }
    double bound() const { return bound_M_; } // truncated only
    const NonlinearitySpec& base() const { return *base_; }
    const VectorField& reference_gradient() const { return *ref_grad_; }
    const ThetaCutoff& theta() const { return theta_; }

    // g at a single xi; for the truncated form the clamp reference must be
    // supplied (it varies with position).
    std::vector<double> eval(const std::vector<double>& xi) const {
        if (form_ == GForm::truncated)
            throw std::logic_error("truncated g needs a reference point; use eval_at");
        return eval_uniform(xi);
    }

    std::vector<double> eval_at(const std::vector<double>& xi,
                                const std::vector<double>& ref_xi) const {
        if (form_ != GForm::truncated) return eval_uniform(xi);
        const auto gxi = base_->eval_uniform(xi);
        const auto gref = base_->eval_uniform(ref_xi);
        std::vector<double> out(xi.size());
        for (std::size_t d = 0; d < xi.size(); ++d) {
            const double diff = gxi[d] - gref[d];
            // theta(s) = s on the identity region; return g itself so h == g
            // there exactly
            out[d] = std::abs(diff) <= 1.0 ? gxi[d] : gref[d] + theta_(diff);
        }
        return out;
    }

    // pointwise application to a sampled gradient field
    VectorField apply(const VectorField& grad) const {
        const int dim = grad.dimension();
        VectorField out(grad.grid());
        const std::size_t n = grad[0].size();
        switch (form_) {
            case GForm::zero:
                return out;
            case GForm::cubic:
                for (std::size_t i = 0; i < n; ++i) {
                    double q = 0.0;
                    for (int d = 0; d < dim; ++d) q += grad[d][i] * grad[d][i];
                    const double s = c_ * q + 1.0;
                    for (int d = 0; d < dim; ++d) out[d][i] = s * grad[d][i];
                }
                return out;
            case GForm::power:
                for (std::size_t i = 0; i < n; ++i) {
                    double q = 0.0;
                    for (int d = 0; d < dim; ++d) q += grad[d][i] * grad[d][i];
                    const double s = q > 0.0 ? std::pow(q, 0.5 * (alpha_ - 1.0)) : 0.0;
                    for (int d = 0; d < dim; ++d) out[d][i] = s * grad[d][i];
                }
                return out;
            case GForm::truncated: {
                const VectorField gv = base_->apply(grad);
                for (std::size_t i = 0; i < n; ++i)
                    for (int d = 0; d < dim; ++d) {
                        const double diff = gv[d][i] - (*ref_g_)[d][i];
                        out[d][i] = std::abs(diff) <= 1.0
                                        ? gv[d][i]
                                        : (*ref_g_)[d][i] + theta_(diff);
                    }
                return out;
            }
        }
        return out;
    }

    double potential(const std::vector<double>& xi) const {
        if (!conservative_)
            throw std::logic_error("potential: nonlinearity is not conservative");
        double q = 0.0;
        for (double x : xi) q += x * x;
        switch (form_) {
            case GForm::zero:
                return 0.0;
            case GForm::cubic:
                return c_ * q * q / 4.0 + q / 2.0;
            case GForm::power:
                return std::pow(q, 0.5 * (alpha_ + 1.0)) / (alpha_ + 1.0);
            default:
                throw std::logic_error("potential: unsupported form");
        }
    }

    // potential sampled on a gradient field
    ScalarField potential_field(const VectorField& grad) const {
        if (!conservative_)
            throw std::logic_error("potential: nonlinearity is not conservative");
        const int dim = grad.dimension();
        ScalarField out(grad.grid());
        for (std::size_t i = 0; i < out.size(); ++i) {
            double q = 0.0;
            for (int d = 0; d < dim; ++d) q += grad[d][i] * grad[d][i];
            switch (form_) {
                case GForm::zero:
                    break;
                case GForm::cubic:
                    out[i] = c_ * q * q / 4.0 + q / 2.0;
                    break;
                case GForm::power:
                    out[i] = std::pow(q, 0.5 * (alpha_ + 1.0)) / (alpha_ + 1.0);
                    break;
                default:
                    throw std::logic_error("potential: unsupported form");
            }
        }
        return out;
    }

    friend NonlinearitySpec truncate_to_h(const NonlinearitySpec& base,
                                          const VectorField& ref_grad,
                                          const ThetaCutoff& theta);

private:
    std::vector<double> eval_uniform(const std::vector<double>& xi) const {
        std::vector<double> out(xi.size(), 0.0);
        double q = 0.0;
        for (double x : xi) q += x * x;
        switch (form_) {
            case GForm::zero:
                break;
            case GForm::cubic:
                for (std::size_t d = 0; d < xi.size(); ++d)
                    out[d] = (c_ * q + 1.0) * xi[d];
                break;
            case GForm::power: {
                const double s = q > 0.0 ? std::pow(q, 0.5 * (alpha_ - 1.0)) : 0.0;
                for (std::size_t d = 0; d < xi.size(); ++d) out[d] = s * xi[d];
                break;
            }
            default:
                break;
        }
        return out;
    }

    GForm form_ = GForm::zero;
    double c_ = 1.0;
    double alpha_ = 1.0;
    bool conservative_ = false;
    double growth_c_ = 1.0;
    double growth_alpha_ = 1.0;
    double bound_M_ = 0.0;
    std::shared_ptr<const NonlinearitySpec> base_;
    std::shared_ptr<const VectorField> ref_grad_;
    std::shared_ptr<const VectorField> ref_g_; // g(grad u0), cached
    ThetaCutoff theta_;
};

// The bounded surrogate h of the base nonlinearity around a reference
// gradient: h = g wherever every componentwise clamp is inactive, and
// sup |h| <= sup |g(ref)| + sqrt(N) sup|theta| everywhere.
inline NonlinearitySpec truncate_to_h(const NonlinearitySpec& base,
                                      const VectorField& ref_grad,
                                      const ThetaCutoff& theta) {
    NonlinearitySpec s;
    s.form_ = GForm::truncated;
    s.conservative_ = false;
    s.base_ = std::make_shared<NonlinearitySpec>(base);
    s.ref_grad_ = std::make_shared<VectorField>(ref_grad);
    s.ref_g_ = std::make_shared<VectorField>(base.apply(ref_grad));
    s.theta_ = theta;
    const double sup_ref = lp_norm(*s.ref_g_, std::numeric_limits<double>::infinity());
    const double dim = static_cast<double>(ref_grad.dimension());
    s.bound_M_ = sup_ref + std::sqrt(dim) * theta.sup();
    s.growth_c_ = s.bound_M_;
    s.growth_alpha_ = 1.0;
    return s;
}

struct GrowthReport {
    double max_ratio = 0.0;
    std::vector<double> worst_xi;
    bool ok = true;
};

// max over random probes of |g(xi)| / (c_g |xi|^{alpha_g} + c_g)
inline GrowthReport growth_check(const NonlinearitySpec& spec, int sample_count,
                                 int dim = 2, std::uint64_t seed = 12345,
                                 double radius = 20.0) {
    if (sample_count < 1) throw std::invalid_argument("growth_check: samples >= 1");
    Rng rng(seed);
    GrowthReport rep;
    rep.worst_xi.assign(dim, 0.0);
    for (int s = 0; s < sample_count; ++s) {
        std::vector<double> xi(dim);
        for (auto& x : xi) x = rng.uniform(-radius, radius);
        std::vector<double> ref(dim, 0.0);
        const auto g = spec.eval_at(xi, ref);
        double gq = 0.0, xq = 0.0;
        for (int d = 0; d < dim; ++d) {
            gq += g[d] * g[d];
            xq += xi[d] * xi[d];
        }
        const double envelope = spec.growth_c() * std::pow(std::sqrt(xq),
                                                           spec.growth_alpha()) +
                                spec.growth_c();
        const double ratio = std::sqrt(gq) / envelope;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.worst_xi = xi;
        }
    }
    rep.ok = rep.max_ratio <= 1.0;
    return rep;
}

} // namespace thinfilm
