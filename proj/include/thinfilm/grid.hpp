// Rectangular computational domains and sampled fields.
//
// Periodic boxes sample at x_i = i*h; Neumann boxes sample at cell midpoints
// x_i = (i+1/2)*h, the natural collocation for the cosine basis whose members
// satisfy the no-flux condition exactly.  Norms and means use the midpoint
// Riemann sum, which is spectrally accurate for band-limited integrands.
#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinfilm {

enum class Boundary { periodic, neumann_box };

class Grid {
public:
    static std::shared_ptr<const Grid> make(std::vector<double> extents,
                                            std::vector<int> points,
                                            Boundary boundary) {
        if (extents.size() != points.size() || extents.empty() || extents.size() > 3)
            throw std::invalid_argument("Grid: dimension must be 1..3");
        for (double L : extents)
            if (!(L > 0.0)) throw std::invalid_argument("Grid: extents must be > 0");
        for (int n : points)
            if (n < 8) throw std::invalid_argument("Grid: need >= 8 points per axis");
        return std::shared_ptr<const Grid>(
            new Grid(std::move(extents), std::move(points), boundary));
    }

    int dimension() const { return static_cast<int>(points_.size()); }
    Boundary boundary() const { return boundary_; }
    double extent(int d) const { return extents_[d]; }
    int points(int d) const { return points_[d]; }
    double spacing(int d) const { return extents_[d] / points_[d]; }
    std::size_t total_points() const { return total_; }
    double cell_volume() const {
        double v = 1.0;
        for (int d = 0; d < dimension(); ++d) v *= spacing(d);
        return v;
    }
    double volume() const {
        double v = 1.0;
        for (double L : extents_) v *= L;
        return v;
    }

    double coord(int d, int i) const {
        return boundary_ == Boundary::periodic ? i * spacing(d)
                                               : (i + 0.5) * spacing(d);
    }

    // row-major, last axis contiguous
    std::size_t index(const std::vector<int>& idx) const {
        std::size_t lin = 0;
        for (int d = 0; d < dimension(); ++d) lin = lin * points_[d] + idx[d];
        return lin;
    }
    void unravel(std::size_t lin, std::vector<int>& idx) const {
        idx.resize(dimension());
        for (int d = dimension() - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(lin % points_[d]);
            lin /= points_[d];
        }
    }

    // Transform-plan cache slot; spectral.hpp owns the concrete type.
    std::shared_ptr<void>& workspace_slot() const { return workspace_slot_; }
    std::mutex& op_mutex() const { return op_mutex_; }

private:
    Grid(std::vector<double> extents, std::vector<int> points, Boundary boundary)
        : extents_(std::move(extents)), points_(std::move(points)),
          boundary_(boundary) {
        total_ = 1;
        for (int n : points_) total_ *= static_cast<std::size_t>(n);
    }

    std::vector<double> extents_;
    std::vector<int> points_;
    Boundary boundary_;
    std::size_t total_ = 0;
    mutable std::shared_ptr<void> workspace_slot_;
    mutable std::mutex op_mutex_;
};

using GridPtr = std::shared_ptr<const Grid>;

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(grid_->total_points(), fill) {}
    ScalarField(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->total_points())
            throw std::invalid_argument("ScalarField: value count mismatch");
    }

    template <typename F> // F: (const std::vector<double>& x) -> double
    static ScalarField sample(const GridPtr& grid, F&& f) {
        ScalarField out(grid);
        std::vector<int> idx;
        std::vector<double> x(grid->dimension());
        for (std::size_t lin = 0; lin < grid->total_points(); ++lin) {
            grid->unravel(lin, idx);
            for (int d = 0; d < grid->dimension(); ++d) x[d] = grid->coord(d, idx[d]);
            out.values_[lin] = f(x);
        }
        return out;
    }

    const GridPtr& grid() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    ScalarField& operator+=(const ScalarField& o) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    ScalarField& operator*=(double a) {
        for (double& v : values_) v *= a;
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double a, ScalarField f) { return f *= a; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const GridPtr& grid) {
        for (int d = 0; d < grid->dimension(); ++d) comps_.emplace_back(grid);
    }
    explicit VectorField(std::vector<ScalarField> comps) : comps_(std::move(comps)) {
        for (const auto& c : comps_)
            if (c.grid() != comps_.front().grid())
                throw std::invalid_argument("VectorField: components share one grid");
    }

    const GridPtr& grid() const { return comps_.front().grid(); }
    int dimension() const { return static_cast<int>(comps_.size()); }
    ScalarField& operator[](int d) { return comps_[d]; }
    const ScalarField& operator[](int d) const { return comps_[d]; }

    ScalarField magnitude() const {
        ScalarField out(grid());
        for (std::size_t i = 0; i < out.size(); ++i) {
            double s = 0.0;
            for (const auto& c : comps_) s += c[i] * c[i];
            out[i] = std::sqrt(s);
        }
        return out;
    }

private:
    std::vector<ScalarField> comps_;
};

inline double integral(const ScalarField& f) {
    double s = std::accumulate(f.values().begin(), f.values().end(), 0.0);
    return s * f.grid()->cell_volume();
}

inline double mean_value(const ScalarField& f) {
    return integral(f) / f.grid()->volume();
}

inline double inner_product(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid()->cell_volume();
}

inline double lp_norm(const ScalarField& f, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values()) m = std::max(m, std::abs(v));
        return m;
    }
    if (p < 1.0) throw std::invalid_argument("lp_norm: p >= 1 required");
    double s = 0.0;
    for (double v : f.values()) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid()->cell_volume(), 1.0 / p);
}

inline double lp_norm(const VectorField& v, double p) {
    return lp_norm(v.magnitude(), p);
}

} // namespace thinfilm
