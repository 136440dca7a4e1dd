// Small shared helpers: constants, geometry factors, error types.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace thinfilm {

inline constexpr double kPi = 3.14159265358979323846;

// Volume of the unit ball in R^N.
inline double unit_ball_volume(int N) {
    return std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
}

// Surface area of the unit sphere in R^N (= N * omega_N).
inline double unit_sphere_area(int N) {
    return N * unit_ball_volume(N);
}

// Quadrature failed to reach the requested tolerance within budget.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Inner nonlinear iteration failed to converge.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

} // namespace thinfilm
