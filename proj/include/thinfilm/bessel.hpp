// Bessel functions of the first kind for the handful of orders the kernel
// profile needs (nu = (N-2)/2 and the (F3)-shifted orders, N <= 10).
//
// Two regimes:
//   z <= 14 : ascending power series on the scaled function
//             Jhat_nu(z) = J_nu(z) / (z/2)^nu, which is entire and avoids
//             the 0*inf prefactor of the profile integrand at eta = 0;
//   z >  14 : Hankel asymptotic expansion (P, Q cosine/sine form).
#pragma once

#include <cmath>
#include <limits>

#include "thinfilm/util.hpp"

namespace thinfilm {

namespace detail {

// Jhat_nu(z) = sum_m (-z^2/4)^m / (m! Gamma(nu+m+1)).  Good to ~1e-13 for
// z <= 14, nu >= -1/2 (worst-case cancellation amplifies roundoff ~1e4).
inline double scaled_j_series(double nu, double z) {
    const double x = -0.25 * z * z;
    double term = 1.0 / std::tgamma(nu + 1.0);
    double sum = term;
    for (int m = 0; m < 80; ++m) {
        term *= x / ((m + 1.0) * (nu + m + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

// Hankel expansion J_nu(z) ~ sqrt(2/(pi z)) (P cos(chi) - Q sin(chi)),
// chi = z - (nu/2 + 1/4) pi.  Truncated at the smallest term.
inline double j_asymptotic(double nu, double z) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double prev = std::numeric_limits<double>::max();
    for (int k = 0; k < 30; ++k) {
        const double odd = 2.0 * k + 1.0;
        term *= (mu - odd * odd) / (8.0 * z * (k + 1.0));
        if (std::abs(term) >= prev) break;
        prev = std::abs(term);
        const int j = k + 1; // term now carries a_{k+1}
        const double signed_term = ((j / 2) % 2 == 0 ? term : -term);
        if (j % 2 == 0)
            p += signed_term;
        else
            q += signed_term;
        if (std::abs(term) < 1e-18) break;
    }
    const double chi = z - (0.5 * nu + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace detail

// J_nu(z) / (z/2)^nu, entire in z; value 1/Gamma(nu+1) at z = 0.
inline double scaled_bessel_j(double nu, double z) {
    if (z <= 14.0) return detail::scaled_j_series(nu, z);
    return detail::j_asymptotic(nu, z) / std::pow(0.5 * z, nu);
}

inline double bessel_j(double nu, double z) {
    if (z <= 14.0) return detail::scaled_j_series(nu, z) * std::pow(0.5 * z, nu);
    return detail::j_asymptotic(nu, z);
}

} // namespace thinfilm
