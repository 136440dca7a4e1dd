// Energy functionals of the model for conservative g = grad(phi).
//
// `energy` is the formal functional int( (Δu)^2/2 - phi(grad u) ).
// `lyapunov_energy` is int( (Δu)^2/2 + phi(grad u) ), the quantity that the
// flow dissipates (testing the equation with du/dt gives
// ||du/dt||^2 + d/dt lyapunov_energy = 0); trajectory monitors use it.
#pragma once

#include "thinfilm/nonlinearity.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm {

inline double energy(const ScalarField& u, const NonlinearitySpec& spec) {
    if (!spec.conservative())
        throw std::logic_error("energy: defined only for conservative g");
    const ScalarField du = laplacian(u);
    const ScalarField phi = spec.potential_field(gradient(u));
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += 0.5 * du[i] * du[i] - phi[i];
    return s * u.grid()->cell_volume();
}

inline double lyapunov_energy(const ScalarField& u, const NonlinearitySpec& spec) {
    if (!spec.conservative())
        throw std::logic_error("lyapunov_energy: defined only for conservative g");
    const ScalarField du = laplacian(u);
    const ScalarField phi = spec.potential_field(gradient(u));
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += 0.5 * du[i] * du[i] + phi[i];
    return s * u.grid()->cell_volume();
}

} // namespace thinfilm
