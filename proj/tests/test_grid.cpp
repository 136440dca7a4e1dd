#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfilm/energy.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/spectral.hpp"
#include "test_helpers.hpp"

using namespace thinfilm;

namespace {
GridPtr periodic1(int n = 64, double L = 1.0) {
    return Grid::make({L}, {n}, Boundary::periodic);
}
GridPtr neumann2(int n = 32, double L = 1.0) {
    return Grid::make({L, L}, {n, n}, Boundary::neumann_box);
}
} // namespace

TEST_CASE("gradient of constants and basis modes", "[grid]") {
    auto gp = periodic1();
    ScalarField c(gp, 3.5);
    auto gc = gradient(c);
    CHECK(lp_norm(gc, std::numeric_limits<double>::infinity()) < 1e-12);

    // periodic: f = cos(2 pi x / L) -> -(2 pi / L) sin(2 pi x / L)
    const double L = 1.0;
    auto f = ScalarField::sample(gp, [&](const std::vector<double>& x) {
        return std::cos(2.0 * kPi * x[0] / L);
    });
    auto g = gradient(f);
    auto expect = ScalarField::sample(gp, [&](const std::vector<double>& x) {
        return -(2.0 * kPi / L) * std::sin(2.0 * kPi * x[0] / L);
    });
    for (std::size_t i = 0; i < g[0].size(); ++i)
        CHECK(g[0][i] == Catch::Approx(expect[i]).margin(1e-10));

    // neumann: f = cos(pi m x / L) modes are exact too
    auto gn = neumann2();
    auto fn = ScalarField::sample(gn, [&](const std::vector<double>& x) {
        return std::cos(kPi * 3.0 * x[0]) * std::cos(kPi * 2.0 * x[1]);
    });
    auto gg = gradient(fn);
    auto ex0 = ScalarField::sample(gn, [&](const std::vector<double>& x) {
        return -3.0 * kPi * std::sin(kPi * 3.0 * x[0]) * std::cos(kPi * 2.0 * x[1]);
    });
    for (std::size_t i = 0; i < gg[0].size(); ++i)
        CHECK(gg[0][i] == Catch::Approx(ex0[i]).margin(1e-9));
}

TEST_CASE("gradient matches 4th-order finite differences", "[grid]") {
    std::vector<double> errs;
    for (int n : {64, 128, 256}) {
        auto gp = periodic1(n);
        auto f = testing::random_band_limited(gp, 5, 42);
        auto g = gradient(f);
        const double h = gp->spacing(0);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            auto at = [&](int j) { return f[(j % n + n) % n]; };
            const double fd =
                (-at(i + 2) + 8 * at(i + 1) - 8 * at(i - 1) + at(i - 2)) / (12 * h);
            worst = std::max(worst, std::abs(fd - g[0][i]));
        }
        // absolute scale: |f^{(5)}| <= (2 pi kmax)^5 * sum|amps|
        CHECK(worst < 1e7 * std::pow(h, 4));
        errs.push_back(worst);
    }
    // halving h divides the discrepancy by ~16 (the FD side is the O(h^4) one)
    CHECK(errs[0] / errs[1] == Catch::Approx(16.0).margin(6.0));
    CHECK(errs[1] / errs[2] == Catch::Approx(16.0).margin(6.0));
}

TEST_CASE("helmholtz solve", "[grid]") {
    auto gn = neumann2();
    const double tau = 0.37;

    ScalarField c(gn, 2.0);
    auto w = helmholtz_solve(c, tau);
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(w[i] == Catch::Approx(2.0 / tau).epsilon(1e-12));

    // single mode scales by 1/(lambda + tau)
    auto mode = ScalarField::sample(gn, [&](const std::vector<double>& x) {
        return std::cos(kPi * 2.0 * x[0]);
    });
    const double lam = std::pow(2.0 * kPi, 2);
    auto wm = helmholtz_solve(mode, tau);
    for (std::size_t i = 0; i < wm.size(); ++i)
        CHECK(wm[i] == Catch::Approx(mode[i] / (lam + tau)).margin(1e-12));

    // round trip: -lap(w) + tau w == rhs to 1e-12 relative
    auto rhs = testing::random_band_limited(gn, 6, 7);
    auto sol = helmholtz_solve(rhs, tau);
    auto back = laplacian(sol);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const double r = -back[i] + tau * sol[i] - rhs[i];
        num += r * r;
        den += rhs[i] * rhs[i];
    }
    CHECK(std::sqrt(num / den) < 1e-12);
}

TEST_CASE("adjointness and laplacian factorization", "[grid]") {
    for (auto grid : {neumann2(), GridPtr(Grid::make({2.0}, {64}, Boundary::periodic))}) {
        auto f = testing::random_band_limited(grid, 5, 11);
        auto u = testing::random_band_limited(grid, 5, 13);
        VectorField v = gradient(u);

        // int div(v) f = -int v . grad(f)
        const double lhs = inner_product(divergence(v), f);
        auto gf = gradient(f);
        double rhs = 0.0;
        for (int d = 0; d < grid->dimension(); ++d)
            rhs -= inner_product(v[d], gf[d]);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));

        // laplacian == divergence(gradient(.))
        auto lap1 = laplacian(u);
        auto lap2 = divergence(gradient(u));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            num += (lap1[i] - lap2[i]) * (lap1[i] - lap2[i]);
            den += lap1[i] * lap1[i];
        }
        CHECK(std::sqrt(num) < 1e-10 * std::sqrt(den));

        // Parseval
        CHECK(coefficient_norm_sq(u) ==
              Catch::Approx(lp_norm(u, 2) * lp_norm(u, 2)).epsilon(1e-10));
    }
}

TEST_CASE("second derivatives: Hessian trace equals Laplacian", "[grid]") {
    for (auto grid : {neumann2(), GridPtr(Grid::make({1.0, 1.0}, {32, 32},
                                                     Boundary::periodic))}) {
        auto u = testing::random_band_limited(grid, 4, 3);
        auto lap = laplacian(u);
        ScalarField trace(grid);
        for (int d = 0; d < 2; ++d) {
            auto dd = second_derivative(u, d, d);
            for (std::size_t i = 0; i < trace.size(); ++i) trace[i] += dd[i];
        }
        for (std::size_t i = 0; i < trace.size(); ++i)
            CHECK(trace[i] == Catch::Approx(lap[i]).margin(1e-8));

        // mixed derivative of an explicit product mode
        const bool periodic = grid->boundary() == Boundary::periodic;
        auto f = ScalarField::sample(grid, [&](const std::vector<double>& x) {
            return periodic ? std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1])
                            : std::cos(kPi * x[0]) * std::cos(2 * kPi * x[1]);
        });
        auto dxy = second_derivative(f, 0, 1);
        auto exact = ScalarField::sample(grid, [&](const std::vector<double>& x) {
            return periodic
                       ? 4 * kPi * kPi * std::cos(2 * kPi * x[0]) *
                             std::cos(2 * kPi * x[1])
                       : 2 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(2 * kPi * x[1]);
        });
        for (std::size_t i = 0; i < dxy.size(); ++i)
            CHECK(dxy[i] == Catch::Approx(exact[i]).margin(1e-9));
    }
}

TEST_CASE("norms and means", "[grid]") {
    auto gn = neumann2();
    ScalarField ones(gn, 1.0);
    CHECK(lp_norm(ones, 2.0) == Catch::Approx(1.0)); // sqrt(V), V = 1

    auto gp = periodic1();
    auto cosx = ScalarField::sample(gp, [](const std::vector<double>& x) {
        return std::cos(2 * kPi * x[0]);
    });
    CHECK(lp_norm(cosx, std::numeric_limits<double>::infinity()) ==
          Catch::Approx(1.0));
    // int_0^1 cos^4(2 pi x) = 3/8
    CHECK(lp_norm(cosx, 4.0) == Catch::Approx(std::pow(3.0 / 8.0, 0.25)).epsilon(1e-12));

    CHECK(mean_value(ScalarField(gn, -2.75)) == Catch::Approx(-2.75));
    CHECK(std::abs(mean_value(cosx)) < 1e-14);
    auto shifted = cosx;
    for (auto& v : shifted.values()) v += 1.25;
    CHECK(mean_value(shifted) == Catch::Approx(mean_value(cosx) + 1.25));
}

TEST_CASE("energy functional", "[grid]") {
    auto g2 = Grid::make({1.0, 1.0}, {32, 32}, Boundary::periodic);
    auto spec = NonlinearitySpec::power(1.0); // g identity, phi = |xi|^2/2

    ScalarField c(g2, 4.0);
    CHECK(energy(c, NonlinearitySpec::power(3.0)) == Catch::Approx(0.0).margin(1e-14));

    const double A = 0.8;
    auto u = ScalarField::sample(g2, [&](const std::vector<double>& x) {
        return A * std::cos(2 * kPi * x[0]);
    });
    const double k2 = std::pow(2 * kPi, 2);
    const double expected = 0.5 * A * A * k2 * k2 * 0.5 - 0.5 * A * A * k2 * 0.5;
    CHECK(energy(u, spec) == Catch::Approx(expected).epsilon(1e-12));
    const double expected_lyap = 0.5 * A * A * k2 * k2 * 0.5 + 0.5 * A * A * k2 * 0.5;
    CHECK(lyapunov_energy(u, spec) == Catch::Approx(expected_lyap).epsilon(1e-12));

    // non-conservative spec refuses
    ThetaCutoff theta;
    auto h = truncate_to_h(spec, gradient(u), theta);
    CHECK_THROWS_AS(energy(u, h), std::logic_error);
}

TEST_CASE("grid validation", "[grid]") {
    CHECK_THROWS_AS(Grid::make({1.0}, {4}, Boundary::periodic), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make({-1.0}, {32}, Boundary::periodic), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make({1.0, 1.0}, {32}, Boundary::periodic),
                    std::invalid_argument);
}
