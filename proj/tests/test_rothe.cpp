#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfilm/rothe.hpp"
#include "test_helpers.hpp"

using namespace thinfilm;

namespace {
GridPtr box2(int n = 32, double L = 2 * kPi) {
    return Grid::make({L, L}, {n, n}, Boundary::neumann_box);
}
} // namespace

TEST_CASE("alpha regime classification", "[rothe]") {
    CHECK(alpha_classify(3, 1.0) == AlphaRegime::global);
    CHECK(alpha_classify(3, 19.0 / 9.0) == AlphaRegime::local); // boundary of (1.9)
    CHECK(alpha_classify(3, 2.5) == AlphaRegime::unsupported);
    CHECK(alpha_classify(2, 2.9) == AlphaRegime::local);
    CHECK(alpha_classify(2, 3.0) == AlphaRegime::unsupported);
    CHECK(alpha_classify(1, 0.5) == AlphaRegime::global);
    CHECK(alpha_classify(1, 1.5) == AlphaRegime::unsupported);
}

TEST_CASE("single step zero-mode algebra", "[rothe]") {
    auto g = box2(32, 1.0);
    const double tau = 0.05, C = 3.0;
    RotheConfig cfg;
    auto step = rothe_step(ScalarField(g, C), NonlinearitySpec::zero(), tau, cfg);
    for (std::size_t i = 0; i < step.u.size(); ++i) {
        CHECK(step.u[i] == Catch::Approx(C / (1 + tau * tau * tau)).epsilon(1e-13));
        CHECK(step.psi[i] ==
              Catch::Approx(tau * C / (1 + tau * tau * tau)).epsilon(1e-12));
    }
}

TEST_CASE("single step diagonalization on a mode", "[rothe]") {
    auto g = box2(32, 1.0);
    const double tau = 0.01;
    auto v = ScalarField::sample(g, [](const std::vector<double>& x) {
        return std::cos(kPi * 2.0 * x[0]) * std::cos(kPi * x[1]);
    });
    const double lam = std::pow(2.0 * kPi, 2) + kPi * kPi;
    const double factor = (1.0 / tau) / (std::pow(lam + tau, 2) + 1.0 / tau);
    RotheConfig cfg;
    auto step = rothe_step(v, NonlinearitySpec::zero(), tau, cfg);
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(step.u[i] == Catch::Approx(factor * v[i]).margin(1e-12));
}

TEST_CASE("elimination identity psi = (-Lap + tau) u", "[rothe]") {
    auto g = box2();
    RotheConfig cfg;
    const double tau = 0.02;
    auto u0 = testing::random_band_limited(g, 3, 9);
    auto step = rothe_step(u0, NonlinearitySpec::cubic(1.0), tau, cfg);
    auto recon = laplacian(step.u);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < recon.size(); ++i) {
        const double r = step.psi[i] - (-recon[i] + tau * step.u[i]);
        num += r * r;
        den += step.psi[i] * step.psi[i];
    }
    CHECK(std::sqrt(num / den) < 1e-10);
}

TEST_CASE("discrete mass law holds to roundoff", "[rothe]") {
    auto g = box2();
    auto u0 = testing::random_band_limited(g, 3, 21);
    for (auto& v : u0.values()) v = 0.4 * v + 0.5; // nonzero mean
    RotheConfig cfg;
    cfg.horizon = 0.1;
    cfg.steps = 32;
    cfg.alpha = 3.0;
    auto traj = run_ibvp(u0, NonlinearitySpec::cubic(1.0), cfg);
    REQUIRE(traj.complete());
    const double tau = traj.tau();
    for (int k = 1; k <= 32; ++k) {
        const double mk = integral(traj.knot(k));
        const double mp = integral(traj.knot(k - 1));
        CHECK(mk * (1.0 + tau * tau * tau) == Catch::Approx(mp).epsilon(1e-12));
    }
}

TEST_CASE("constant initial data stays constant", "[rothe]") {
    auto g = box2(32, 1.0);
    const double C = 1.7;
    RotheConfig cfg;
    cfg.horizon = 0.4;
    cfg.steps = 16;
    cfg.alpha = 3.0;
    auto traj = run_ibvp(ScalarField(g, C), NonlinearitySpec::cubic(2.0), cfg);
    REQUIRE(traj.complete());
    const double tau = traj.tau();
    for (int k = 1; k <= 16; ++k) {
        const double expected = C / std::pow(1.0 + tau * tau * tau, k);
        for (std::size_t i = 0; i < traj.knot(k).size(); ++i)
            CHECK(traj.knot(k)[i] == Catch::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("interpolants agree at knots", "[rothe]") {
    auto g = box2();
    auto u0 = testing::random_band_limited(g, 2, 5);
    RotheConfig cfg;
    cfg.horizon = 0.2;
    cfg.steps = 8;
    auto traj = run_ibvp(u0, NonlinearitySpec::zero(), cfg);
    REQUIRE(traj.complete());
    for (int k = 0; k <= 8; ++k) {
        const double t = k * traj.tau();
        auto lin = traj.piecewise_linear(t);
        const auto& pc = traj.piecewise_constant(t);
        for (std::size_t i = 0; i < lin.size(); ++i) {
            CHECK(lin[i] == Catch::Approx(traj.knot(k)[i]).margin(1e-12));
            CHECK(pc[i] == traj.knot(k)[i]);
        }
    }
}

TEST_CASE("linear runs converge to the exact semigroup at first order", "[rothe]") {
    auto g = Grid::make({kPi}, {32}, Boundary::neumann_box);
    auto u0 = ScalarField::sample(
        g, [](const std::vector<double>& x) { return std::cos(x[0]); });
    const double lam = 1.0, T = 0.5;
    auto exact = u0;
    for (auto& v : exact.values()) v *= std::exp(-lam * lam * T);

    std::vector<double> errs;
    for (int j : {16, 32, 64, 128}) {
        RotheConfig cfg;
        cfg.horizon = T;
        cfg.steps = j;
        auto traj = run_ibvp(u0, NonlinearitySpec::zero(), cfg);
        REQUIRE(traj.complete());
        double e2 = 0.0;
        for (std::size_t i = 0; i < u0.size(); ++i) {
            const double d = traj.knot(j)[i] - exact[i];
            e2 += d * d;
        }
        errs.push_back(std::sqrt(e2 * g->cell_volume()));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        CHECK(order > 0.8);
        CHECK(order < 1.2);
    }
}

TEST_CASE("conservative energy decreases along a small run", "[rothe]") {
    auto g = box2(32, 2 * kPi);
    auto u0 = testing::random_band_limited(g, 2, 33);
    for (auto& v : u0.values()) v = 0.4 * v + 0.3;
    auto spec = NonlinearitySpec::cubic(1.0);
    RotheConfig cfg;
    cfg.horizon = 0.5;
    cfg.steps = 128;
    cfg.alpha = 3.0;
    auto traj = run_ibvp(u0, spec, cfg);
    REQUIRE(traj.complete());
    auto rep = estimate_report(traj, 3.0, &spec);
    REQUIRE(rep.energy_series.size() == 129);
    int increases = 0;
    for (std::size_t k = 1; k < rep.energy_series.size(); ++k)
        if (rep.energy_series[k] >
            rep.energy_series[k - 1] + 1e-6 * std::abs(rep.energy_series[k - 1]))
            ++increases;
    CHECK(increases == 0);
}

TEST_CASE("estimate report of the zero solution vanishes", "[rothe]") {
    auto g = box2();
    RotheConfig cfg;
    cfg.horizon = 0.1;
    cfg.steps = 4;
    auto traj = run_ibvp(ScalarField(g, 0.0), NonlinearitySpec::zero(), cfg);
    auto rep = estimate_report(traj, 1.0);
    CHECK(rep.sup_h1 == 0.0);
    CHECK(rep.tau_sup_u2 == 0.0);
    CHECK(rep.int_psi_h1 == 0.0);
    CHECK(rep.tau_int_psi2 == 0.0);
    CHECK(rep.int_grad_2alpha == 0.0);
    CHECK(rep.all_finite());
}

TEST_CASE("gronwall horizon formula and sigma selection", "[rothe]") {
    // direct substitution: v0 = 1, sigma = 1, c1 = c2 = 1 -> ln 2
    CHECK(gronwall_horizon_formula(1.0, 1.0, 1.0, 1.0) ==
          Catch::Approx(std::log(2.0)).epsilon(1e-14));

    // (N=3, alpha=19/9): a2 = 2, b2 = 5/3, 1 + sigma = 23/3 at k = 2
    auto info = gronwall_sigma(3, 19.0 / 9.0);
    CHECK(info.k_used == 2);
    CHECK(info.sigma == Catch::Approx(20.0 / 3.0).epsilon(1e-12));

    // planar alpha = 2.5: sigma from the x-window edge (x^2 + x = alpha - 1)
    auto planar = gronwall_sigma(2, 2.5);
    CHECK(planar.k_used == 2);
    const double xmin = 0.5 * (std::sqrt(7.0) - 1.0);
    const double sig = (4.0 - xmin) / (1.0 - xmin) - 1.0;
    CHECK(planar.sigma == Catch::Approx(sig).epsilon(1e-3));

    // planar alpha < 2 admits k = 1 with sigma = 2(alpha - 1)
    auto planar1 = gronwall_sigma(2, 1.5);
    CHECK(planar1.k_used == 1);
    CHECK(planar1.sigma == Catch::Approx(1.0).epsilon(1e-6));

    // horizon decreases monotonically in v0
    auto g = box2();
    auto u0a = testing::random_band_limited(g, 2, 3);
    for (auto& v : u0a.values()) v *= 0.1;
    auto u0b = u0a;
    for (auto& v : u0b.values()) v *= 3.0;
    CHECK(gronwall_horizon(u0a, 2.5, 2) > gronwall_horizon(u0b, 2.5, 2));

    CHECK_THROWS_AS(gronwall_sigma(3, 2.6), std::invalid_argument);
}

TEST_CASE("failure paths", "[rothe]") {
    auto g = box2(32, 1.0);
    auto u0 = testing::random_band_limited(g, 4, 8);
    for (auto& v : u0.values()) v *= 40.0; // violent data

    // unsupported regime refused without the override (non-conservative spec)
    ThetaCutoff theta;
    auto trunc = truncate_to_h(NonlinearitySpec::power(2.5), gradient(u0), theta);
    RotheConfig cfg;
    cfg.horizon = 1.0;
    cfg.steps = 2;
    cfg.alpha = 3.5;
    CHECK_THROWS_AS(run_ibvp(u0, trunc, cfg), std::invalid_argument);
    cfg.allow_unsupported = true;
    CHECK_NOTHROW(run_ibvp(u0, trunc, cfg));

    // non-finite data rejected at construction
    auto bad = u0;
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(run_ibvp(bad, NonlinearitySpec::zero(), cfg),
                    std::invalid_argument);

    // very large tau with strong nonlinearity: inner iteration fails and the
    // error carries the residual
    RotheConfig hard;
    hard.horizon = 400.0;
    hard.steps = 1;
    hard.inner_max_iterations = 12;
    hard.alpha = 3.0;
    auto traj = run_ibvp(u0, NonlinearitySpec::cubic(5.0), hard);
    CHECK_FALSE(traj.complete());
    CHECK(traj.failure().has_value());
}
