#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinfilm/nonlinearity.hpp"
#include "thinfilm/spectral.hpp"
#include "test_helpers.hpp"

using namespace thinfilm;

TEST_CASE("catalog evaluation", "[nonlinearity]") {
    auto zero = NonlinearitySpec::zero();
    CHECK(zero.eval({3.0, -4.0}) == std::vector<double>{0.0, 0.0});

    auto p3 = NonlinearitySpec::power(3.0);
    auto v = p3.eval({1.0, 0.0});
    CHECK(v[0] == Catch::Approx(1.0));
    CHECK(v[1] == 0.0);

    auto cub = NonlinearitySpec::cubic(1.0);
    auto w = cub.eval({2.0, 0.0});
    CHECK(w[0] == Catch::Approx(10.0)); // (4+1)*2
    CHECK(w[1] == 0.0);
}

TEST_CASE("potentials", "[nonlinearity]") {
    auto p1 = NonlinearitySpec::power(1.0);
    CHECK(p1.potential({3.0, 4.0}) == Catch::Approx(12.5)); // |xi|^2/2

    auto cub2 = NonlinearitySpec::cubic(2.0);
    CHECK(cub2.potential({1.0, 0.0}) == Catch::Approx(1.0)); // 2/4 + 1/2

    CHECK(NonlinearitySpec::power(3.0).potential({0.0, 0.0}) == 0.0);
    CHECK(NonlinearitySpec::cubic(1.0).potential({0.0, 0.0}) == 0.0);
}

TEST_CASE("conservativity: finite-difference gradient of phi matches g",
          "[nonlinearity]") {
    Rng rng(99);
    const double h = 1e-5;
    for (auto spec : {NonlinearitySpec::cubic(0.7), NonlinearitySpec::power(2.3),
                      NonlinearitySpec::power(1.0)}) {
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> xi = {rng.uniform(-10.0, 10.0),
                                      rng.uniform(-10.0, 10.0)};
            // keep away from the power-law origin kink
            if (std::hypot(xi[0], xi[1]) < 0.3) continue;
            const auto g = spec.eval(xi);
            for (int d = 0; d < 2; ++d) {
                auto xp = xi, xm = xi;
                xp[d] += h;
                xm[d] -= h;
                const double fd =
                    (spec.potential(xp) - spec.potential(xm)) / (2.0 * h);
                const double scale = std::max(1.0, std::abs(g[d]));
                CHECK(std::abs(fd - g[d]) < 1e-6 * scale);
            }
        }
    }
}

TEST_CASE("theta cutoff shape", "[nonlinearity]") {
    ThetaCutoff theta;
    CHECK(theta(0.37) == 0.37);
    CHECK(theta(-0.99) == -0.99);
    CHECK(theta(1.0) == 1.0);
    CHECK(theta(2.0) == 0.0);
    CHECK(theta(3.5) == 0.0);
    CHECK(theta.sup() >= 1.0);
    CHECK(theta.sup() < 1.5);
    // odd and continuous through the taper
    CHECK(theta(1.5) == Catch::Approx(-theta(-1.5)));
    CHECK(std::abs(theta(1.0 + 1e-8) - 1.0) < 1e-6);
}

TEST_CASE("truncation h: identity region and boundedness", "[nonlinearity]") {
    auto grid = Grid::make({2.0, 2.0}, {32, 32}, Boundary::neumann_box);
    auto u0 = testing::random_band_limited(grid, 3, 5);
    for (auto& v : u0.values()) v *= 0.2;
    auto ref_grad = gradient(u0);

    auto base = NonlinearitySpec::cubic(1.0);
    ThetaCutoff theta;
    auto h = truncate_to_h(base, ref_grad, theta);

    // probes with inactive clamps agree with the base exactly
    Rng rng(31);
    int inactive = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> ref = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        std::vector<double> xi = {ref[0] + rng.uniform(-0.2, 0.2),
                                  ref[1] + rng.uniform(-0.2, 0.2)};
        const auto gb = base.eval(xi);
        const auto gr = base.eval(ref);
        bool clamp_inactive = true;
        for (int d = 0; d < 2; ++d)
            if (std::abs(gb[d] - gr[d]) > 1.0) clamp_inactive = false;
        if (!clamp_inactive) continue;
        ++inactive;
        const auto hv = h.eval_at(xi, ref);
        for (int d = 0; d < 2; ++d) CHECK(hv[d] == gb[d]); // exact, not approximate
    }
    CHECK(inactive > 50);

    // sup over random xi of |h| stays below the declared bound
    const double M = h.bound();
    CHECK(M > 0.0);
    double sup = 0.0;
    // worst case over the actual reference field: apply to random huge gradients
    auto wild = testing::random_band_limited(grid, 5, 77);
    for (auto& v : wild.values()) v *= 1e4;
    auto applied = h.apply(gradient(wild));
    sup = std::max(sup, lp_norm(applied, std::numeric_limits<double>::infinity()));
    CHECK(sup <= M * (1.0 + 1e-12));

    // g bounded already (zero form): h == g everywhere
    auto hz = truncate_to_h(NonlinearitySpec::zero(), ref_grad, theta);
    auto az = hz.apply(gradient(wild));
    CHECK(lp_norm(az, std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("growth envelope check", "[nonlinearity]") {
    auto p = NonlinearitySpec::power(2.0);
    auto rep = growth_check(p, 2000);
    CHECK(rep.ok);
    CHECK(rep.max_ratio <= 1.0);

    auto c = NonlinearitySpec::cubic(0.5); // declared (c+1, 3)
    auto repc = growth_check(c, 2000);
    CHECK(repc.ok);

    auto z = NonlinearitySpec::zero();
    CHECK(growth_check(z, 100).max_ratio == 0.0);
}
