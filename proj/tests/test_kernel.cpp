#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "thinfilm/kernel.hpp"

using namespace thinfilm;

namespace {
// 4th-order central differences, the independent oracle for derivative checks.
template <typename F>
double diff1(const F& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
template <typename F>
double diff2(const F& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
           (12 * h * h);
}
} // namespace

TEST_CASE("profile value at the origin", "[kernel]") {
    // closed form 2^{(2-N)/2} Gamma(N/4) / (4 Gamma(N/2))
    auto closed = [](int N) {
        return std::pow(2.0, 0.5 * (2 - N)) * std::tgamma(0.25 * N) /
               (4.0 * std::tgamma(0.5 * N));
    };
    CHECK(closed(2) == Catch::Approx(std::sqrt(kPi) / 4.0).epsilon(1e-14));
    CHECK(closed(1) ==
          Catch::Approx(std::sqrt(2.0) * std::tgamma(0.25) / (4.0 * std::sqrt(kPi)))
              .epsilon(1e-14));
    for (int N : {1, 2, 3, 4}) {
        CHECK(eval_f(N, 0.0) == Catch::Approx(closed(N)).epsilon(1e-11));
        // oracle: quadrature at eta = 1e-6 approaches the closed form
        CHECK(eval_f(N, 1e-6) == Catch::Approx(closed(N)).epsilon(1e-9));
    }
    CHECK(eval_f(4, 0.0) == Catch::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("profile reference values, N=2", "[kernel]") {
    // frozen from an independent adaptive quadrature (scipy) of Eq. form
    struct Ref {
        double eta, value;
    };
    const Ref refs[] = {
        {0.5, 0.4277031400716991},  {1.0, 0.3839689999803899},
        {2.0, 0.24210199494410015}, {4.0, 0.00274827090164885},
        {6.0, -0.016074993460677717}, {8.0, 0.002896308281197614},
        {10.0, 8.92256301557046e-05},
    };
    for (const auto& r : refs) {
        CAPTURE(r.eta);
        CHECK(eval_f(2, r.eta) == Catch::Approx(r.value).margin(1e-10));
    }
}

TEST_CASE("derivative recursion against numeric differences", "[kernel]") {
    auto f1 = [](double e) { return eval_f(1, e); };
    auto f2 = [](double e) { return eval_f(2, e); };

    // first derivative vanishes at eta = 0 for every N
    for (int N : {1, 2, 3}) CHECK(eval_f_deriv(N, 0.0, 1) == 0.0);

    // (F3): f_1'(1) = -eval_f(3, 1)
    CHECK(eval_f_deriv(1, 1.0, 1) == Catch::Approx(-eval_f(3, 1.0)).epsilon(1e-12));

    // numeric first derivative (independent route)
    for (double eta : {0.4, 1.3, 2.6}) {
        CHECK(eval_f_deriv(1, eta, 1) ==
              Catch::Approx(diff1(f1, eta, 1e-3)).margin(1e-9));
    }
    // spec probe: (N=2, eta=0.7, order=2) within 1e-5 of central differences
    CHECK(eval_f_deriv(2, 0.7, 2) ==
          Catch::Approx(diff2(f2, 0.7, 1e-3)).margin(1e-5));

    // third derivative vs numeric difference of the analytic second derivative
    auto f2d2 = [](double e) { return eval_f_deriv(2, e, 2); };
    CHECK(eval_f_deriv(2, 1.1, 3) ==
          Catch::Approx(diff1(f2d2, 1.1, 1e-3)).margin(1e-8));
}

TEST_CASE("ODE residual (F1)", "[kernel]") {
    CHECK(std::abs(ode_residual(2, 1.0)) < 1e-6);
    const double f35 = eval_f(3, 5.0);
    CHECK(std::abs(ode_residual(3, 5.0)) < 1e-6 * (1.0 + std::abs(f35) * 5.0 / 4.0));
    // a constant shift eps maps to residual -eps*eta/4 (linearity of the operator)
    const double eps = 0.1, eta = 1.7;
    const double shifted = ode_residual(2, eta) - 0.25 * eta * eps;
    const double direct = eval_f_deriv(2, eta, 3) +
                          (1.0 / eta) * eval_f_deriv(2, eta, 2) -
                          (1.0 / (eta * eta)) * eval_f_deriv(2, eta, 1) -
                          0.25 * eta * (eval_f(2, eta) + eps);
    CHECK(shifted == Catch::Approx(direct).margin(1e-12));
}

TEST_CASE("normalization constant", "[kernel]") {
    // exact alpha_N = (2 pi)^{-N/2} from the Hankel transform of e^{-s^4};
    // completely independent of the quadrature route.
    for (int N : {1, 2, 3}) {
        const double exact = std::pow(2.0 * kPi, -0.5 * N);
        CHECK(alpha_normalization(N) == Catch::Approx(exact).epsilon(1e-8));
    }
    // spec probe: alpha_1 * 2 int_0^inf f_1 = 1 within 1e-8
    const double a1 = alpha_normalization(1);
    const double i1 = radial_moment(1, 0.0);
    CHECK(a1 * 2.0 * i1 == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("radial moments positive on the beta grid (F4)", "[kernel]") {
    for (int N : {1, 2, 3}) {
        for (double frac : {0.0, 0.25, 0.5, 0.75, 0.99}) {
            const double beta = frac * N;
            CAPTURE(N, beta);
            CHECK(radial_moment(N, beta) > 0.0);
        }
    }
    CHECK_THROWS_AS(radial_moment(2, 2.0), std::invalid_argument);
}

TEST_CASE("scaling mass obeys t^{N/4} law", "[kernel]") {
    // two independent radial quadratures in the untransformed variable
    const double m1 = lq_scaling_mass(1, 2, 2.0, 1.0);
    const double m16 = lq_scaling_mass(1, 2, 2.0, 16.0);
    CHECK(m16 / m1 == Catch::Approx(2.0).epsilon(1e-6)); // 16^{1/4} = 2
    const double q1 = lq_scaling_mass(2, 1, 3.0, 1.0);
    const double q4 = lq_scaling_mass(2, 1, 3.0, 4.0);
    CHECK(q4 / std::pow(4.0, 0.5) == Catch::Approx(q1).epsilon(1e-6));
}

TEST_CASE("kernel table interpolation and envelope", "[kernel]") {
    QuadratureSpec quad;
    auto table = KernelTable::build(2, 20.0, 256, quad);

    // endpoint inclusion and monotone grid
    CHECK(table.etas().front() == 0.0);
    CHECK(table.etas().back() == 20.0);
    CHECK(table.f().front() == Catch::Approx(eval_f(2, 0.0)).epsilon(1e-13));

    // mid-cell probes within 10x quadrature tolerance
    for (double eta : {0.111, 1.507, 5.003, 9.871, 14.39}) {
        CAPTURE(eta);
        CHECK(std::abs(table.interpolate(eta) - eval_f(2, eta)) <
              10.0 * quad.absolute_tolerance + 1e-12);
        CHECK(std::abs(table.interpolate(eta, 1) - eval_f_deriv(2, eta, 1)) < 1e-9);
    }

    // envelope dominates every sample; mu is positive and O(0.25)
    const auto& env = table.envelope();
    CHECK(env.mu > 0.1);
    CHECK(env.mu < 0.5);
    for (int i = 0; i < table.size(); ++i) {
        CHECK(std::abs(table.f()[i]) <=
              env.K * std::exp(-env.mu * std::pow(table.etas()[i], 4.0 / 3.0)) *
                  (1.0 + 1e-9));
    }

    // (F4): at least 3 sign changes on [0, 20]
    CHECK(table.sign_changes() >= 3);

    // serialization round-trip of the CSV header/row format
    auto dir = std::filesystem::temp_directory_path() / "tf_kernel_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "table.csv").string();
    table.save_csv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "eta,f,f1,f2");
    double e, f, d1, d2;
    char comma;
    in >> e >> comma >> f >> comma >> d1 >> comma >> d2;
    CHECK(e == 0.0);
    CHECK(f == Catch::Approx(table.f()[0]).epsilon(1e-15));
}

TEST_CASE("quadrature failure surfaces as diagnostic error", "[kernel]") {
    QuadratureSpec tight;
    tight.absolute_tolerance = 1e-15;
    tight.panel_budget = 3;
    CHECK_THROWS_AS(eval_f(2, 18.0, tight), QuadratureError);
    try {
        eval_f(2, 18.0, tight);
    } catch (const QuadratureError& e) {
        CHECK(e.residual() > 0.0);
    }
}
