#include <doctest.h>

#include "rbspec/errors.hpp"
#include "rbspec/lineshape.hpp"
#include "rbspec/quadrature.hpp"

#include "oracle.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace rbspec;

namespace {

void check_w(std::complex<double> z, double re, double im) {
    CAPTURE(z.real());
    CAPTURE(z.imag());
    const std::complex<double> expected(re, im);
    const std::complex<double> got = faddeeva_w(z);
    CHECK(std::abs(got - expected) <= 5e-13 * std::abs(expected));
}

// Integral of the Voigt profile over [-X, X] plus the analytic Lorentzian
// tail gamma/pi * (1/X + (3 sigma^2 - gamma^2) / (3 X^3)) per side.
double area_with_tail(double sigma, double gamma, double halfwidth) {
    VoigtParams p{sigma, gamma};
    QuadratureOptions opts;
    opts.rel_tol = 1e-9;
    const double quad = adaptive_simpson(
        [&](double x) { return voigt(x, p); }, -halfwidth, halfwidth,
        {-sigma - gamma, 0.0, sigma + gamma}, opts);
    const double tail =
        gamma / M_PI *
        (1.0 / halfwidth +
         (3.0 * sigma * sigma - gamma * gamma) /
             (3.0 * halfwidth * halfwidth * halfwidth));
    return quad + 2.0 * tail;
}

} // namespace

TEST_CASE("faddeeva_w reproduces reference values") {
    check_w({0.0, 0.0}, 1.0, 0.0);
    check_w({1.0, 0.0}, 0.36787944117144233, 0.6071577058413937);
    check_w({0.0, 1.0}, 0.427583576155807, 0.0);
    check_w({2.0, 3.0}, 0.13075746966984864, 0.08111265047745671);
    check_w({-2.0, 3.0}, 0.13075746966984864, -0.08111265047745671);
    // lower half plane via the reflection formula
    check_w({0.5, -0.3}, 1.013316572015352, 0.8067757668882944);
    check_w({5.0, 5.0}, 0.05696543988817737, 0.05583874277539143);
    // far along the real axis (asymptotic regime)
    check_w({300.0, 1.0}, 6.268807976854616e-06, 0.001880621496913708);
    check_w({1e4, 1e-4}, 5.641895920106e-13, 5.641895863687042e-05);
    // near-node arguments for both summation grids
    check_w({0.275, 0.0}, 0.9271638278117531, 0.2951229543024074);
    check_w({6.05, 1e-6}, 1.609351037500724e-08, 0.09458451878871964);
}

TEST_CASE("voigt reproduces reference values") {
    CHECK(voigt(0.0, {1.0, 1.0}) ==
          doctest::Approx(0.20870928052036772).epsilon(1e-11));
    CHECK(voigt(0.0, {100.0, 10.0}) ==
          doctest::Approx(0.003690046824797881).epsilon(1e-11));
    CHECK(voigt(50.0, {100.0, 10.0}) ==
          doctest::Approx(0.0032882414666869464).epsilon(1e-11));
    CHECK(voigt(200.0, {100.0, 10.0}) ==
          doctest::Approx(0.0006213010676820521).epsilon(1e-11));
    CHECK(voigt(0.0, {10.0, 0.005}) ==
          doctest::Approx(0.03987831753128659).epsilon(1e-11));
    CHECK(voigt(3.0, {0.5, 8.0}) ==
          doctest::Approx(0.03482245296066868).epsilon(1e-11));
}

TEST_CASE("voigt is even and decreasing away from center") {
    const VoigtParams p{3.7, 1.2};
    for (double d : {0.5, 2.0, 7.7, 31.0, 250.0})
        CHECK(voigt(d, p) == voigt(-d, p));
    double prev = voigt(0.0, p);
    for (double d = 0.5; d < 50.0; d += 0.5) {
        const double v = voigt(d, p);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("voigt has unit area") {
    // Lorentzian wings die off as 1/x^2, so the finite window of +-40
    // combined widths is completed with the analytic tail.
    struct Case { double sigma, gamma; };
    for (const auto& c : std::vector<Case>{{1, 1}, {100, 10}, {0.5, 8},
                                           {10, 0.005}}) {
        CAPTURE(c.sigma);
        CAPTURE(c.gamma);
        const double X = 40.0 * (c.sigma + c.gamma);
        CHECK(area_with_tail(c.sigma, c.gamma, X) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
    // pure Gaussian: the window alone carries everything
    VoigtParams g{5.0, 0.0};
    QuadratureOptions opts;
    opts.rel_tol = 1e-9;
    const double area = adaptive_simpson(
        [&](double x) { return voigt(x, g); }, -200.0, 200.0, {0.0}, opts);
    CHECK(area == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("voigt reduces to its gaussian and lorentzian limits") {
    // gamma = 0: exact Gaussian
    for (double d : {0.0, 1.0, 3.3}) {
        const double sigma = 2.0;
        const double gauss = std::exp(-d * d / (2.0 * sigma * sigma)) /
                             (sigma * std::sqrt(2.0 * M_PI));
        CHECK(voigt(d, {sigma, 0.0}) == doctest::Approx(gauss).epsilon(1e-12));
    }
    // sigma = 0: exact Lorentzian
    for (double d : {0.0, 0.7, 5.0}) {
        const double gamma = 1.5;
        const double lorentz = gamma / M_PI / (d * d + gamma * gamma);
        CHECK(voigt(d, {0.0, gamma}) ==
              doctest::Approx(lorentz).epsilon(1e-12));
    }
    // vanishing gamma converges to the Gaussian within 1e-6
    for (double d : {0.0, 1.0, 4.0}) {
        const double sigma = 2.0;
        const double gauss = std::exp(-d * d / (2.0 * sigma * sigma)) /
                             (sigma * std::sqrt(2.0 * M_PI));
        CHECK(voigt(d, {sigma, 1e-10}) ==
              doctest::Approx(gauss).epsilon(1e-6));
    }
    CHECK_THROWS_AS(voigt(0.0, {0.0, 0.0}), NumericError);
}

TEST_CASE("voigt matches the convolution oracle") {
    // documented spot checks
    for (double d : {0.0, 50.0, 200.0}) {
        CAPTURE(d);
        CHECK(voigt(d, {100.0, 10.0}) ==
              doctest::Approx(oracle::voigt_convolution(d, 100.0, 10.0))
                  .epsilon(1e-4));
    }
    // seeded random parameter triples
    std::mt19937 gen(12345);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double sigma = 0.5 * std::pow(600.0, u(gen));
        const double gamma = 0.02 * std::pow(5000.0, u(gen));
        const double delta = u(gen) * 4.0 * (sigma + gamma);
        CAPTURE(sigma);
        CAPTURE(gamma);
        CAPTURE(delta);
        CHECK(voigt(delta, {sigma, gamma}) ==
              doctest::Approx(oracle::voigt_convolution(delta, sigma, gamma))
                  .epsilon(1e-4));
    }
}

TEST_CASE("voigt derivatives agree with central differences") {
    struct Case { double delta, sigma, gamma; };
    for (const auto& c : std::vector<Case>{
             {37.3, 55.0, 7.0}, {-120.0, 80.0, 30.0}, {5.0, 3.0, 0.4},
             {0.0, 10.0, 1.0}}) {
        CAPTURE(c.delta);
        CAPTURE(c.sigma);
        CAPTURE(c.gamma);
        const VoigtParams p{c.sigma, c.gamma};
        const VoigtDerivatives d = voigt_derivatives(c.delta, p);
        CHECK(d.value == doctest::Approx(voigt(c.delta, p)).epsilon(1e-13));

        const double hd = 1e-4 * (c.sigma + c.gamma);
        const double fd_delta =
            (voigt(c.delta + hd, p) - voigt(c.delta - hd, p)) / (2.0 * hd);
        CHECK(d.d_delta == doctest::Approx(fd_delta).epsilon(1e-5).scale(
                               std::abs(d.value)));

        const double hg = 1e-5 * (c.sigma + c.gamma);
        const double fd_gamma = (voigt(c.delta, {c.sigma, c.gamma + hg}) -
                                 voigt(c.delta, {c.sigma, c.gamma - hg})) /
                                (2.0 * hg);
        CHECK(d.d_gamma == doctest::Approx(fd_gamma).epsilon(1e-5).scale(
                               std::abs(d.value)));
    }
}

TEST_CASE("voigt_fwhm reproduces reference widths and limits") {
    CHECK(voigt_fwhm({1.0, 1.0}) ==
          doctest::Approx(3.6011356772030214).epsilon(1e-9));
    CHECK(voigt_fwhm({100.0, 10.0}) ==
          doctest::Approx(246.32463668144422).epsilon(1e-9));
    CHECK(voigt_fwhm({0.5, 8.0}) ==
          doctest::Approx(16.09311974625445).epsilon(1e-9));
    CHECK(voigt_fwhm({10.0, 0.005}) ==
          doctest::Approx(23.553526402439477).epsilon(1e-9));
    // pure limits
    CHECK(voigt_fwhm({3.0, 0.0}) ==
          doctest::Approx(3.0 * 2.3548200450309493).epsilon(1e-10));
    CHECK(voigt_fwhm({0.0, 4.0}) == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("voigt_fwhm stays within 0.03% of the closed-form estimate") {
    // f_V ~ 0.5346 f_L + sqrt(0.2166 f_L^2 + f_G^2)
    std::mt19937 gen(777);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double sigma = 0.5 * std::pow(200.0, u(gen));
        const double gamma = 0.05 * std::pow(1000.0, u(gen));
        CAPTURE(sigma);
        CAPTURE(gamma);
        const double fl = 2.0 * gamma;
        const double fg = 2.3548200450309493 * sigma;
        const double estimate =
            0.5346 * fl + std::sqrt(0.2166 * fl * fl + fg * fg);
        CHECK(voigt_fwhm({sigma, gamma}) ==
              doctest::Approx(estimate).epsilon(3e-4));
    }
}

TEST_CASE("doppler_fwhm value and scaling laws") {
    const double m87 = 86.909180527 * 1.66053906660e-27; // [kg]
    const double lam87 = 780.241209686e-9;               // [m]
    CHECK(doppler_fwhm(453.15, m87, lam87) ==
          doctest::Approx(628.396990954747).epsilon(1e-10));
    // sqrt in T: quadrupling the temperature doubles the width
    CHECK(doppler_fwhm(4.0 * 453.15, m87, lam87) ==
          doctest::Approx(2.0 * doppler_fwhm(453.15, m87, lam87))
              .epsilon(1e-12));
    // 1/sqrt in mass
    CHECK(doppler_fwhm(453.15, 4.0 * m87, lam87) ==
          doctest::Approx(0.5 * doppler_fwhm(453.15, m87, lam87))
              .epsilon(1e-12));
    // 1/lambda
    CHECK(doppler_fwhm(453.15, m87, 0.5 * lam87) ==
          doctest::Approx(2.0 * doppler_fwhm(453.15, m87, lam87))
              .epsilon(1e-12));
}

TEST_CASE("fwhm_to_sigma inverts the gaussian width relation") {
    CHECK(fwhm_to_sigma(2.3548200450309493) == doctest::Approx(1.0));
    CHECK(fwhm_to_sigma(628.397) * 2.3548200450309493 ==
          doctest::Approx(628.397));
}
