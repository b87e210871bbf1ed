#include "rbspec/lineshape.hpp"
#include "rbspec/errors.hpp"

#include <cmath>
#include <limits>

namespace rbspec {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kSqrtPi = 1.7724538509055160;

// Trapezoidal-sum evaluation of w(z) for Re z >= 0, Im z >= 0
// (Chiarella-Reichel form). The sampling comb is offset between two
// interleaved grids so that the evaluation point never sits closer than h/4
// to an active node; this keeps both the series terms and the pole-correction
// denominators 1 +- q well conditioned everywhere in the quadrant.
std::complex<double> faddeeva_quadrant(std::complex<double> z) {
    constexpr double h = 0.55; // grid pitch: error ~ exp(-(pi/h)^2) ~ 6e-15
    constexpr int n_terms = 14;

    const double x = z.real();
    const std::complex<double> z2 = z * z;
    const std::complex<double> two_z = 2.0 * z;

    // Choose the grid whose nodes are farther from x.
    const double r = 2.0 * x / h;
    const bool midpoint_grid = std::abs(r - 2.0 * std::round(r / 2.0)) <= 0.5;

    std::complex<double> s;
    if (midpoint_grid) {
        s = 0.0;
        for (int n = 0; n < n_terms; ++n) {
            const double t = (n + 0.5) * h;
            s += std::exp(-t * t) * two_z / (z2 - t * t);
        }
    } else {
        s = 1.0 / z;
        for (int n = 1; n <= n_terms; ++n) {
            const double t = n * h;
            s += std::exp(-t * t) * two_z / (z2 - t * t);
        }
    }
    std::complex<double> w = std::complex<double>(0.0, h / M_PI) * s;

    // Residue correction for poles of the comb below Im z = pi/h.
    if (z.imag() < M_PI / h) {
        const std::complex<double> q =
            std::exp(std::complex<double>(0.0, 2.0 * M_PI / h) * z);
        if (midpoint_grid)
            w += 2.0 * std::exp(-z2) * q / (1.0 + q);
        else
            w -= 2.0 * std::exp(-z2) * q / (1.0 - q);
    }
    return w;
}

} // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
    if (z.imag() >= 0.0) {
        if (z.real() >= 0.0) return faddeeva_quadrant(z);
        // w(-conj(z)) = conj(w(z))
        return std::conj(faddeeva_quadrant(-std::conj(z)));
    }
    // Lower half plane: w(z) = 2 exp(-z^2) - conj(w(conj(z))).
    std::complex<double> upper = faddeeva_w(std::conj(z));
    return 2.0 * std::exp(-z * z) - std::conj(upper);
}

double voigt(double delta, const VoigtParams& p) {
    const double sigma = p.sigma_gauss;
    const double gamma = p.gamma_lorentz;
    if (sigma < 0.0 || gamma < 0.0)
        throw NumericError("voigt: negative width");
    if (sigma == 0.0 && gamma == 0.0)
        throw NumericError("voigt: degenerate profile (both widths zero)");

    if (sigma == 0.0)
        return (gamma / M_PI) / (delta * delta + gamma * gamma);

    const double inv = 1.0 / (sigma * kSqrt2);
    if (gamma * inv < 1e-8) // pure-Gaussian shortcut
        return std::exp(-0.5 * (delta / sigma) * (delta / sigma)) /
               (sigma * kSqrt2Pi);

    const std::complex<double> zval(delta * inv, gamma * inv);
    return faddeeva_w(zval).real() / (sigma * kSqrt2Pi);
}

VoigtDerivatives voigt_derivatives(double delta, const VoigtParams& p) {
    const double sigma = p.sigma_gauss;
    const double gamma = p.gamma_lorentz;
    if (!(sigma > 0.0))
        throw NumericError("voigt_derivatives: requires sigma_gauss > 0");
    if (gamma < 0.0)
        throw NumericError("voigt_derivatives: negative Lorentzian width");

    const double inv = 1.0 / (sigma * kSqrt2);
    const std::complex<double> zval(delta * inv, gamma * inv);
    const std::complex<double> w = faddeeva_w(zval);
    const std::complex<double> wprime =
        -2.0 * zval * w + std::complex<double>(0.0, 2.0 / kSqrtPi);

    VoigtDerivatives d;
    const double denom = 2.0 * kSqrtPi * sigma * sigma;
    d.value = w.real() / (sigma * kSqrt2Pi);
    d.d_delta = wprime.real() / denom;
    d.d_gamma = -wprime.imag() / denom;
    return d;
}

double voigt_fwhm(const VoigtParams& p) {
    const double peak = voigt(0.0, p);
    const double half = 0.5 * peak;

    // Bracket the half-height crossing, then bisect. The profile decays
    // monotonically away from center.
    double lo = 0.0;
    double hi = p.gamma_lorentz + p.sigma_gauss + 1.0;
    while (voigt(hi, p) > half) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12)
            throw NumericError("voigt_fwhm: failed to bracket half height");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (voigt(mid, p) > half)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-13 * hi) break;
    }
    return lo + hi; // 2 * half width
}

double doppler_fwhm(double T, double mass, double lambda) {
    if (!(T > 0.0) || !(mass > 0.0) || !(lambda > 0.0))
        throw NumericError("doppler_fwhm: T, mass and wavelength must be positive");
    constexpr double kB = 1.380649e-23; // exact SI value [J/K]
    const double ln2 = std::log(2.0);
    return std::sqrt(8.0 * ln2 * kB * T / mass) / lambda * 1e-6; // Hz -> MHz
}

} // namespace rbspec
