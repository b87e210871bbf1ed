#pragma once

#include <Eigen/Core>

#include <complex>

namespace rbspec {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz), accurate to ~1e-13 relative
// over the closed upper half plane (lower half via the reflection formula,
// which can overflow for strongly negative Im z).
std::complex<double> faddeeva_w(std::complex<double> z);

// Width parameters of a Voigt profile.
struct VoigtParams {
    double sigma_gauss = 0.0;    // Gaussian std dev [MHz]
    double gamma_lorentz = 0.0;  // Lorentzian HWHM [MHz]
};

// Unit-area Voigt profile V(delta; sigma, gamma) [1/MHz]. Falls back to the
// pure Gaussian / Lorentzian when one width vanishes; throws NumericError
// when both do.
double voigt(double delta, const VoigtParams& p);

// Elementwise Voigt over a detuning grid.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1>
voigt(const Eigen::ArrayBase<Derived>& delta, const VoigtParams& p) {
    using Scalar = typename Derived::Scalar;
    Eigen::Array<Scalar, Eigen::Dynamic, 1> out(delta.size());
    for (Eigen::Index i = 0; i < delta.size(); ++i)
        out[i] = static_cast<Scalar>(
            voigt(static_cast<double>(delta.derived()(i)), p));
    return out;
}

// Voigt value plus partial derivatives with respect to detuning and the
// Lorentzian HWHM (both analytic, via w'(z) = -2 z w(z) + 2i/sqrt(pi)).
// Requires sigma_gauss > 0.
struct VoigtDerivatives {
    double value;    // [1/MHz]
    double d_delta;  // [1/MHz^2]
    double d_gamma;  // [1/MHz^2]
};
VoigtDerivatives voigt_derivatives(double delta, const VoigtParams& p);

// Full width at half maximum of the Voigt profile [MHz], by bisection on the
// half-height crossing.
double voigt_fwhm(const VoigtParams& p);

// Doppler FWHM [MHz] of an optical transition at wavelength lambda [m] for an
// absorber of mass m [kg] at temperature T [K].
double doppler_fwhm(double T, double mass, double lambda);

// Convert a Gaussian FWHM to the standard deviation.
inline double fwhm_to_sigma(double fwhm) { return fwhm / 2.3548200450309493; }

} // namespace rbspec
