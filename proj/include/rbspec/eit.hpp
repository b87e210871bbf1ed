#pragma once

#include "rbspec/scanmodel.hpp"
#include "rbspec/spectrum.hpp"

#include <Eigen/Core>

#include <complex>

namespace rbspec {

// Three-level ladder system driven by a weak locked probe (lower leg) and a
// scanned coupling field (upper leg). All rates are HWHM-type [MHz]; both
// beams run along the same axis, co-propagating unless flagged otherwise.
struct EITParams {
    double omega_c = 0.0;        // coupling Rabi frequency [MHz]
    double gamma_e = 0.0;        // intermediate-state decay [MHz]
    double gamma_r = 0.0;        // upper-state decay [MHz]
    double gamma_transit = 0.0;  // confinement/transit dephasing [MHz]
    double lambda_p = 0.0;       // probe wavelength [m]
    double lambda_c = 0.0;       // coupling wavelength [m]
    double probe_detuning = 0.0; // [MHz], probe locked
    double T = 0.0;              // vapor temperature [K]
    double mass = 0.0;           // absorber mass [kg]
    bool counter_propagating = false;

    void validate() const;
};

// Ladder parameters for the rubidium 5S-5P-5D scheme from a constants table:
// natural decay rates, the 780/776 nm wavelengths, and the isotope mass.
// omega_c, gamma_transit and T are left for the caller.
EITParams rb_ladder_params(const ConstantsTable& c);
EITParams rb_ladder_params();

// Transit-time dephasing rate [MHz]: mean thermal speed over the effective
// confinement scale 2*pi*d_eff, where d_eff = min(beam 1/e^2 diameter,
// smallest channel dimension).
double transit_rate(const BeamProfile& beam, const ChannelGeometry& channel,
                    double T, double mass);

// Steady-state weak-probe susceptibility of one velocity class v [m/s]
// (unnormalized; absorption is the imaginary part).
std::complex<double> ladder_susceptibility(double delta_p, double delta_c,
                                           const EITParams& p, double v);

// Maxwell-averaged probe absorption at one coupling detuning; rel_tol sets
// the velocity-integral tolerance.
double averaged_absorption(double delta_c, const EITParams& p,
                           double rel_tol = 1e-6);

// Doppler-averaged probe absorption versus coupling detuning, expressed as
// the relative transparency (A(off) - A(delta_c)) / A(off) with A(off) the
// coupling-free absorption. Optional Gaussian smoothing (FWHM in MHz)
// represents post-detection averaging; it requires a uniform grid.
SpectrumTrace coupling_scan(const Eigen::ArrayXd& delta_c_grid,
                            const EITParams& p, double smoothing_fwhm = 0.0);

// Full width at half maximum of a single-peaked trace, by linear
// interpolation of the half-height crossings. Throws DataError when the
// trace has no usable peak.
double trace_fwhm(const SpectrumTrace& trace);

} // namespace rbspec
