#pragma once

#include "rbspec/atomic_data.hpp"
#include "rbspec/vapor.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace rbspec {

enum class TraceKind {
    Transmission,           // dimensionless 0..1
    OpticalDepth,           // alpha * L
    AbsorptionCoefficient,  // [1/m]
    Fluorescence,           // arbitrary units
    EitTransparency,        // relative absorption change, dimensionless
};

// A sampled curve over a detuning grid.
struct SpectrumTrace {
    Eigen::ArrayXd detunings; // [MHz]
    Eigen::ArrayXd values;
    TraceKind kind = TraceKind::Transmission;
};

// Standard probe grid: -4000 .. +7000 MHz in 2 MHz steps, covering all four
// Doppler-broadened absorption groups of natural rubidium.
Eigen::ArrayXd default_detuning_grid();

// Absorption coefficient alpha [1/m] at one detuning [MHz] relative to the
// table's reference line.
double absorption_at(double detuning, const TransitionTable& table,
                     const CellConditions& cond);

// Same over a grid (per-isotope widths are computed once, not per point).
Eigen::ArrayXd absorption_coefficient(const Eigen::ArrayXd& detunings,
                                      const TransitionTable& table,
                                      const CellConditions& cond);

// Absorption coefficient as a typed trace (kind = AbsorptionCoefficient).
SpectrumTrace absorption_trace(const Eigen::ArrayXd& detunings,
                               const TransitionTable& table,
                               const CellConditions& cond);

// Beer-Lambert transmission exp(-alpha L) applied to an absorption
// coefficient trace. Throws DataError when the input is of any other kind.
SpectrumTrace transmission(const SpectrumTrace& alpha, double path_length);

// Beer-Lambert transmission exp(-alpha L) over a grid.
SpectrumTrace transmission_spectrum(const Eigen::ArrayXd& detunings,
                                    const TransitionTable& table,
                                    const CellConditions& cond);

// Optical depth alpha(detuning) * L.
double optical_density_at(double detuning, const TransitionTable& table,
                          const CellConditions& cond);

// One point of an optical-depth-versus-temperature curve. Points whose
// temperature falls outside the vapor-pressure validity window come back
// with ok = false and the error message instead of a value.
struct OdPoint {
    double temperature = 0.0; // reservoir reading [K]
    double od = 0.0;
    bool ok = false;
    std::string error;
};

// Optical depth at reference_detuning for each reservoir temperature. The
// cell/reservoir temperature difference and all other conditions are taken
// from `base`; only the reservoir reading is swept.
std::vector<OdPoint> od_curve(const std::vector<double>& reservoir_temps,
                              double reference_detuning,
                              const TransitionTable& table,
                              const CellConditions& base);

// Collected-fluorescence proxy: linear in vapor density, effective excitation
// volume [m^3], and excitation probability (arbitrary overall scale).
double fluorescence_rate(const CellConditions& cond, double effective_volume,
                         double excitation_probability);

} // namespace rbspec
