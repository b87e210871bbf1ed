#pragma once

#include "rbspec/constants.hpp"

#include <optional>

namespace rbspec {

// Saturated rubidium vapor pressure [Pa] over the liquid at temperature T [K].
// Alcock-style correlation log10(p/atm) = A - B/T; throws RangeError outside
// the declared validity window.
double vapor_pressure(double T, const ConstantsTable& c);
double vapor_pressure(double T);

// Ideal-gas number density [m^-3] at pressure p [Pa], temperature T [K].
double ideal_gas_density(double p, double T);

// Saturated-vapor number density [m^-3] at temperature T [K].
double number_density(double T, const ConstantsTable& c);
double number_density(double T);

// Experimental conditions of one absorption measurement.
//
// reservoir_T sets the vapor density (coldest point pins the pressure);
// cell_T sets the Doppler width (atoms thermalize to the walls they fly
// between). temperature_offset is an additive correction [K] applied to the
// reservoir reading before the density lookup - the free parameter when the
// thermometer sits away from the reservoir. density_override, when set,
// bypasses the vapor-pressure model entirely.
struct CellConditions {
    double reservoir_T = 0.0;      // [K]
    double cell_T = 0.0;           // [K]
    double path_length = 0.0;      // [m]
    double lorentz_extra = 0.0;    // extra homogeneous FWHM [MHz]
    double temperature_offset = 0.0; // [K], added to reservoir_T for density
    std::optional<double> density_override; // [m^-3]

    // Temperature actually used for the density lookup.
    double density_temperature() const { return reservoir_T + temperature_offset; }

    // Sanity-check the fields; throws RangeError / ConfigError on nonsense
    // (non-positive temperatures or path length, negative extra broadening).
    void validate() const;
};

// Number density [m^-3] for the given conditions (override, or saturated
// vapor at density_temperature()).
double cell_density(const CellConditions& cond, const ConstantsTable& c);
double cell_density(const CellConditions& cond);

} // namespace rbspec
