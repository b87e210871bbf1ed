#include "rbspec/vapor.hpp"
#include "rbspec/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rbspec {

double vapor_pressure(double T, const ConstantsTable& c) {
    const double Tmin = c.get("vapor.rb.Tmin");
    const double Tmax = c.get("vapor.rb.Tmax");
    if (!(T >= Tmin && T <= Tmax)) {
        std::ostringstream msg;
        msg << "vapor_pressure: T = " << T << " K outside validity window ["
            << Tmin << ", " << Tmax << "] K";
        throw RangeError(msg.str(), T, Tmin, Tmax);
    }
    const double A = c.get("vapor.rb.A_liquid");
    const double B = c.get("vapor.rb.B_liquid");
    return c.get("const.atm") * std::pow(10.0, A - B / T);
}

double vapor_pressure(double T) { return vapor_pressure(T, constants()); }

double ideal_gas_density(double p, double T) {
    if (!(T > 0.0))
        throw RangeError("ideal_gas_density: T must be positive", T, 0.0,
                         std::numeric_limits<double>::infinity());
    return p / (constants().get("const.kB") * T);
}

double number_density(double T, const ConstantsTable& c) {
    return vapor_pressure(T, c) / (c.get("const.kB") * T);
}

double number_density(double T) { return number_density(T, constants()); }

void CellConditions::validate() const {
    if (!(reservoir_T > 0.0))
        throw RangeError("cell conditions: reservoir temperature must be positive",
                         reservoir_T, 0.0,
                         std::numeric_limits<double>::infinity());
    if (!(cell_T > 0.0))
        throw RangeError("cell conditions: cell temperature must be positive",
                         cell_T, 0.0, std::numeric_limits<double>::infinity());
    if (cell_T < reservoir_T)
        throw RangeError("cell conditions: cell must be at least as warm as "
                         "the reservoir (condensation)",
                         cell_T, reservoir_T,
                         std::numeric_limits<double>::infinity());
    if (!(path_length > 0.0))
        throw RangeError("cell conditions: path length must be positive",
                         path_length, 0.0,
                         std::numeric_limits<double>::infinity());
    if (lorentz_extra < 0.0)
        throw RangeError("cell conditions: extra Lorentzian width must be >= 0",
                         lorentz_extra, 0.0,
                         std::numeric_limits<double>::infinity());
    if (density_override && !(*density_override >= 0.0))
        throw RangeError("cell conditions: density override must be >= 0",
                         *density_override, 0.0,
                         std::numeric_limits<double>::infinity());
}

double cell_density(const CellConditions& cond, const ConstantsTable& c) {
    cond.validate();
    if (cond.density_override) return *cond.density_override;
    return number_density(cond.density_temperature(), c);
}

double cell_density(const CellConditions& cond) {
    return cell_density(cond, constants());
}

} // namespace rbspec
