#pragma once

#include "rbspec/atomic_data.hpp"
#include "rbspec/errors.hpp"
#include "rbspec/spectrum.hpp"
#include "rbspec/vapor.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rbspec {

// Starting point for the spectrum fit. density_scale multiplies the
// vapor-model density for the given conditions; frequency_offset shifts the
// model grid onto the data grid [MHz].
struct FitInit {
    double density_scale = 1.0;
    double lorentz_extra = 0.0;   // [MHz]
    double frequency_offset = 0.0; // [MHz]
    double amplitude = 1.0;
    double baseline = 0.0;
    bool low_confidence = false;
};

struct FitOptions {
    int max_iterations = 200;   // optimizer trials (accepted or rejected)
    double lambda0 = 1e-3;      // initial damping
    double rel_obj_tol = 1e-10; // relative objective decrease per step
    double grad_tol = 1e-8;     // infinity norm of the gradient
};

// Outcome of a spectrum fit. params/uncertainties are keyed by
// "density_scale", "lorentz_extra", "frequency_offset", "amplitude",
// "baseline". od_ref is the fitted optical depth at the 85Rb F=3 -> F'=4
// component, the quantity tracked across temperature.
struct FitResult {
    std::map<std::string, double> params;
    std::map<std::string, double> uncertainties;
    double residual_norm = 0.0; // sqrt(sum of squared residuals)
    double od_ref = 0.0;
    bool converged = false;
    int n_iterations = 0;
    std::vector<double> objective_trace; // objective after each accepted step
    bool low_confidence_init = false;
};

// Optimizer failure that still carries the best state reached.
class FitError : public Error {
public:
    FitError(const std::string& msg, FitResult best_so_far)
        : Error(msg), best(std::move(best_so_far)) {}
    FitResult best;
};

// Initial guess from the data alone: finds the two deepest absorption dips,
// identifies them with the 87Rb Fg=2 and 85Rb Fg=3 groups by their spacing,
// and reads off frequency offset and density scale. Falls back to an
// absorption-weighted centroid (low_confidence set) when the dips are not
// resolvable.
FitInit peak_find_init(const SpectrumTrace& data, const TransitionTable& table,
                       const CellConditions& cond);

// Model transmission b + A exp(-L alpha(delta - offset)) and its parameter
// Jacobian on a detuning grid, evaluated at the given parameter point. The
// Jacobian columns follow the optimizer's coordinates: log density scale,
// lorentz_extra, frequency_offset, amplitude, baseline. Exposed so the
// analytic gradients driving the fit can be checked externally.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> fit_model_with_jacobian(
    const Eigen::ArrayXd& detunings, const TransitionTable& table,
    const CellConditions& cond, const FitInit& at);

// Damped least-squares fit of a transmission spectrum to the multi-line
// Voigt model b + A exp(-L alpha(delta - offset)). Throws DataError on
// unusable input (wrong kind, too few points, short span, flat trace) and
// FitError (with best-so-far state) when the iteration limit is hit.
FitResult fit_spectrum(const SpectrumTrace& data, const TransitionTable& table,
                       const CellConditions& cond,
                       const std::optional<FitInit>& init = std::nullopt,
                       const FitOptions& opts = {});

// One measured point of an OD-versus-temperature series.
struct OdMeasurement {
    double reservoir_T = 0.0; // thermometer reading [K]
    double od = 0.0;          // measured optical depth (> 0)
};

struct TemperatureOffsetResult {
    double delta_T = 0.0;     // additive thermometer correction [K]
    double uncertainty = 0.0; // 1-sigma [K]
    bool converged = false;
    int n_iterations = 0;
};

// Calibrate the thermometer offset: finds delta_T minimizing the squared
// log-OD residuals of the vapor-model prediction at reservoir_T + delta_T.
// Points must sit below the validity ceiling of 463.15 K (190 C); offsets
// that push any point outside the vapor model's range are rejected.
TemperatureOffsetResult fit_temperature_offset(
    const std::vector<OdMeasurement>& points, double reference_detuning,
    const TransitionTable& table, const CellConditions& base);

} // namespace rbspec
