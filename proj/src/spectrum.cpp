#include "rbspec/spectrum.hpp"
#include "rbspec/errors.hpp"
#include "rbspec/lineshape.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace rbspec {

Eigen::ArrayXd default_detuning_grid() {
    return Eigen::ArrayXd::LinSpaced(5501, -4000.0, 7000.0);
}

namespace {

// Voigt widths per isotope for the given conditions.
std::map<std::string, VoigtParams>
isotope_widths(const TransitionTable& table, const CellConditions& cond) {
    std::map<std::string, VoigtParams> widths;
    for (const auto& [name, iso] : table.isotopes) {
        VoigtParams p;
        p.sigma_gauss =
            fwhm_to_sigma(doppler_fwhm(cond.cell_T, iso.mass, iso.lambda));
        p.gamma_lorentz = 0.5 * (iso.gamma_nat + cond.lorentz_extra);
        widths[name] = p;
    }
    return widths;
}

} // namespace

double absorption_at(double detuning, const TransitionTable& table,
                     const CellConditions& cond) {
    cond.validate();
    if (table.lines.empty())
        throw DataError("absorption_at: transition table has no lines");

    const double n = cell_density(cond);
    const auto widths = isotope_widths(table, cond);

    double alpha = 0.0;
    for (const auto& ln : table.lines)
        alpha += ln.weight * voigt(detuning - ln.detuning, widths.at(ln.isotope));
    return n * alpha;
}

Eigen::ArrayXd absorption_coefficient(const Eigen::ArrayXd& detunings,
                                      const TransitionTable& table,
                                      const CellConditions& cond) {
    cond.validate();
    if (table.lines.empty())
        throw DataError("absorption_coefficient: transition table has no lines");

    const double n = cell_density(cond);
    const auto widths = isotope_widths(table, cond);

    Eigen::ArrayXd alpha = Eigen::ArrayXd::Zero(detunings.size());
    for (const auto& ln : table.lines) {
        const VoigtParams& p = widths.at(ln.isotope);
        for (Eigen::Index i = 0; i < detunings.size(); ++i)
            alpha[i] += ln.weight * voigt(detunings[i] - ln.detuning, p);
    }
    return n * alpha;
}

SpectrumTrace absorption_trace(const Eigen::ArrayXd& detunings,
                               const TransitionTable& table,
                               const CellConditions& cond) {
    SpectrumTrace trace;
    trace.detunings = detunings;
    trace.values = absorption_coefficient(detunings, table, cond);
    trace.kind = TraceKind::AbsorptionCoefficient;
    return trace;
}

SpectrumTrace transmission(const SpectrumTrace& alpha, double path_length) {
    if (alpha.kind != TraceKind::AbsorptionCoefficient)
        throw DataError("transmission: input trace must be an absorption "
                        "coefficient");
    if (!(path_length > 0.0))
        throw RangeError("transmission: path length must be positive",
                         path_length, 0.0,
                         std::numeric_limits<double>::infinity());
    SpectrumTrace trace;
    trace.detunings = alpha.detunings;
    trace.values = (-path_length * alpha.values).exp();
    trace.kind = TraceKind::Transmission;
    return trace;
}

SpectrumTrace transmission_spectrum(const Eigen::ArrayXd& detunings,
                                    const TransitionTable& table,
                                    const CellConditions& cond) {
    SpectrumTrace trace;
    trace.detunings = detunings;
    trace.values =
        (-cond.path_length * absorption_coefficient(detunings, table, cond))
            .exp();
    trace.kind = TraceKind::Transmission;
    return trace;
}

double optical_density_at(double detuning, const TransitionTable& table,
                          const CellConditions& cond) {
    return absorption_at(detuning, table, cond) * cond.path_length;
}

std::vector<OdPoint> od_curve(const std::vector<double>& reservoir_temps,
                              double reference_detuning,
                              const TransitionTable& table,
                              const CellConditions& base) {
    const double cell_delta = base.cell_T - base.reservoir_T;

    std::vector<OdPoint> out;
    out.reserve(reservoir_temps.size());
    for (double T : reservoir_temps) {
        OdPoint pt;
        pt.temperature = T;
        CellConditions cond = base;
        cond.reservoir_T = T;
        cond.cell_T = T + cell_delta;
        try {
            pt.od = optical_density_at(reference_detuning, table, cond);
            pt.ok = true;
        } catch (const RangeError& e) {
            pt.error = e.what();
        }
        out.push_back(pt);
    }
    return out;
}

double fluorescence_rate(const CellConditions& cond, double effective_volume,
                         double excitation_probability) {
    if (!(effective_volume > 0.0))
        throw RangeError("fluorescence_rate: effective volume must be positive",
                         effective_volume, 0.0,
                         std::numeric_limits<double>::infinity());
    if (excitation_probability < 0.0 || excitation_probability > 1.0)
        throw RangeError("fluorescence_rate: excitation probability must lie "
                         "in [0, 1]",
                         excitation_probability, 0.0, 1.0);
    return cell_density(cond) * effective_volume * excitation_probability;
}

} // namespace rbspec
