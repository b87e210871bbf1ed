#include "rbspec/eit.hpp"
#include "rbspec/errors.hpp"
#include "rbspec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rbspec {

void EITParams::validate() const {
    if (omega_c < 0.0)
        throw RangeError("eit: coupling Rabi frequency must be >= 0", omega_c,
                         0.0, std::numeric_limits<double>::infinity());
    if (gamma_e < 0.0 || gamma_r < 0.0 || gamma_transit < 0.0)
        throw RangeError("eit: decay/dephasing rates must be >= 0",
                         std::min({gamma_e, gamma_r, gamma_transit}), 0.0,
                         std::numeric_limits<double>::infinity());
    if (!(lambda_p > 0.0) || !(lambda_c > 0.0))
        throw RangeError("eit: wavelengths must be positive",
                         std::min(lambda_p, lambda_c), 0.0,
                         std::numeric_limits<double>::infinity());
    if (lambda_p == lambda_c)
        throw ConfigError("eit: probe and coupling wavelengths must differ");
    if (!(T > 0.0))
        throw RangeError("eit: temperature must be positive", T, 0.0,
                         std::numeric_limits<double>::infinity());
    if (!(mass > 0.0))
        throw RangeError("eit: mass must be positive", mass, 0.0,
                         std::numeric_limits<double>::infinity());
}

EITParams rb_ladder_params(const ConstantsTable& c) {
    EITParams p;
    p.gamma_e = 0.5 * c.get("rb87.gamma_5P32");
    // Upper-state FWHM [MHz] from the lifetime: 1 / (2 pi tau).
    const double gamma_r_fwhm =
        1.0 / (2.0 * M_PI * c.get("ladder.lifetime_5D52")) * 1e-6;
    p.gamma_r = 0.5 * gamma_r_fwhm;
    p.lambda_p = c.get("rb87.lambda_d2");
    p.lambda_c = c.get("ladder.lambda_coupling");
    p.mass = c.get("rb87.mass_amu") * c.get("const.amu");
    return p;
}

EITParams rb_ladder_params() { return rb_ladder_params(constants()); }

double transit_rate(const BeamProfile& beam, const ChannelGeometry& channel,
                    double T, double mass) {
    beam.validate();
    channel.validate();
    if (!(T > 0.0) || !(mass > 0.0))
        throw RangeError("transit_rate: T and mass must be positive",
                         std::min(T, mass), 0.0,
                         std::numeric_limits<double>::infinity());

    constexpr double kB = 1.380649e-23; // exact SI value [J/K]
    const double mean_speed = std::sqrt(8.0 * kB * T / (M_PI * mass)); // [m/s]
    const double d_eff =
        std::min(2.0 * beam.waist_radius, channel.smallest_dimension()) * 1e-6;
    return mean_speed / (2.0 * M_PI * d_eff) * 1e-6; // [MHz]
}

namespace {

// Wavevectors in MHz per (m/s): a velocity v shifts an optical frequency by
// v / lambda (ordinary frequency, matching the MHz detuning convention).
double wavevector(double lambda) { return 1e-6 / lambda; }

std::complex<double> chi_at(double delta_p, double delta_c, const EITParams& p,
                            double v, double omega_c) {
    const double kp = wavevector(p.lambda_p);
    const double kc = wavevector(p.lambda_c);
    const double dk = p.counter_propagating ? kp + kc : kp - kc;

    const std::complex<double> i(0.0, 1.0);
    std::complex<double> denom =
        p.gamma_e - i * (delta_p - kp * v);
    if (omega_c > 0.0)
        denom += (omega_c * omega_c / 4.0) /
                 (p.gamma_r + p.gamma_transit -
                  i * (delta_p + delta_c - dk * v));
    return i / denom;
}

// Maxwell-weighted absorption of the probe at one coupling detuning.
double averaged_absorption_impl(double delta_c, const EITParams& p,
                                double omega_c, double rel_tol) {
    constexpr double kB = 1.380649e-23;
    const double sigma_v = std::sqrt(kB * p.T / p.mass); // [m/s]
    const double span = 8.0 * sigma_v;
    const double norm = 1.0 / (sigma_v * std::sqrt(2.0 * M_PI));

    const double kp = wavevector(p.lambda_p);
    const double kc = wavevector(p.lambda_c);
    const double dk = p.counter_propagating ? kp + kc : kp - kc;

    // The integrand has narrow structure where either leg is resonant for
    // the velocity class; seed the quadrature there.
    std::vector<double> knots;
    auto seed = [&knots](double center, double width) {
        for (double m : {-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0})
            knots.push_back(center + m * width);
    };
    seed(p.probe_detuning / kp, (p.gamma_e + omega_c) / kp);
    if (dk != 0.0 && omega_c > 0.0)
        seed((p.probe_detuning + delta_c) / dk,
             (p.gamma_r + p.gamma_transit + omega_c) / std::abs(dk));

    QuadratureOptions opts;
    opts.rel_tol = rel_tol;
    opts.max_depth = 48;

    auto integrand = [&](double v) {
        const double f = norm * std::exp(-0.5 * (v / sigma_v) * (v / sigma_v));
        return f * chi_at(p.probe_detuning, delta_c, p, v, omega_c).imag();
    };
    return adaptive_simpson(integrand, -span, span, knots, opts);
}

} // namespace

double averaged_absorption(double delta_c, const EITParams& p,
                           double rel_tol) {
    p.validate();
    if (!(rel_tol > 0.0))
        throw RangeError("averaged_absorption: tolerance must be positive",
                         rel_tol, 0.0,
                         std::numeric_limits<double>::infinity());
    return averaged_absorption_impl(delta_c, p, p.omega_c, rel_tol);
}

std::complex<double> ladder_susceptibility(double delta_p, double delta_c,
                                           const EITParams& p, double v) {
    p.validate();
    return chi_at(delta_p, delta_c, p, v, p.omega_c);
}

SpectrumTrace coupling_scan(const Eigen::ArrayXd& delta_c_grid,
                            const EITParams& p, double smoothing_fwhm) {
    p.validate();
    if (delta_c_grid.size() < 2)
        throw DataError("coupling_scan: need at least two grid points");
    if (smoothing_fwhm < 0.0)
        throw RangeError("coupling_scan: smoothing width must be >= 0",
                         smoothing_fwhm, 0.0,
                         std::numeric_limits<double>::infinity());

    SpectrumTrace trace;
    trace.detunings = delta_c_grid;
    trace.kind = TraceKind::EitTransparency;
    trace.values = Eigen::ArrayXd::Zero(delta_c_grid.size());

    const double base = averaged_absorption_impl(0.0, p, 0.0, 1e-6);
    if (!(std::abs(base) > 0.0))
        throw NumericError("coupling_scan: vanishing coupling-free absorption");

    if (p.omega_c > 0.0) {
        for (Eigen::Index j = 0; j < delta_c_grid.size(); ++j) {
            const double a =
                averaged_absorption_impl(delta_c_grid[j], p, p.omega_c, 1e-6);
            trace.values[j] = (base - a) / base;
        }
    }

    if (smoothing_fwhm > 0.0) {
        // Discrete Gaussian smoothing; needs uniform sampling.
        const Eigen::Index n = delta_c_grid.size();
        const double step = delta_c_grid[1] - delta_c_grid[0];
        for (Eigen::Index j = 1; j + 1 < n; ++j)
            if (std::abs((delta_c_grid[j + 1] - delta_c_grid[j]) - step) >
                1e-9 * std::abs(step))
                throw ConfigError("coupling_scan: smoothing requires a uniform grid");

        const double sigma = smoothing_fwhm / 2.3548200450309493;
        const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma /
                                                                std::abs(step))));
        Eigen::ArrayXd kernel(2 * half + 1);
        for (int m = -half; m <= half; ++m)
            kernel[m + half] = std::exp(-0.5 * (m * step / sigma) * (m * step / sigma));

        Eigen::ArrayXd smoothed(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            double acc = 0.0, wsum = 0.0;
            for (int m = -half; m <= half; ++m) {
                const Eigen::Index idx = j + m;
                if (idx < 0 || idx >= n) continue; // renormalize at the edges
                acc += kernel[m + half] * trace.values[idx];
                wsum += kernel[m + half];
            }
            smoothed[j] = acc / wsum;
        }
        trace.values = smoothed;
    }
    return trace;
}

double trace_fwhm(const SpectrumTrace& trace) {
    const Eigen::Index n = trace.values.size();
    if (n < 3) throw DataError("trace_fwhm: too few points");

    Eigen::Index ipk = 0;
    double peak = trace.values[0];
    for (Eigen::Index i = 1; i < n; ++i)
        if (trace.values[i] > peak) {
            peak = trace.values[i];
            ipk = i;
        }
    if (!(peak > 0.0)) throw DataError("trace_fwhm: no positive peak");
    const double half = 0.5 * peak;

    // Walk outward from the peak to the half-height crossings.
    double left = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index i = ipk; i > 0; --i) {
        if (trace.values[i - 1] <= half && trace.values[i] >= half) {
            const double f = (half - trace.values[i - 1]) /
                             (trace.values[i] - trace.values[i - 1]);
            left = trace.detunings[i - 1] +
                   f * (trace.detunings[i] - trace.detunings[i - 1]);
            break;
        }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index i = ipk; i + 1 < n; ++i) {
        if (trace.values[i + 1] <= half && trace.values[i] >= half) {
            const double f = (trace.values[i] - half) /
                             (trace.values[i] - trace.values[i + 1]);
            right = trace.detunings[i] +
                    f * (trace.detunings[i + 1] - trace.detunings[i]);
            break;
        }
    }
    if (std::isnan(left) || std::isnan(right))
        throw DataError("trace_fwhm: half-height crossings not bracketed by grid");
    return right - left;
}

} // namespace rbspec
