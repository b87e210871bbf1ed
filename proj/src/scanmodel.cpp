#include "rbspec/scanmodel.hpp"
#include "rbspec/errors.hpp"
#include "rbspec/lineshape.hpp"
#include "rbspec/quadrature.hpp"
#include "rbspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbspec {

double ChannelGeometry::smallest_dimension() const {
    return std::min(bottom_width, depth);
}

void ChannelGeometry::validate() const {
    if (!(bottom_width > 0.0))
        throw RangeError("channel: bottom width must be positive", bottom_width,
                         0.0, std::numeric_limits<double>::infinity());
    if (!(top_width >= bottom_width))
        throw RangeError("channel: top width must be >= bottom width", top_width,
                         bottom_width, std::numeric_limits<double>::infinity());
    if (!(depth > 0.0))
        throw RangeError("channel: depth must be positive", depth, 0.0,
                         std::numeric_limits<double>::infinity());
}

void BeamProfile::validate() const {
    if (!(waist_radius > 0.0))
        throw RangeError("beam: waist radius must be positive", waist_radius,
                         0.0, std::numeric_limits<double>::infinity());
}

double path_length(double x, const ChannelGeometry& g) {
    g.validate();
    const double ax = std::abs(x);
    const double half_bot = 0.5 * g.bottom_width;
    const double half_top = 0.5 * g.top_width;
    if (ax <= half_bot) return g.depth;
    if (ax >= half_top) return 0.0;
    return g.depth * (half_top - ax) / (half_top - half_bot);
}

double group_peak_absorption(const TransitionTable& table,
                             const CellConditions& cond,
                             const std::string& line_label) {
    const LineLabel want = parse_line_label(line_label);

    // Detuning range spanned by the group's components, and the
    // strength-weighted centroid that anchors which feature we refine.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double centroid = 0.0, wsum = 0.0;
    for (const auto& ln : table.lines) {
        if (ln.isotope == want.isotope && ln.Fg == want.Fg) {
            lo = std::min(lo, ln.detuning);
            hi = std::max(hi, ln.detuning);
            centroid += ln.weight * ln.detuning;
            wsum += ln.weight;
        }
    }
    if (!(lo <= hi))
        throw ConfigError("group_peak_absorption: no lines matching " +
                          line_label);
    centroid /= wsum;

    const auto& iso = table.isotopes.at(want.isotope);
    const double fwhm = doppler_fwhm(cond.cell_T, iso.mass, iso.lambda);
    lo -= fwhm;
    hi += fwhm;

    // Coarse grid, then pick the interior local maximum closest to the
    // group centroid: a neighboring (possibly stronger) group can leak into
    // the search window, so a plain argmax would latch onto the wrong
    // feature. Golden-section refinement around the chosen sample.
    const int n = 257;
    Eigen::ArrayXd grid(n), av(n);
    for (int i = 0; i < n; ++i) {
        grid[i] = lo + (hi - lo) * i / (n - 1);
        av[i] = absorption_at(grid[i], table, cond);
    }
    int pick = -1;
    for (int i = 1; i + 1 < n; ++i) {
        if (av[i] >= av[i - 1] && av[i] >= av[i + 1]) {
            if (pick < 0 ||
                std::abs(grid[i] - centroid) < std::abs(grid[pick] - centroid))
                pick = i;
        }
    }
    if (pick < 0) { // monotone window: fall back to the best sample
        Eigen::Index imax = 0;
        av.maxCoeff(&imax);
        pick = static_cast<int>(imax);
    }
    const double best_x = grid[pick];
    const double step = (hi - lo) / (n - 1);
    double a = best_x - step, b = best_x + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = absorption_at(c, table, cond);
    double fd = absorption_at(d, table, cond);
    for (int i = 0; i < 60 && (b - a) > 1e-9; ++i) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = absorption_at(c, table, cond);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = absorption_at(d, table, cond);
        }
    }
    return std::max(fc, fd);
}

Eigen::ArrayXd scan_signal(const Eigen::ArrayXd& positions,
                           const ChannelGeometry& g, const BeamProfile& beam,
                           double alpha_peak) {
    g.validate();
    beam.validate();
    if (alpha_peak < 0.0)
        throw RangeError("scan_signal: negative absorption coefficient",
                         alpha_peak, 0.0,
                         std::numeric_limits<double>::infinity());

    const double w = beam.waist_radius;
    const double norm = std::sqrt(2.0 / M_PI) / w;
    const double alpha_per_um = alpha_peak * 1e-6; // [1/m] -> [1/um]

    const std::vector<double> kinks = {
        -0.5 * g.top_width, -0.5 * g.bottom_width,
        0.5 * g.bottom_width, 0.5 * g.top_width};

    QuadratureOptions opts;
    opts.rel_tol = 1e-5;
    // Signals are absorbed power fractions (O(1) at most); a tiny absolute
    // floor keeps the refinement from chasing the Gaussian tail to machine
    // precision when the beam barely clips the channel.
    opts.abs_tol = 1e-13;

    Eigen::ArrayXd out(positions.size());
    for (Eigen::Index i = 0; i < positions.size(); ++i) {
        const double x0 = positions[i];
        auto integrand = [&](double x) {
            const double u = (x - x0) / w;
            const double inten = norm * std::exp(-2.0 * u * u);
            return inten * (1.0 - std::exp(-alpha_per_um * path_length(x, g)));
        };
        // The Gaussian confines everything to x0 +- 7 w, and the channel
        // chord vanishes outside the top opening: integrate only over the
        // overlap and split at the trapezoid kinks inside it.
        const double lo = std::max(x0 - 7.0 * w, -0.5 * g.top_width);
        const double hi = std::min(x0 + 7.0 * w, 0.5 * g.top_width);
        out[i] = lo < hi ? adaptive_simpson(integrand, lo, hi, kinks, opts)
                         : 0.0;
    }
    return out;
}

Eigen::ArrayXd scan_absorption(const Eigen::ArrayXd& positions,
                               const ChannelGeometry& g,
                               const BeamProfile& beam,
                               const CellConditions& cond,
                               const TransitionTable& table,
                               const std::string& line_label) {
    return scan_signal(positions, g, beam,
                       group_peak_absorption(table, cond, line_label));
}

Eigen::ArrayXd scan_fluorescence(const Eigen::ArrayXd& positions,
                                 const ChannelGeometry& g,
                                 const BeamProfile& beam,
                                 const CellConditions& cond,
                                 const TransitionTable& table) {
    return scan_signal(positions, g, beam,
                       group_peak_absorption(table, cond, table.reference));
}

} // namespace rbspec
