#pragma once

#include "rbspec/atomic_data.hpp"
#include "rbspec/vapor.hpp"

#include <Eigen/Core>

#include <string>

namespace rbspec {

// Trapezoidal channel cross-section, wide side up. All lengths in microns.
struct ChannelGeometry {
    double top_width = 0.0;    // [um]
    double bottom_width = 0.0; // [um]
    double depth = 0.0;        // [um]

    // Smallest confining dimension seen by a beam crossing the channel.
    double smallest_dimension() const;

    // Throws RangeError unless top_width >= bottom_width > 0 and depth > 0.
    void validate() const;
};

// Focused Gaussian probe, 1/e^2 intensity radius in microns.
struct BeamProfile {
    double waist_radius = 0.0; // [um]
    void validate() const;
};

// Vertical chord of the trapezoid at lateral offset x [um] from the channel
// center: full depth over the floor, linear ramp along the sloped sidewalls,
// zero outside.
double path_length(double x, const ChannelGeometry& g);

// Peak absorption coefficient [1/m] of one hyperfine group: the maximum of
// alpha over detunings around the lines sharing the labeled line's isotope
// and ground F (all other lines still contribute their wings).
double group_peak_absorption(const TransitionTable& table,
                             const CellConditions& cond,
                             const std::string& line_label);

// Absorbed fraction of the probe power versus stage position [um]:
// signal(x0) = integral I(x - x0) * (1 - exp(-alpha L(x))) dx with I the
// unit-integral transverse Gaussian. alpha_peak in [1/m], L in [um].
Eigen::ArrayXd scan_signal(const Eigen::ArrayXd& positions,
                           const ChannelGeometry& g, const BeamProfile& beam,
                           double alpha_peak);

// Scan of the labeled group's peak absorption across the channel.
Eigen::ArrayXd scan_absorption(const Eigen::ArrayXd& positions,
                               const ChannelGeometry& g,
                               const BeamProfile& beam,
                               const CellConditions& cond,
                               const TransitionTable& table,
                               const std::string& line_label);

// Fluorescence collected while scanning: proportional to the absorbed pump
// power, with the excitation parked on the table's reference group.
Eigen::ArrayXd scan_fluorescence(const Eigen::ArrayXd& positions,
                                 const ChannelGeometry& g,
                                 const BeamProfile& beam,
                                 const CellConditions& cond,
                                 const TransitionTable& table);

} // namespace rbspec
