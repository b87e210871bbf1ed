#pragma once

#include "rbspec/constants.hpp"

#include <map>
#include <string>
#include <vector>

namespace rbspec {

// Hyperfine energy shift [same unit as A, B] of level |I J F> via the
// magnetic-dipole + electric-quadrupole formula. Doubled momenta. The
// quadrupole term applies only when both I and J exceed 1/2.
double hyperfine_shift(double A, double B, int two_I, int two_J, int two_F);

// Parsed form of a line label like "Rb85:3-4" (isotope, Fg, Fe).
struct LineLabel {
    std::string isotope; // "Rb85" | "Rb87"
    int Fg;
    int Fe;
};

// Parse "Rb85:3-4" style labels; throws ConfigError on malformed input.
LineLabel parse_line_label(const std::string& label);

// One hyperfine component of the D2 line.
struct HyperfineTransition {
    std::string isotope;      // "Rb85" | "Rb87"
    int Fg;                   // ground F
    int Fe;                   // excited F
    double detuning;          // [MHz] offset from the reference line
    double rel_strength;      // (2Fg+1)(2Fe+1) {Jg Je 1; Fe Fg I}^2
    double population;        // thermal ground-state fraction (2Fg+1)/((2I+1)(2Jg+1))
    double weight;            // abundance * population * kappa * rel_strength * sigma0_area
                              // [m^2 MHz]: alpha(d) = n * sum_i weight_i * V(d - detuning_i)
    std::string label() const; // "Rb85:3-4"
};

// Per-isotope data needed to turn line strengths into cross sections.
struct IsotopeScale {
    double mass;        // [kg]
    double abundance;   // natural fraction
    double lambda;      // D2 wavelength [m]
    double gamma_nat;   // natural linewidth FWHM [MHz]
    double kappa;       // strength normalization: 1 / sum_iso(pop * rel_strength)
    double sigma0_area; // (3 lambda^2 / 2 pi) * (pi gamma_nat / 2) [m^2 MHz]
};

// The full D2 manifold (12 lines for natural rubidium), detunings measured
// from a chosen reference component.
struct TransitionTable {
    std::vector<HyperfineTransition> lines; // sorted by detuning
    std::map<std::string, IsotopeScale> isotopes;
    std::string reference; // label of the zero-detuning line

    // Detuning of a specific component; throws ConfigError if absent.
    double line_detuning(const std::string& label) const;

    // Subset with detunings inside [lo, hi]; per-line weights (and therefore
    // the absolute cross-section scale) are preserved.
    TransitionTable restrict_to(double lo, double hi) const;
};

// Build the D2 transition table from a constants table. The reference
// argument names the line whose detuning defines zero.
TransitionTable transition_table(const ConstantsTable& c,
                                 const std::string& reference = "Rb87:2-3");

// Same, using the process-wide constants().
TransitionTable transition_table(const std::string& reference = "Rb87:2-3");

} // namespace rbspec
