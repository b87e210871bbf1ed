#include "rbspec/atomic_data.hpp"
#include "rbspec/angular.hpp"
#include "rbspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rbspec {

double hyperfine_shift(double A, double B, int two_I, int two_J, int two_F) {
    if (two_I < 0 || two_J < 0 || two_F < 0)
        throw ConfigError("hyperfine_shift: negative angular momentum");
    if (two_F < std::abs(two_I - two_J) || two_F > two_I + two_J)
        throw ConfigError("hyperfine_shift: F outside |I-J|..I+J");

    const double I = 0.5 * two_I;
    const double J = 0.5 * two_J;
    const double F = 0.5 * two_F;
    const double K = F * (F + 1.0) - I * (I + 1.0) - J * (J + 1.0);

    double shift = 0.5 * A * K;
    if (two_I > 1 && two_J > 1) {
        const double num =
            1.5 * K * (K + 1.0) - 2.0 * I * (I + 1.0) * J * (J + 1.0);
        const double den =
            2.0 * I * (2.0 * I - 1.0) * 2.0 * J * (2.0 * J - 1.0);
        shift += B * num / den;
    }
    return shift;
}

LineLabel parse_line_label(const std::string& label) {
    // Expected shape: "<isotope>:<Fg>-<Fe>", e.g. "Rb87:2-3".
    auto colon = label.find(':');
    auto dash = label.find('-', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos || dash == std::string::npos ||
        colon == 0 || dash <= colon + 1 || dash + 1 >= label.size())
        throw ConfigError("bad line label '" + label +
                          "' (expected e.g. \"Rb85:3-4\")");

    LineLabel out;
    out.isotope = label.substr(0, colon);
    try {
        size_t used = 0;
        std::string fg = label.substr(colon + 1, dash - colon - 1);
        out.Fg = std::stoi(fg, &used);
        if (used != fg.size()) throw std::invalid_argument(fg);
        std::string fe = label.substr(dash + 1);
        out.Fe = std::stoi(fe, &used);
        if (used != fe.size()) throw std::invalid_argument(fe);
    } catch (const std::exception&) {
        throw ConfigError("bad line label '" + label +
                          "' (expected e.g. \"Rb85:3-4\")");
    }
    if (out.Fg < 0 || out.Fe < 0)
        throw ConfigError("bad line label '" + label + "': negative F");
    return out;
}

std::string HyperfineTransition::label() const {
    std::ostringstream ss;
    ss << isotope << ":" << Fg << "-" << Fe;
    return ss.str();
}

double TransitionTable::line_detuning(const std::string& label) const {
    LineLabel want = parse_line_label(label);
    for (const auto& ln : lines)
        if (ln.isotope == want.isotope && ln.Fg == want.Fg && ln.Fe == want.Fe)
            return ln.detuning;
    throw ConfigError("no such line in table: " + label);
}

TransitionTable TransitionTable::restrict_to(double lo, double hi) const {
    TransitionTable out;
    out.isotopes = isotopes;
    out.reference = reference;
    for (const auto& ln : lines)
        if (ln.detuning >= lo && ln.detuning <= hi)
            out.lines.push_back(ln);
    return out;
}

namespace {

struct IsotopeInput {
    std::string name;
    int two_I;
    double A_g, A_e, B_e; // [MHz]
    double iso_shift;     // [MHz] centroid offset
    double mass;          // [kg]
    double abundance;
    double lambda;        // [m]
    double gamma_nat;     // [MHz]
};

IsotopeInput read_isotope(const ConstantsTable& c, const std::string& key,
                          const std::string& name) {
    IsotopeInput in;
    in.name = name;
    in.two_I = static_cast<int>(std::lround(2.0 * c.get(key + ".nuclear_spin")));
    in.A_g = c.get(key + ".A_5S12");
    in.A_e = c.get(key + ".A_5P32");
    in.B_e = c.get(key + ".B_5P32");
    in.iso_shift = c.get(key + ".isotope_shift_d2");
    in.mass = c.get(key + ".mass_amu") * c.get("const.amu");
    in.abundance = c.get(key + ".abundance");
    in.lambda = c.get(key + ".lambda_d2");
    in.gamma_nat = c.get(key + ".gamma_5P32");
    return in;
}

} // namespace

TransitionTable transition_table(const ConstantsTable& c,
                                 const std::string& reference) {
    const IsotopeInput inputs[2] = {
        read_isotope(c, "rb85", "Rb85"),
        read_isotope(c, "rb87", "Rb87"),
    };

    // D2: 5S1/2 (Jg=1/2) -> 5P3/2 (Je=3/2).
    const int two_Jg = 1, two_Je = 3;

    TransitionTable table;
    table.reference = reference;

    for (const auto& iso : inputs) {
        const int two_I = iso.two_I;
        const double ground_degeneracy = (two_I + 1.0) * (two_Jg + 1.0);

        IsotopeScale scale;
        scale.mass = iso.mass;
        scale.abundance = iso.abundance;
        scale.lambda = iso.lambda;
        scale.gamma_nat = iso.gamma_nat;
        scale.sigma0_area = (3.0 * iso.lambda * iso.lambda / (2.0 * M_PI)) *
                            (M_PI * iso.gamma_nat / 2.0);

        // Collect the allowed components and the strength normalization.
        double strength_sum = 0.0;
        std::vector<HyperfineTransition> iso_lines;
        for (int two_Fg = std::abs(two_I - two_Jg); two_Fg <= two_I + two_Jg;
             two_Fg += 2) {
            for (int two_Fe = std::abs(two_I - two_Je); two_Fe <= two_I + two_Je;
                 two_Fe += 2) {
                if (std::abs(two_Fe - two_Fg) > 2) continue; // dipole selection

                double sixj = wigner_6j(two_Jg, two_Je, 2,
                                        two_Fe, two_Fg, two_I);
                double rel = (two_Fg + 1.0) * (two_Fe + 1.0) * sixj * sixj;

                HyperfineTransition ln;
                ln.isotope = iso.name;
                ln.Fg = two_Fg / 2;
                ln.Fe = two_Fe / 2;
                ln.population = (two_Fg + 1.0) / ground_degeneracy;
                ln.rel_strength = rel;
                ln.detuning = iso.iso_shift +
                              hyperfine_shift(iso.A_e, iso.B_e, two_I, two_Je, two_Fe) -
                              hyperfine_shift(iso.A_g, 0.0, two_I, two_Jg, two_Fg);
                iso_lines.push_back(ln);
                strength_sum += ln.population * rel;
            }
        }

        scale.kappa = 1.0 / strength_sum;
        for (auto& ln : iso_lines) {
            ln.weight = scale.abundance * ln.population * scale.kappa *
                        ln.rel_strength * scale.sigma0_area;
            table.lines.push_back(ln);
        }
        table.isotopes[iso.name] = scale;
    }

    // Shift so the requested reference line sits at zero detuning.
    LineLabel ref = parse_line_label(reference);
    double ref_detuning = 0.0;
    bool found = false;
    for (const auto& ln : table.lines) {
        if (ln.isotope == ref.isotope && ln.Fg == ref.Fg && ln.Fe == ref.Fe) {
            ref_detuning = ln.detuning;
            found = true;
            break;
        }
    }
    if (!found)
        throw ConfigError("reference line not in table: " + reference);
    for (auto& ln : table.lines)
        ln.detuning -= ref_detuning;

    std::sort(table.lines.begin(), table.lines.end(),
              [](const HyperfineTransition& a, const HyperfineTransition& b) {
                  return a.detuning < b.detuning;
              });
    return table;
}

TransitionTable transition_table(const std::string& reference) {
    return transition_table(constants(), reference);
}

} // namespace rbspec
