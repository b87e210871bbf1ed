// rbspec: model, simulate and fit micro-cell rubidium D2 spectra.
//
// Subcommands: spectrum, odcurve, scan, eit, fit, fit-offset, constants.
// All temperatures take an explicit C or K suffix; lengths take um/mm/m.
// Exit codes: 0 success, 1 usage, 2 numeric/model error, 3 input-data error.

#include <CLI11.hpp>

#include "rbspec/atomic_data.hpp"
#include "rbspec/constants.hpp"
#include "rbspec/eit.hpp"
#include "rbspec/errors.hpp"
#include "rbspec/fit.hpp"
#include "rbspec/scanmodel.hpp"
#include "rbspec/spectrum.hpp"
#include "rbspec/trace_io.hpp"
#include "rbspec/vapor.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace {

using namespace rbspec;

// Usage-level problem after successful flag parsing (bad unit suffix etc).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_number(const std::string& text, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str())
        throw UsageError(what + ": cannot parse number in '" + text + "'");
    return v;
}

// Absolute temperature: "160C" -> 433.15 K, "460K" -> 460 K. A bare number
// is ambiguous and rejected.
double parse_temperature(const std::string& text, const std::string& what) {
    if (text.empty()) throw UsageError(what + ": empty temperature");
    const char suffix = text.back();
    const std::string num = text.substr(0, text.size() - 1);
    if (suffix == 'K' || suffix == 'k')
        return parse_number(num, what);
    if (suffix == 'C' || suffix == 'c')
        return parse_number(num, what) + 273.15;
    throw UsageError(what + ": temperature '" + text +
                     "' needs a C or K suffix (e.g. 160C, 433.15K)");
}

// Temperature difference: the C and K scales have the same step, so both
// suffixes mean the same thing here; the suffix is still required.
double parse_temperature_delta(const std::string& text,
                               const std::string& what) {
    if (text.empty()) throw UsageError(what + ": empty temperature offset");
    const char suffix = text.back();
    if (suffix != 'K' && suffix != 'k' && suffix != 'C' && suffix != 'c')
        throw UsageError(what + ": offset '" + text +
                         "' needs a C or K suffix (e.g. -7K)");
    return parse_number(text.substr(0, text.size() - 1), what);
}

// Length with um/mm/m suffix, returned in meters.
double parse_length(const std::string& text, const std::string& what) {
    auto ends_with = [&](const char* s) {
        const size_t n = std::string(s).size();
        return text.size() > n && text.compare(text.size() - n, n, s) == 0;
    };
    if (ends_with("um"))
        return parse_number(text.substr(0, text.size() - 2), what) * 1e-6;
    if (ends_with("mm"))
        return parse_number(text.substr(0, text.size() - 2), what) * 1e-3;
    if (text.size() > 1 && text.back() == 'm' &&
        text[text.size() - 2] != 'u' && text[text.size() - 2] != 'm')
        return parse_number(text.substr(0, text.size() - 1), what);
    throw UsageError(what + ": length '" + text +
                     "' needs a um, mm or m suffix");
}

Eigen::ArrayXd parse_grid(const std::string& text, const std::string& what) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ',' || c2 != ',' ||
        !(step > 0.0) || hi <= lo)
        throw UsageError(what + ": expected min,max,step with step > 0");
    const auto n = static_cast<Eigen::Index>(std::floor((hi - lo) / step)) + 1;
    return Eigen::ArrayXd::LinSpaced(n, lo, lo + step * (n - 1));
}

ChannelGeometry parse_geometry(const std::string& text) {
    double top = 0, bottom = 0, depth = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> top >> c1 >> bottom >> c2 >> depth) || c1 != ',' || c2 != ',')
        throw UsageError("--geometry: expected top,bottom,depth in um");
    ChannelGeometry g;
    g.top_width = top;
    g.bottom_width = bottom;
    g.depth = depth;
    return g;
}

// Waist flag value [um] plus its interpretation -> 1/e^2 radius [um].
double waist_to_radius(double value, const std::string& interpretation) {
    if (interpretation == "diameter") return 0.5 * value;
    if (interpretation == "radius") return value;
    if (interpretation == "fwhm")
        return value / std::sqrt(2.0 * std::log(2.0)); // intensity FWHM
    throw UsageError("--waist-means: expected diameter, radius or fwhm");
}

// Output stream that is either stdout ("-") or a file.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw DataError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

SpectrumTrace read_trace_from(const std::string& path) {
    if (path == "-") return read_trace_csv(std::cin);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    return read_trace_csv(in);
}

std::vector<OdMeasurement> read_od_from(const std::string& path) {
    if (path == "-") return read_od_csv(std::cin);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    return read_od_csv(in);
}

// ---------------------------------------------------------------- commands

struct SpectrumArgs {
    std::string res, cell, offset = "0K", length;
    std::string grid = "-4000,7000,2";
    std::string out = "-";
    double lorentz = 0.0;
    std::optional<double> density;
    std::optional<double> noise;
    std::optional<unsigned long long> seed;
};

int run_spectrum(const SpectrumArgs& a) {
    CellConditions cond;
    cond.reservoir_T = parse_temperature(a.res, "--res");
    cond.cell_T = a.cell.empty() ? cond.reservoir_T
                                 : parse_temperature(a.cell, "--cell");
    cond.temperature_offset = parse_temperature_delta(a.offset, "--offset");
    cond.path_length = parse_length(a.length, "--length");
    cond.lorentz_extra = a.lorentz;
    if (a.density) cond.density_override = *a.density;

    if (a.noise && !a.seed)
        throw UsageError("--noise requires --seed for reproducible output");

    const Eigen::ArrayXd grid = parse_grid(a.grid, "--grid");
    const TransitionTable table = transition_table();
    SpectrumTrace trace = transmission_spectrum(grid, table, cond);

    MetaList meta = {
        {"res_T_K", format_g12(cond.reservoir_T)},
        {"cell_T_K", format_g12(cond.cell_T)},
        {"offset_K", format_g12(cond.temperature_offset)},
        {"length_m", format_g12(cond.path_length)},
        {"lorentz_extra_MHz", format_g12(cond.lorentz_extra)},
    };
    if (a.density) meta.push_back({"density_m3", format_g12(*a.density)});
    if (a.noise) {
        std::mt19937_64 rng(*a.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Eigen::Index i = 0; i < trace.values.size(); ++i)
            trace.values[i] *= 1.0 + *a.noise * gauss(rng);
        meta.push_back({"noise_rel", format_g12(*a.noise)});
        meta.push_back({"seed", std::to_string(*a.seed)});
    }

    OutputTarget out(a.out);
    write_trace_csv(out.stream(), trace, meta);

    Eigen::Index imin = 0;
    trace.values.minCoeff(&imin);
    std::cerr << "spectrum: " << trace.values.size()
              << " points, min transmission "
              << format_g12(trace.values[imin]) << " at "
              << format_g12(trace.detunings[imin]) << " MHz\n";
    return 0;
}

struct OdCurveArgs {
    std::string res_min, res_max, res_step = "5K";
    std::string cell_delta = "0K", offset = "0K", length;
    std::string line = "Rb85:3-4";
    std::string out = "-";
    double lorentz = 0.0;
};

int run_odcurve(const OdCurveArgs& a) {
    const double lo = parse_temperature(a.res_min, "--res-min");
    const double hi = parse_temperature(a.res_max, "--res-max");
    const double step = parse_temperature_delta(a.res_step, "--res-step");
    if (!(step > 0.0) || hi < lo)
        throw UsageError("--res-min/--res-max/--res-step: bad range");

    CellConditions base;
    base.reservoir_T = lo;
    base.cell_T = lo + parse_temperature_delta(a.cell_delta, "--cell-delta");
    base.temperature_offset = parse_temperature_delta(a.offset, "--offset");
    base.path_length = parse_length(a.length, "--length");
    base.lorentz_extra = a.lorentz;

    std::vector<double> temps;
    for (double T = lo; T <= hi + 1e-9; T += step) temps.push_back(T);

    const TransitionTable table = transition_table();
    const double ref = table.line_detuning(a.line);
    const std::vector<OdPoint> points = od_curve(temps, ref, table, base);

    int skipped = 0;
    double od_lo = 0.0, od_hi = 0.0;
    bool any = false;
    for (const auto& pt : points) {
        if (!pt.ok) {
            ++skipped;
            std::cerr << "odcurve: warning: skipped T = "
                      << format_g12(pt.temperature) << " K: " << pt.error
                      << "\n";
            continue;
        }
        if (!any) {
            od_lo = od_hi = pt.od;
            any = true;
        } else {
            od_lo = std::min(od_lo, pt.od);
            od_hi = std::max(od_hi, pt.od);
        }
    }
    if (!any) throw DataError("odcurve: no temperature in the valid range");

    MetaList meta = {
        {"line", a.line},
        {"detuning_MHz", format_g12(ref)},
        {"cell_delta_K", format_g12(base.cell_T - base.reservoir_T)},
        {"offset_K", format_g12(base.temperature_offset)},
        {"length_m", format_g12(base.path_length)},
    };
    OutputTarget out(a.out);
    write_od_csv(out.stream(), points, meta);

    std::cerr << "odcurve: " << (points.size() - skipped) << " points ("
              << skipped << " skipped), OD range " << format_g12(od_lo)
              << " .. " << format_g12(od_hi) << "\n";
    return 0;
}

struct ScanArgs {
    std::string geometry = "40,20,10";
    double waist = 3.0;
    std::string waist_means = "diameter";
    std::string res = "130C", cell = "190C", offset = "0K";
    std::string line = "Rb87:2-3";
    double step = 0.5;
    double half_range = 35.0;
    std::string out = "-";
    double lorentz = 0.0;
};

int run_scan(const ScanArgs& a) {
    const ChannelGeometry g = parse_geometry(a.geometry);
    BeamProfile beam;
    beam.waist_radius = waist_to_radius(a.waist, a.waist_means);

    CellConditions cond;
    cond.reservoir_T = parse_temperature(a.res, "--res");
    cond.cell_T = parse_temperature(a.cell, "--cell");
    cond.temperature_offset = parse_temperature_delta(a.offset, "--offset");
    cond.path_length = 1e-6; // placeholder; the channel sets the real path
    cond.lorentz_extra = a.lorentz;

    if (!(a.step > 0.0) || !(a.half_range > 0.0))
        throw UsageError("--step/--range: must be positive");
    const auto n =
        static_cast<Eigen::Index>(std::floor(2.0 * a.half_range / a.step)) + 1;
    const Eigen::ArrayXd positions =
        Eigen::ArrayXd::LinSpaced(n, -a.half_range,
                                  -a.half_range + a.step * (n - 1));

    const TransitionTable table = transition_table();
    const Eigen::ArrayXd absorption =
        scan_absorption(positions, g, beam, cond, table, a.line);
    const Eigen::ArrayXd fluorescence =
        scan_fluorescence(positions, g, beam, cond, table);

    MetaList meta = {
        {"geometry_um", a.geometry},
        {"waist_radius_um", format_g12(beam.waist_radius)},
        {"res_T_K", format_g12(cond.reservoir_T)},
        {"cell_T_K", format_g12(cond.cell_T)},
        {"line", a.line},
    };
    OutputTarget out(a.out);
    write_scan_csv(out.stream(), positions, absorption, fluorescence, meta);

    std::cerr << "scan: " << positions.size()
              << " positions, peak absorption signal "
              << format_g12(absorption.maxCoeff()) << "\n";
    return 0;
}

struct EitArgs {
    double omega_c = 5.0;
    std::string temp = "460K";
    std::string geometry = "40,20,10";
    double waist = 3.0;
    std::string waist_means = "diameter";
    std::string grid = "-150,150,1";
    double probe_detuning = 0.0;
    double smoothing = 0.0;
    std::optional<double> transit;
    bool counter = false;
    std::string out = "-";
};

int run_eit(const EitArgs& a) {
    EITParams p = rb_ladder_params();
    p.omega_c = a.omega_c;
    p.T = parse_temperature(a.temp, "--temp");
    p.probe_detuning = a.probe_detuning;
    p.counter_propagating = a.counter;

    const ChannelGeometry g = parse_geometry(a.geometry);
    BeamProfile beam;
    beam.waist_radius = waist_to_radius(a.waist, a.waist_means);
    p.gamma_transit = a.transit ? *a.transit
                                : transit_rate(beam, g, p.T, p.mass);

    const Eigen::ArrayXd grid = parse_grid(a.grid, "--grid");
    const SpectrumTrace trace = coupling_scan(grid, p, a.smoothing);

    MetaList meta = {
        {"omega_c_MHz", format_g12(p.omega_c)},
        {"T_K", format_g12(p.T)},
        {"gamma_transit_MHz", format_g12(p.gamma_transit)},
        {"gamma_e_MHz", format_g12(p.gamma_e)},
        {"gamma_r_MHz", format_g12(p.gamma_r)},
        {"geometry", a.counter ? "counter" : "co"},
    };
    if (a.smoothing > 0.0)
        meta.push_back({"smoothing_MHz", format_g12(a.smoothing)});

    OutputTarget out(a.out);
    write_trace_csv(out.stream(), trace, meta);

    std::ostringstream extra;
    try {
        extra << ", FWHM " << format_g12(trace_fwhm(trace)) << " MHz";
    } catch (const DataError&) {
        extra << ", no resolvable peak";
    }
    std::cerr << "eit: peak transparency "
              << format_g12(trace.values.maxCoeff()) << extra.str() << "\n";
    return 0;
}

struct FitArgs {
    std::string in = "-";
    std::string res, cell, offset = "0K", length;
    std::string out = "-";
    int max_iter = 200;
    std::optional<double> init_scale, init_lorentz, init_offset,
        init_amplitude, init_baseline;
};

int run_fit(const FitArgs& a) {
    CellConditions cond;
    cond.reservoir_T = parse_temperature(a.res, "--res");
    cond.cell_T = a.cell.empty() ? cond.reservoir_T
                                 : parse_temperature(a.cell, "--cell");
    cond.temperature_offset = parse_temperature_delta(a.offset, "--offset");
    cond.path_length = parse_length(a.length, "--length");

    const SpectrumTrace data = read_trace_from(a.in);
    const TransitionTable table = transition_table();

    std::optional<FitInit> init;
    if (a.init_scale || a.init_lorentz || a.init_offset || a.init_amplitude ||
        a.init_baseline) {
        FitInit fi;
        if (a.init_scale) fi.density_scale = *a.init_scale;
        if (a.init_lorentz) fi.lorentz_extra = *a.init_lorentz;
        if (a.init_offset) fi.frequency_offset = *a.init_offset;
        if (a.init_amplitude) fi.amplitude = *a.init_amplitude;
        if (a.init_baseline) fi.baseline = *a.init_baseline;
        init = fi;
    }

    FitOptions opts;
    opts.max_iterations = a.max_iter;
    const FitResult result = fit_spectrum(data, table, cond, init, opts);

    OutputTarget out(a.out);
    out.stream() << fit_result_json(result);

    std::cerr << "fit: converged in " << result.n_iterations
              << " iterations, od_ref " << format_g12(result.od_ref) << "\n";
    return 0;
}

struct FitOffsetArgs {
    std::string in = "-";
    std::string cell_delta = "0K", length;
    std::string line = "Rb85:3-4";
    std::string out = "-";
    double lorentz = 0.0;
};

int run_fit_offset(const FitOffsetArgs& a) {
    const std::vector<OdMeasurement> points = read_od_from(a.in);

    CellConditions base;
    base.reservoir_T = points.front().reservoir_T;
    base.cell_T = base.reservoir_T +
                  parse_temperature_delta(a.cell_delta, "--cell-delta");
    base.path_length = parse_length(a.length, "--length");
    base.lorentz_extra = a.lorentz;

    const TransitionTable table = transition_table();
    const double ref = table.line_detuning(a.line);
    const TemperatureOffsetResult res =
        fit_temperature_offset(points, ref, table, base);

    OutputTarget out(a.out);
    out.stream() << "{\n  \"delta_T_K\": " << format_g12(res.delta_T)
                 << ",\n  \"uncertainty_K\": " << format_g12(res.uncertainty)
                 << ",\n  \"converged\": " << (res.converged ? "true" : "false")
                 << ",\n  \"n_iterations\": " << res.n_iterations << "\n}\n";

    std::cerr << "fit-offset: delta_T = " << format_g12(res.delta_T) << " +- "
              << format_g12(res.uncertainty) << " K\n";
    return 0;
}

int run_constants(const std::string& out_path) {
    const ConstantsTable& table = constants();
    OutputTarget out(out_path);
    out.stream() << "# constants loaded from " << table.source_path() << "\n";
    for (const auto& key : table.keys()) {
        out.stream() << key << " " << format_g12(table.get(key));
        const std::string note = table.note(key);
        if (!note.empty()) out.stream() << "  # " << note;
        out.stream() << "\n";
    }
    std::cerr << "constants: " << table.keys().size() << " entries from "
              << table.source_path() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Micro-cell rubidium D2 spectroscopy: simulate and fit "
                 "absorption spectra, OD curves, channel scans and ladder "
                 "EIT lineshapes"};
    app.require_subcommand(1);

    std::string constants_path;
    app.add_option("--constants", constants_path,
                   "Constants file (overrides RBSPEC_CONSTANTS and the "
                   "built-in default)");

    SpectrumArgs sa;
    auto* sp = app.add_subcommand("spectrum",
                                  "Simulate a transmission spectrum");
    sp->add_option("--res", sa.res, "Reservoir temperature (e.g. 160C)")
        ->required();
    sp->add_option("--cell", sa.cell, "Cell temperature (default: --res)");
    sp->add_option("--offset", sa.offset,
                   "Thermometer offset applied to --res for density (e.g. -7K)");
    sp->add_option("--length", sa.length, "Optical path length (e.g. 10um)")
        ->required();
    sp->add_option("--lorentz", sa.lorentz,
                   "Extra homogeneous broadening FWHM [MHz]");
    sp->add_option("--density", sa.density,
                   "Density override [m^-3], bypasses the vapor model");
    sp->add_option("--grid", sa.grid, "Detuning grid min,max,step [MHz]")->capture_default_str();
    sp->add_option("--noise", sa.noise,
                   "Relative multiplicative Gaussian noise (needs --seed)");
    sp->add_option("--seed", sa.seed, "Noise RNG seed");
    sp->add_option("--out", sa.out, "Output CSV path or - for stdout")->capture_default_str();

    OdCurveArgs oa;
    auto* oc = app.add_subcommand("odcurve",
                                  "Optical depth vs reservoir temperature");
    oc->add_option("--res-min", oa.res_min, "Lowest reservoir temperature")
        ->required();
    oc->add_option("--res-max", oa.res_max, "Highest reservoir temperature")
        ->required();
    oc->add_option("--res-step", oa.res_step, "Temperature step (e.g. 5K)")->capture_default_str();
    oc->add_option("--cell-delta", oa.cell_delta,
                   "Cell minus reservoir temperature (e.g. 10K)")->capture_default_str();
    oc->add_option("--offset", oa.offset, "Thermometer offset (e.g. -7K)")->capture_default_str();
    oc->add_option("--length", oa.length, "Optical path length")->required();
    oc->add_option("--lorentz", oa.lorentz,
                   "Extra homogeneous broadening FWHM [MHz]");
    oc->add_option("--line", oa.line, "Reference line label")->capture_default_str();
    oc->add_option("--out", oa.out, "Output CSV path or -")->capture_default_str();

    ScanArgs sc;
    auto* sn = app.add_subcommand("scan",
                                  "Scan the channel across the probe beam");
    sn->add_option("--geometry", sc.geometry,
                   "Channel top,bottom,depth [um]")->capture_default_str();
    sn->add_option("--waist", sc.waist, "Beam size [um]")->capture_default_str();
    sn->add_option("--waist-means", sc.waist_means,
                   "Interpretation of --waist: diameter|radius|fwhm")->capture_default_str();
    sn->add_option("--res", sc.res, "Reservoir temperature")->capture_default_str();
    sn->add_option("--cell", sc.cell, "Cell temperature")->capture_default_str();
    sn->add_option("--offset", sc.offset, "Thermometer offset")->capture_default_str();
    sn->add_option("--lorentz", sc.lorentz,
                   "Extra homogeneous broadening FWHM [MHz]");
    sn->add_option("--line", sc.line, "Line group for peak absorption")->capture_default_str();
    sn->add_option("--step", sc.step, "Position step [um]")->capture_default_str();
    sn->add_option("--range", sc.half_range, "Half scan range [um]")->capture_default_str();
    sn->add_option("--out", sc.out, "Output CSV path or -")->capture_default_str();

    EitArgs ea;
    auto* ei = app.add_subcommand("eit",
                                  "Ladder EIT coupling-scan lineshape");
    ei->add_option("--omega-c", ea.omega_c, "Coupling Rabi frequency [MHz]")->capture_default_str();
    ei->add_option("--temp", ea.temp, "Vapor temperature")->capture_default_str();
    ei->add_option("--geometry", ea.geometry, "Channel top,bottom,depth [um]")->capture_default_str();
    ei->add_option("--waist", ea.waist, "Beam size [um]")->capture_default_str();
    ei->add_option("--waist-means", ea.waist_means,
                   "Interpretation of --waist")->capture_default_str();
    ei->add_option("--grid", ea.grid, "Coupling detuning grid min,max,step")->capture_default_str();
    ei->add_option("--probe-detuning", ea.probe_detuning,
                   "Probe detuning [MHz]");
    ei->add_option("--smoothing", ea.smoothing,
                   "Gaussian smoothing FWHM [MHz]");
    ei->add_option("--transit", ea.transit,
                   "Transit dephasing override [MHz]");
    ei->add_flag("--counter", ea.counter, "Counter-propagating beams");
    ei->add_option("--out", ea.out, "Output CSV path or -")->capture_default_str();

    FitArgs fa;
    auto* ft = app.add_subcommand("fit",
                                  "Fit a transmission spectrum CSV");
    ft->add_option("--in", fa.in, "Input CSV path or - for stdin")->capture_default_str();
    ft->add_option("--res", fa.res, "Reservoir temperature of the data")
        ->required();
    ft->add_option("--cell", fa.cell, "Cell temperature (default: --res)");
    ft->add_option("--offset", fa.offset, "Thermometer offset")->capture_default_str();
    ft->add_option("--length", fa.length, "Optical path length")->required();
    ft->add_option("--max-iter", fa.max_iter, "Iteration limit")->capture_default_str();
    ft->add_option("--init-scale", fa.init_scale, "Initial density scale");
    ft->add_option("--init-lorentz", fa.init_lorentz,
                   "Initial extra Lorentzian FWHM [MHz]");
    ft->add_option("--init-offset", fa.init_offset,
                   "Initial frequency offset [MHz]");
    ft->add_option("--init-amplitude", fa.init_amplitude, "Initial amplitude");
    ft->add_option("--init-baseline", fa.init_baseline, "Initial baseline");
    ft->add_option("--out", fa.out, "Output JSON path or -")->capture_default_str();

    FitOffsetArgs fo;
    auto* fof = app.add_subcommand(
        "fit-offset", "Calibrate the thermometer offset from OD points");
    fof->add_option("--in", fo.in, "Input CSV (reservoir_T_K,od) or -")->capture_default_str();
    fof->add_option("--cell-delta", fo.cell_delta,
                    "Cell minus reservoir temperature")->capture_default_str();
    fof->add_option("--length", fo.length, "Optical path length")->required();
    fof->add_option("--lorentz", fo.lorentz,
                    "Extra homogeneous broadening FWHM [MHz]");
    fof->add_option("--line", fo.line, "Reference line label")->capture_default_str();
    fof->add_option("--out", fo.out, "Output JSON path or -")->capture_default_str();

    std::string co_out = "-";
    auto* co = app.add_subcommand("constants",
                                  "Dump the loaded constants table");
    co->add_option("--out", co_out, "Output path or -")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (!constants_path.empty()) load_constants(constants_path);

        if (sp->parsed()) return run_spectrum(sa);
        if (oc->parsed()) return run_odcurve(oa);
        if (sn->parsed()) return run_scan(sc);
        if (ei->parsed()) return run_eit(ea);
        if (ft->parsed()) return run_fit(fa);
        if (fof->parsed()) return run_fit_offset(fo);
        if (co->parsed()) return run_constants(co_out);
        std::cerr << "error: no command selected\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 2;
    } catch (const RangeError& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
