#include "rbspec/trace_io.hpp"
#include "rbspec/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace rbspec {

std::string trace_kind_name(TraceKind kind) {
    switch (kind) {
        case TraceKind::Transmission: return "transmission";
        case TraceKind::OpticalDepth: return "optical_depth";
        case TraceKind::AbsorptionCoefficient: return "absorption_coefficient";
        case TraceKind::Fluorescence: return "fluorescence";
        case TraceKind::EitTransparency: return "eit_transparency";
    }
    throw ConfigError("unknown trace kind enumerator");
}

TraceKind trace_kind_from_name(const std::string& name) {
    if (name == "transmission") return TraceKind::Transmission;
    if (name == "optical_depth") return TraceKind::OpticalDepth;
    if (name == "absorption_coefficient") return TraceKind::AbsorptionCoefficient;
    if (name == "fluorescence") return TraceKind::Fluorescence;
    if (name == "eit_transparency") return TraceKind::EitTransparency;
    throw ConfigError("unknown trace kind name: " + name);
}

std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

void write_meta_line(std::ostream& out, const std::string& kind,
                     const MetaList& meta) {
    out << "# kind=" << kind;
    for (const auto& [k, v] : meta) out << " " << k << "=" << v;
    out << "\n";
}

// Strict double parse of one CSV cell.
double parse_cell(const std::string& cell, int lineno) {
    const char* s = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    while (end && *end == ' ') ++end;
    if (end == s || (end && *end != '\0')) {
        std::ostringstream msg;
        msg << "csv line " << lineno << ": bad numeric cell '" << cell << "'";
        throw DataError(msg.str());
    }
    return v;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

bool looks_numeric(const std::string& line) {
    for (char c : line)
        if (c != ' ' && c != '\t')
            return (c == '+' || c == '-' || c == '.' || (c >= '0' && c <= '9'));
    return false;
}

} // namespace

void write_trace_csv(std::ostream& out, const SpectrumTrace& trace,
                     const MetaList& meta) {
    if (trace.detunings.size() != trace.values.size())
        throw DataError("write_trace_csv: grid/value size mismatch");
    write_meta_line(out, trace_kind_name(trace.kind), meta);
    out << "detuning_MHz,value\n";
    for (Eigen::Index i = 0; i < trace.detunings.size(); ++i)
        out << format_g12(trace.detunings[i]) << ","
            << format_g12(trace.values[i]) << "\n";
}

SpectrumTrace read_trace_csv(std::istream& in) {
    SpectrumTrace trace;
    trace.kind = TraceKind::Transmission;

    std::vector<double> xs, ys;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok)
                if (tok.rfind("kind=", 0) == 0)
                    trace.kind = trace_kind_from_name(tok.substr(5));
            continue;
        }
        if (!looks_numeric(line)) continue; // column-name header
        auto cells = split_cells(line);
        if (cells.size() != 2) {
            std::ostringstream msg;
            msg << "csv line " << lineno << ": expected 2 columns, got "
                << cells.size();
            throw DataError(msg.str());
        }
        xs.push_back(parse_cell(cells[0], lineno));
        ys.push_back(parse_cell(cells[1], lineno));
    }
    if (xs.empty()) throw DataError("trace csv contains no data rows");

    trace.detunings = Eigen::Map<Eigen::ArrayXd>(xs.data(), xs.size());
    trace.values = Eigen::Map<Eigen::ArrayXd>(ys.data(), ys.size());
    return trace;
}

void write_scan_csv(std::ostream& out, const Eigen::ArrayXd& positions,
                    const Eigen::ArrayXd& absorption,
                    const Eigen::ArrayXd& fluorescence, const MetaList& meta) {
    if (positions.size() != absorption.size() ||
        positions.size() != fluorescence.size())
        throw DataError("write_scan_csv: column size mismatch");
    write_meta_line(out, "scan", meta);
    out << "position_um,absorption_signal,fluorescence_signal\n";
    for (Eigen::Index i = 0; i < positions.size(); ++i)
        out << format_g12(positions[i]) << "," << format_g12(absorption[i])
            << "," << format_g12(fluorescence[i]) << "\n";
}

void write_od_csv(std::ostream& out, const std::vector<OdPoint>& points,
                  const MetaList& meta) {
    write_meta_line(out, "od_curve", meta);
    out << "reservoir_T_K,optical_depth\n";
    for (const auto& pt : points)
        if (pt.ok)
            out << format_g12(pt.temperature) << "," << format_g12(pt.od)
                << "\n";
}

std::vector<OdMeasurement> read_od_csv(std::istream& in) {
    std::vector<OdMeasurement> points;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (!looks_numeric(line)) continue;
        auto cells = split_cells(line);
        if (cells.size() != 2) {
            std::ostringstream msg;
            msg << "csv line " << lineno << ": expected 2 columns, got "
                << cells.size();
            throw DataError(msg.str());
        }
        OdMeasurement m;
        m.reservoir_T = parse_cell(cells[0], lineno);
        m.od = parse_cell(cells[1], lineno);
        points.push_back(m);
    }
    if (points.empty()) throw DataError("od csv contains no data rows");
    return points;
}

std::string fit_result_json(const FitResult& result) {
    nlohmann::ordered_json doc;
    for (const auto& [k, v] : result.params) doc[k] = v;
    for (const auto& [k, v] : result.uncertainties) doc[k + "_sigma"] = v;
    doc["od_ref"] = result.od_ref;
    doc["residual_norm"] = result.residual_norm;
    doc["converged"] = result.converged;
    doc["n_iterations"] = result.n_iterations;
    doc["low_confidence_init"] = result.low_confidence_init;
    return doc.dump(2) + "\n";
}

} // namespace rbspec
