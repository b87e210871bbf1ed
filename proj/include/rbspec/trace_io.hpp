#pragma once

#include "rbspec/fit.hpp"
#include "rbspec/spectrum.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rbspec {

// Key=value pairs carried in the CSV comment header, in writing order.
using MetaList = std::vector<std::pair<std::string, std::string>>;

std::string trace_kind_name(TraceKind kind);
TraceKind trace_kind_from_name(const std::string& name);

// Fixed-format float used by every writer: %.12g, so identical inputs give
// byte-identical files.
std::string format_g12(double v);

// Two-column trace CSV:
//   # kind=transmission key=value ...
//   detuning_MHz,value
//   ...
void write_trace_csv(std::ostream& out, const SpectrumTrace& trace,
                     const MetaList& meta = {});

// Parse a trace CSV (as written above). Lines starting with '#' other than
// the kind header are ignored; a missing kind header defaults to
// transmission. Throws DataError on malformed rows.
SpectrumTrace read_trace_csv(std::istream& in);

// Channel-scan CSV: position_um,absorption_signal,fluorescence_signal.
void write_scan_csv(std::ostream& out, const Eigen::ArrayXd& positions,
                    const Eigen::ArrayXd& absorption,
                    const Eigen::ArrayXd& fluorescence,
                    const MetaList& meta = {});

// Optical-depth curve CSV: reservoir_T_K,optical_depth. Only rows for
// points with ok = true are written.
void write_od_csv(std::ostream& out, const std::vector<OdPoint>& points,
                  const MetaList& meta = {});

// Parse (reservoir_T_K, od) rows for the offset calibration.
std::vector<OdMeasurement> read_od_csv(std::istream& in);

// Flat JSON document for a fit outcome: parameter values at the top level,
// "<name>_sigma" for the uncertainties, plus od_ref, residual_norm,
// converged, n_iterations, low_confidence_init.
std::string fit_result_json(const FitResult& result);

} // namespace rbspec
