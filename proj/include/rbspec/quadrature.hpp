#pragma once

#include <functional>
#include <vector>

namespace rbspec {

struct QuadratureOptions {
    double rel_tol = 1e-8;  // relative to the first whole-interval estimate
    double abs_tol = 0.0;   // absolute floor on the error budget
    int max_depth = 40;     // levels of interval halving before giving up
};

// Adaptive Simpson integral of f over [a, b] (a may exceed b; the usual sign
// convention applies). Throws NumericError if the integrand returns a
// non-finite value or the refinement hits max_depth without meeting the
// tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& opts = {});

// Same, with the interval pre-split at the given interior points (kinks,
// near-singular features). Knots outside (a, b) are ignored.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const std::vector<double>& knots,
                        const QuadratureOptions& opts = {});

} // namespace rbspec
