#include "rbspec/quadrature.hpp"
#include "rbspec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rbspec {

namespace {

double eval_checked(const std::function<double(double)>& f, double x) {
    double v = f(x);
    if (!std::isfinite(v))
        throw NumericError("adaptive_simpson: integrand not finite at x = " +
                           std::to_string(x));
    return v;
}

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double recurse(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double whole, double eps,
               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval_checked(f, lm);
    const double frm = eval_checked(f, rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;

    if (std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw NumericError("adaptive_simpson: max refinement depth reached");
    return recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double integrate_segment(const std::function<double(double)>& f, double a,
                         double b, double eps, int max_depth) {
    const double fa = eval_checked(f, a);
    const double fm = eval_checked(f, 0.5 * (a + b));
    const double fb = eval_checked(f, b);
    const double whole = simpson(a, b, fa, fm, fb);
    return recurse(f, a, b, fa, fm, fb, whole, eps, max_depth);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& opts) {
    return adaptive_simpson(f, a, b, {}, opts);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const std::vector<double>& knots,
                        const QuadratureOptions& opts) {
    if (a == b) return 0.0;
    const double sign = (a < b) ? 1.0 : -1.0;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);

    std::vector<double> pts;
    pts.push_back(lo);
    for (double k : knots)
        if (k > lo && k < hi) pts.push_back(k);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    // Rough whole-domain estimate to scale the relative tolerance.
    double rough = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double fa = eval_checked(f, pts[i]);
        const double fm = eval_checked(f, 0.5 * (pts[i] + pts[i + 1]));
        const double fb = eval_checked(f, pts[i + 1]);
        rough += simpson(pts[i], pts[i + 1], fa, fm, fb);
    }
    const double eps_total =
        std::max(opts.abs_tol, opts.rel_tol * std::max(std::abs(rough),
                                                       1e-300));

    double total = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double frac = (pts[i + 1] - pts[i]) / (hi - lo);
        total += integrate_segment(f, pts[i], pts[i + 1], eps_total * frac,
                                   opts.max_depth);
    }
    return sign * total;
}

} // namespace rbspec
