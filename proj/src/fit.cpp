#include "rbspec/fit.hpp"
#include "rbspec/lineshape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rbspec {

namespace {

constexpr int kNumParams = 5; // u=log(scale), lorentz_extra, offset, A, b
constexpr double kLorentzMax = 500.0; // [MHz] physical ceiling for extra width

// Per-line description resolved against conditions once per fit.
struct LineTerm {
    double detuning;    // [MHz]
    double weight;      // [m^2 MHz]
    double sigma_gauss; // [MHz]
    double gamma_nat;   // [MHz] natural FWHM
};

struct ModelContext {
    std::vector<LineTerm> lines;
    double n0 = 0.0;          // vapor-model density [m^-3]
    double L = 0.0;           // path length [m]
    double od_ref_detuning = 0.0; // model-frame detuning of 85Rb F=3 -> F'=4
};

ModelContext make_context(const TransitionTable& table,
                          const CellConditions& cond) {
    cond.validate();
    ModelContext ctx;
    ctx.n0 = cell_density(cond);
    ctx.L = cond.path_length;
    ctx.od_ref_detuning = table.line_detuning("Rb85:3-4");
    for (const auto& ln : table.lines) {
        const auto& iso = table.isotopes.at(ln.isotope);
        LineTerm t;
        t.detuning = ln.detuning;
        t.weight = ln.weight;
        t.sigma_gauss =
            fwhm_to_sigma(doppler_fwhm(cond.cell_T, iso.mass, iso.lambda));
        t.gamma_nat = iso.gamma_nat;
        ctx.lines.push_back(t);
    }
    return ctx;
}

// alpha and its partials wrt lorentz_extra and detuning, at one model-frame
// detuning. The Lorentzian HWHM is (gamma_nat + lorentz_extra)/2, hence the
// factor 1/2 on the width derivative.
struct AlphaDerivs {
    double alpha;   // [1/m]
    double d_gx;    // d alpha / d lorentz_extra [1/(m MHz)]
    double d_delta; // d alpha / d detuning [1/(m MHz)]
};

AlphaDerivs alpha_derivs(double delta, const ModelContext& ctx, double n,
                         double gx) {
    AlphaDerivs out{0.0, 0.0, 0.0};
    for (const auto& ln : ctx.lines) {
        VoigtParams p;
        p.sigma_gauss = ln.sigma_gauss;
        p.gamma_lorentz = 0.5 * (ln.gamma_nat + gx);
        const VoigtDerivatives d = voigt_derivatives(delta - ln.detuning, p);
        out.alpha += ln.weight * d.value;
        out.d_gx += ln.weight * 0.5 * d.d_gamma;
        out.d_delta += ln.weight * d.d_delta;
    }
    out.alpha *= n;
    out.d_gx *= n;
    out.d_delta *= n;
    return out;
}

double alpha_only(double delta, const ModelContext& ctx, double n, double gx) {
    double a = 0.0;
    for (const auto& ln : ctx.lines) {
        VoigtParams p;
        p.sigma_gauss = ln.sigma_gauss;
        p.gamma_lorentz = 0.5 * (ln.gamma_nat + gx);
        a += ln.weight * voigt(delta - ln.detuning, p);
    }
    return n * a;
}

// Model transmission and Jacobian over the data grid. theta layout:
// [0]=u (log density scale), [1]=lorentz_extra, [2]=frequency_offset,
// [3]=amplitude, [4]=baseline.
void evaluate_model(const Eigen::ArrayXd& detunings, const ModelContext& ctx,
                    const Eigen::VectorXd& theta, Eigen::VectorXd& model,
                    Eigen::MatrixXd* jac) {
    const double n = std::exp(theta[0]) * ctx.n0;
    const double gx = theta[1];
    const double off = theta[2];
    const double A = theta[3];
    const double b = theta[4];

    const Eigen::Index N = detunings.size();
    model.resize(N);
    if (jac) jac->resize(N, kNumParams);

    for (Eigen::Index i = 0; i < N; ++i) {
        const double delta = detunings[i] - off;
        if (jac) {
            const AlphaDerivs d = alpha_derivs(delta, ctx, n, gx);
            const double E = std::exp(-ctx.L * d.alpha);
            model[i] = b + A * E;
            (*jac)(i, 0) = -A * E * ctx.L * d.alpha;          // d/du
            (*jac)(i, 1) = -A * E * ctx.L * d.d_gx;           // d/d gx
            (*jac)(i, 2) = A * E * ctx.L * d.d_delta;         // d/d offset
            (*jac)(i, 3) = E;                                  // d/dA
            (*jac)(i, 4) = 1.0;                                // d/db
        } else {
            const double E = std::exp(-ctx.L * alpha_only(delta, ctx, n, gx));
            model[i] = b + A * E;
        }
    }
}

FitResult pack_result(const Eigen::VectorXd& theta, const ModelContext& ctx,
                      const Eigen::VectorXd& residual,
                      const Eigen::MatrixXd& jac,
                      const std::vector<double>& objective_trace,
                      bool converged, int n_iterations, bool low_confidence) {
    FitResult res;
    const double scale = std::exp(theta[0]);
    res.params["density_scale"] = scale;
    res.params["lorentz_extra"] = theta[1];
    res.params["frequency_offset"] = theta[2];
    res.params["amplitude"] = theta[3];
    res.params["baseline"] = theta[4];
    res.residual_norm = residual.norm();
    res.converged = converged;
    res.n_iterations = n_iterations;
    res.objective_trace = objective_trace;
    res.low_confidence_init = low_confidence;

    res.od_ref = ctx.L * alpha_only(ctx.od_ref_detuning, ctx,
                                    scale * ctx.n0, theta[1]);

    // Local 1-sigma estimates from the normal matrix at the optimum.
    const Eigen::Index N = residual.size();
    const double dof = static_cast<double>(N - kNumParams);
    const double s2 = residual.squaredNorm() / std::max(1.0, dof);
    Eigen::MatrixXd JtJ = jac.transpose() * jac;
    Eigen::MatrixXd cov =
        s2 * JtJ.ldlt().solve(Eigen::MatrixXd::Identity(kNumParams, kNumParams));
    auto sigma = [&](int k) {
        const double v = cov(k, k);
        return v > 0.0 ? std::sqrt(v) : 0.0;
    };
    res.uncertainties["density_scale"] = scale * sigma(0);
    res.uncertainties["lorentz_extra"] = sigma(1);
    res.uncertainties["frequency_offset"] = sigma(2);
    res.uncertainties["amplitude"] = sigma(3);
    res.uncertainties["baseline"] = sigma(4);
    return res;
}

// Centered moving average, window halfwidth 2 (5 points), shrinking at ends.
Eigen::ArrayXd smooth5(const Eigen::ArrayXd& v) {
    const Eigen::Index n = v.size();
    Eigen::ArrayXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - 2);
        const Eigen::Index hi = std::min(n - 1, i + 2);
        out[i] = v.segment(lo, hi - lo + 1).mean();
    }
    return out;
}

double percentile(Eigen::ArrayXd v, double q) {
    std::sort(v.data(), v.data() + v.size());
    const double pos = q * (v.size() - 1);
    const Eigen::Index k = static_cast<Eigen::Index>(pos);
    if (k + 1 >= v.size()) return v[v.size() - 1];
    const double f = pos - k;
    return v[k] * (1.0 - f) + v[k + 1] * f;
}

// Detuning of the deepest model dip for the lines of one hyperfine group.
double expected_group_dip(const TransitionTable& table,
                          const CellConditions& cond,
                          const std::string& isotope, int Fg) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& ln : table.lines)
        if (ln.isotope == isotope && ln.Fg == Fg) {
            lo = std::min(lo, ln.detuning);
            hi = std::max(hi, ln.detuning);
        }
    if (!(lo <= hi))
        throw ConfigError("peak_find_init: group has no lines: " + isotope);

    TransitionTable group = table.restrict_to(lo - 600.0, hi + 600.0);
    // Keep only the group itself; neighbours within the window would skew
    // the dip position.
    group.lines.erase(std::remove_if(group.lines.begin(), group.lines.end(),
                                     [&](const HyperfineTransition& ln) {
                                         return ln.isotope != isotope ||
                                                ln.Fg != Fg;
                                     }),
                      group.lines.end());

    double best_x = lo, best = -1.0;
    for (double x = lo - 600.0; x <= hi + 600.0; x += 2.0) {
        const double a = absorption_at(x, group, cond);
        if (a > best) {
            best = a;
            best_x = x;
        }
    }
    return best_x;
}

} // namespace

FitInit peak_find_init(const SpectrumTrace& data, const TransitionTable& table,
                       const CellConditions& cond) {
    if (data.detunings.size() != data.values.size() || data.values.size() < 10)
        throw DataError("peak_find_init: trace too short");

    const Eigen::ArrayXd smooth = smooth5(data.values);
    const Eigen::Index n = smooth.size();

    FitInit init;
    init.amplitude = percentile(smooth, 0.98);
    init.baseline = 0.0;
    if (!(init.amplitude > 0.0)) init.amplitude = 1.0;

    // Local minima that dip visibly below the off-resonance level.
    struct Dip {
        Eigen::Index idx;
        double value;
    };
    std::vector<Dip> dips;
    for (Eigen::Index i = 3; i + 3 < n; ++i) {
        bool is_min = true;
        for (Eigen::Index k = i - 3; k <= i + 3; ++k)
            if (smooth[k] < smooth[i]) {
                is_min = false;
                break;
            }
        if (!is_min) continue;
        if (smooth[i] > 0.995 * init.amplitude) continue;
        if (!dips.empty() && i - dips.back().idx < 5 &&
            smooth[i] >= dips.back().value)
            continue; // plateau duplicate
        dips.push_back({i, smooth[i]});
    }
    std::sort(dips.begin(), dips.end(),
              [](const Dip& a, const Dip& b) { return a.value < b.value; });

    // Pair of deepest dips whose spacing matches the 87Rb Fg=2 / 85Rb Fg=3
    // group separation (~1.1 GHz).
    bool paired = false;
    double obs_lo = 0.0, obs_hi = 0.0;
    for (size_t a = 0; a < dips.size() && !paired; ++a) {
        for (size_t b = a + 1; b < dips.size(); ++b) {
            const double xa = data.detunings[dips[a].idx];
            const double xb = data.detunings[dips[b].idx];
            const double gap = std::abs(xa - xb);
            if (gap >= 800.0 && gap <= 1500.0) {
                obs_lo = std::min(xa, xb);
                obs_hi = std::max(xa, xb);
                paired = true;
                break;
            }
        }
    }

    if (paired) {
        const double exp87 = expected_group_dip(table, cond, "Rb87", 2);
        const double exp85 = expected_group_dip(table, cond, "Rb85", 3);
        init.frequency_offset =
            0.5 * ((obs_lo - exp87) + (obs_hi - exp85));

        // Density scale from the depth of the 85Rb dip.
        Eigen::Index i85 = 0;
        double bestgap = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double g = std::abs(data.detunings[i] - obs_hi);
            if (g < bestgap) {
                bestgap = g;
                i85 = i;
            }
        }
        const double t_obs = std::max(1e-12, smooth[i85] / init.amplitude);
        const double od_obs = -std::log(std::min(1.0, t_obs));
        const double od_model =
            absorption_at(exp85, table, cond) * cond.path_length;
        if (od_obs > 0.0 && od_model > 0.0) {
            double u = std::log(od_obs / od_model);
            u = std::clamp(u, -20.0, 20.0);
            init.density_scale = std::exp(u);
        }
        return init;
    }

    // Fallback: absorption-weighted centroid against the unshifted model.
    init.low_confidence = true;
    double wsum = 0.0, xsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = std::max(0.0, init.amplitude - smooth[i]);
        wsum += w;
        xsum += w * data.detunings[i];
    }
    if (wsum > 0.0) {
        const double centroid_obs = xsum / wsum;
        Eigen::VectorXd model;
        ModelContext ctx = make_context(table, cond);
        Eigen::VectorXd theta(kNumParams);
        theta << 0.0, 0.0, 0.0, 1.0, 0.0;
        evaluate_model(data.detunings, ctx, theta, model, nullptr);
        double mw = 0.0, mx = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double w = std::max(0.0, 1.0 - model[i]);
            mw += w;
            mx += w * data.detunings[i];
        }
        if (mw > 0.0) init.frequency_offset = centroid_obs - mx / mw;
    }
    return init;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> fit_model_with_jacobian(
    const Eigen::ArrayXd& detunings, const TransitionTable& table,
    const CellConditions& cond, const FitInit& at) {
    if (!(at.density_scale > 0.0))
        throw RangeError("fit_model_with_jacobian: density scale must be "
                         "positive",
                         at.density_scale, 0.0,
                         std::numeric_limits<double>::infinity());
    if (at.lorentz_extra < 0.0)
        throw RangeError("fit_model_with_jacobian: extra Lorentzian width "
                         "must be >= 0",
                         at.lorentz_extra, 0.0, kLorentzMax);
    ModelContext ctx = make_context(table, cond);
    Eigen::VectorXd theta(kNumParams);
    theta << std::log(at.density_scale), at.lorentz_extra,
        at.frequency_offset, at.amplitude, at.baseline;
    Eigen::VectorXd model;
    Eigen::MatrixXd jac;
    evaluate_model(detunings, ctx, theta, model, &jac);
    return {std::move(model), std::move(jac)};
}

FitResult fit_spectrum(const SpectrumTrace& data, const TransitionTable& table,
                       const CellConditions& cond,
                       const std::optional<FitInit>& init,
                       const FitOptions& opts) {
    if (data.kind != TraceKind::Transmission)
        throw DataError("fit_spectrum: input trace must be a transmission spectrum");
    const Eigen::Index N = data.values.size();
    if (data.detunings.size() != N)
        throw DataError("fit_spectrum: grid/value size mismatch");
    if (N < 50)
        throw DataError("fit_spectrum: need at least 50 points");
    const double span =
        data.detunings.maxCoeff() - data.detunings.minCoeff();
    if (span < 1200.0)
        throw DataError("fit_spectrum: detuning span too short to cover two "
                        "hyperfine groups");

    const double vmax = data.values.maxCoeff();
    const double vmin = data.values.minCoeff();
    if (!(vmax > 0.0) || (vmax - vmin) / std::abs(vmax) < 0.005)
        throw DataError("fit_spectrum: trace is flat; absorption features "
                        "are not identifiable");

    const FitInit start = init ? *init : peak_find_init(data, table, cond);
    if (!(start.density_scale > 0.0))
        throw DataError("fit_spectrum: initial density scale must be positive");

    ModelContext ctx = make_context(table, cond);

    Eigen::VectorXd theta(kNumParams);
    theta << std::log(start.density_scale),
        std::clamp(start.lorentz_extra, 0.0, kLorentzMax),
        start.frequency_offset, start.amplitude, start.baseline;

    const Eigen::VectorXd y = data.values.matrix();
    Eigen::VectorXd model;
    Eigen::MatrixXd jac;
    evaluate_model(data.detunings, ctx, theta, model, &jac);
    Eigen::VectorXd residual = model - y;
    double obj = residual.squaredNorm();

    std::vector<double> trace;
    trace.push_back(obj);

    double lambda = opts.lambda0;
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        Eigen::VectorXd grad = jac.transpose() * residual;

        // Box constraint on the extra Lorentzian width: when the parameter
        // sits on a bound and the gradient pushes outward, that direction is
        // frozen for this step and excluded from the optimality test
        // (first-order optimality on the feasible set).
        const bool frozen = (theta[1] <= 0.0 && grad[1] > 0.0) ||
                            (theta[1] >= kLorentzMax && grad[1] < 0.0);
        if (frozen) grad[1] = 0.0;

        if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            converged = true;
            break;
        }

        Eigen::MatrixXd H = jac.transpose() * jac;
        if (frozen) {
            H.row(1).setZero();
            H.col(1).setZero();
            H(1, 1) = 1.0;
        }
        for (int k = 0; k < kNumParams; ++k)
            H(k, k) += lambda * std::max(H(k, k), 1e-30);
        const Eigen::VectorXd step = H.ldlt().solve(-grad);
        if (!step.allFinite())
            throw NumericError("fit_spectrum: singular normal equations");

        Eigen::VectorXd trial = theta + step;
        trial[1] = std::clamp(trial[1], 0.0, kLorentzMax);

        Eigen::VectorXd trial_model;
        Eigen::MatrixXd trial_jac;
        evaluate_model(data.detunings, ctx, trial, trial_model, &trial_jac);
        Eigen::VectorXd trial_residual = trial_model - y;
        const double trial_obj = trial_residual.squaredNorm();

        if (trial_obj < obj) {
            const double rel_drop = (obj - trial_obj) / std::max(obj, 1e-300);
            theta = trial;
            model = trial_model;
            jac = trial_jac;
            residual = trial_residual;
            obj = trial_obj;
            trace.push_back(obj);
            lambda = std::max(lambda * 0.1, 1e-12);
            if (rel_drop < opts.rel_obj_tol) {
                converged = true;
                ++iter;
                break;
            }
        } else {
            lambda = std::min(lambda * 10.0, 1e12);
        }
    }

    FitResult result = pack_result(theta, ctx, residual, jac, trace, converged,
                                   iter, start.low_confidence);
    if (!converged) {
        std::ostringstream msg;
        msg << "fit_spectrum: no convergence after " << opts.max_iterations
            << " iterations (objective " << obj << ")";
        throw FitError(msg.str(), result);
    }
    return result;
}

TemperatureOffsetResult fit_temperature_offset(
    const std::vector<OdMeasurement>& points, double reference_detuning,
    const TransitionTable& table, const CellConditions& base) {
    if (points.size() < 3)
        throw DataError("fit_temperature_offset: need at least 3 points");
    constexpr double kCeiling = 463.15; // [K] validity ceiling (190 C)
    for (const auto& pt : points) {
        if (pt.reservoir_T > kCeiling)
            throw DataError("fit_temperature_offset: point above the 190 C "
                            "validity ceiling");
        if (!(pt.od > 0.0))
            throw DataError("fit_temperature_offset: measured OD must be positive");
    }

    const double cell_delta = base.cell_T - base.reservoir_T;
    auto log_od_model = [&](double T, double dT) {
        CellConditions cond = base;
        cond.reservoir_T = T;
        cond.cell_T = T + cell_delta;
        cond.temperature_offset = dT;
        const double od = optical_density_at(reference_detuning, table, cond);
        if (!(od > 0.0))
            throw NumericError("fit_temperature_offset: model OD not positive");
        return std::log(od);
    };

    // Objective and Gauss-Newton ingredients at one offset; RangeError from
    // the vapor model marks the trial infeasible.
    auto objective = [&](double dT, double* sum_jr = nullptr,
                         double* sum_jj = nullptr) {
        double g = 0.0, jr = 0.0, jj = 0.0;
        const double h = 1e-3;
        for (const auto& pt : points) {
            const double r = log_od_model(pt.reservoir_T, dT) - std::log(pt.od);
            g += r * r;
            if (sum_jr) {
                const double rp = log_od_model(pt.reservoir_T, dT + h) -
                                  std::log(pt.od);
                const double rm = log_od_model(pt.reservoir_T, dT - h) -
                                  std::log(pt.od);
                const double J = (rp - rm) / (2.0 * h);
                jr += J * r;
                jj += J * J;
            }
        }
        if (sum_jr) *sum_jr = jr;
        if (sum_jj) *sum_jj = jj;
        return g;
    };

    double dT = 0.0;
    double g = objective(dT); // throws RangeError if the raw points are invalid

    const int max_iter = 100;
    bool converged = false;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        double jr = 0.0, jj = 0.0;
        objective(dT, &jr, &jj);
        if (!(jj > 0.0))
            throw NumericError("fit_temperature_offset: flat objective");
        double step = -jr / jj;

        // Damped update: halve on objective increase or infeasible trial.
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            const double trial = dT + step;
            try {
                const double gt = objective(trial);
                if (gt <= g) {
                    dT = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
            } catch (const RangeError&) {
                // outside the vapor model's window; shrink and retry
            }
            step *= 0.5;
            if (std::abs(step) < 1e-12) break;
        }
        if (!accepted || std::abs(step) < 1e-8) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged)
        throw NumericError("fit_temperature_offset: no convergence");

    double jr = 0.0, jj = 0.0;
    objective(dT, &jr, &jj);
    TemperatureOffsetResult res;
    res.delta_T = dT;
    res.n_iterations = iter;
    res.converged = true;
    const double dof = std::max<double>(1.0, points.size() - 1.0);
    res.uncertainty = std::sqrt((g / dof) / jj);
    return res;
}

} // namespace rbspec
