// Spectrum fitting: round trips on synthetic data, Jacobian correctness,
// initial-guess heuristics, and the thermometer-offset calibration.
#include <doctest.h>

#include "rbspec/atomic_data.hpp"
#include "rbspec/errors.hpp"
#include "rbspec/fit.hpp"
#include "rbspec/spectrum.hpp"

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

using namespace rbspec;

namespace {

const TransitionTable& table() {
    static const TransitionTable t = transition_table();
    return t;
}

// Reservoir 160 C, cell 180 C, 10 um path: the regime where the strongest
// dips reach optical depth ~3.
CellConditions fit_conditions() {
    CellConditions cond;
    cond.reservoir_T = 433.15;
    cond.cell_T = 453.15;
    cond.path_length = 10e-6;
    return cond;
}

Eigen::ArrayXd coarse_grid(double step) {
    const int n = static_cast<int>(std::lround((7000.0 + 4000.0) / step)) + 1;
    Eigen::ArrayXd g(n);
    for (int i = 0; i < n; ++i) g[i] = -4000.0 + i * step;
    return g;
}

struct Truth {
    double density_scale = 1.0;
    double lorentz_extra = 0.0;
    double frequency_offset = 0.0;
    double amplitude = 1.0;
    double baseline = 0.0;
};

// Synthetic measured trace b + A * T(delta - offset), generated through the
// forward spectrum pipeline rather than the fit's own model code.
SpectrumTrace make_data(const Eigen::ArrayXd& grid, const CellConditions& cond,
                        const Truth& truth) {
    CellConditions gen = cond;
    gen.lorentz_extra = cond.lorentz_extra + truth.lorentz_extra;
    gen.density_override = truth.density_scale * cell_density(cond);
    const Eigen::ArrayXd shifted = grid - truth.frequency_offset;
    const SpectrumTrace t = transmission_spectrum(shifted, table(), gen);
    SpectrumTrace out;
    out.kind = TraceKind::Transmission;
    out.detunings = grid;
    out.values = truth.baseline + truth.amplitude * t.values;
    return out;
}

double truth_od_ref(const CellConditions& cond, const Truth& truth) {
    CellConditions gen = cond;
    gen.lorentz_extra = cond.lorentz_extra + truth.lorentz_extra;
    gen.density_override = truth.density_scale * cell_density(cond);
    return optical_density_at(table().line_detuning("Rb85:3-4"), table(), gen);
}

} // namespace

TEST_CASE("noiseless synthetic spectrum is recovered exactly") {
    const CellConditions cond = fit_conditions();
    const Eigen::ArrayXd grid = coarse_grid(5.0);

    SUBCASE("identity parameters") {
        const Truth truth;
        const SpectrumTrace data = make_data(grid, cond, truth);
        const FitResult res = fit_spectrum(data, table(), cond);
        CHECK(res.converged);
        CHECK_FALSE(res.low_confidence_init);
        CHECK(res.params.at("density_scale") ==
              doctest::Approx(1.0).epsilon(1e-3));
        CHECK(res.params.at("lorentz_extra") ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
        CHECK(res.params.at("frequency_offset") ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
        CHECK(res.params.at("amplitude") ==
              doctest::Approx(1.0).epsilon(1e-3));
        CHECK(res.params.at("baseline") ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
        // Optical depth at the tracked line, for these conditions.
        CHECK(res.od_ref == doctest::Approx(3.03916883858509).epsilon(1e-3));
        CHECK(res.residual_norm < 1e-6);
    }

    SUBCASE("displaced parameters") {
        Truth truth;
        truth.density_scale = 1.3;
        truth.lorentz_extra = 20.0;
        truth.frequency_offset = 37.0;
        truth.amplitude = 0.97;
        truth.baseline = 0.01;
        const SpectrumTrace data = make_data(grid, cond, truth);
        const FitResult res = fit_spectrum(data, table(), cond);
        CHECK(res.converged);
        CHECK(res.params.at("density_scale") ==
              doctest::Approx(truth.density_scale).epsilon(1e-3));
        CHECK(res.params.at("lorentz_extra") ==
              doctest::Approx(truth.lorentz_extra).epsilon(1e-3));
        CHECK(res.params.at("frequency_offset") ==
              doctest::Approx(truth.frequency_offset).epsilon(1e-3));
        CHECK(res.params.at("amplitude") ==
              doctest::Approx(truth.amplitude).epsilon(1e-3));
        CHECK(res.params.at("baseline") ==
              doctest::Approx(truth.baseline).epsilon(1e-3));
        CHECK(res.od_ref ==
              doctest::Approx(truth_od_ref(cond, truth)).epsilon(1e-3));

        // Result invariants.
        for (const auto& [name, sigma] : res.uncertainties) {
            CAPTURE(name);
            CHECK(sigma >= 0.0);
        }
        CHECK(res.od_ref >= 0.0);
        // Accepted optimizer steps never increase the objective.
        REQUIRE(res.objective_trace.size() >= 2);
        for (size_t i = 1; i < res.objective_trace.size(); ++i)
            CHECK(res.objective_trace[i] <= res.objective_trace[i - 1]);
    }
}

TEST_CASE("one percent noise still pins the reference optical depth") {
    const CellConditions cond = fit_conditions();
    const Eigen::ArrayXd grid = coarse_grid(10.0);
    Truth truth;
    truth.density_scale = 1.1;
    truth.frequency_offset = -22.0;
    const SpectrumTrace clean = make_data(grid, cond, truth);
    const double od_true = truth_od_ref(cond, truth);

    std::mt19937 rng(20260819);
    std::normal_distribution<double> noise(0.0, 0.01);
    int failures = 0;
    for (int seed = 0; seed < 20; ++seed) {
        SpectrumTrace data = clean;
        for (Eigen::Index i = 0; i < data.values.size(); ++i)
            data.values[i] += noise(rng);
        const FitResult res = fit_spectrum(data, table(), cond);
        CHECK(res.converged);
        if (std::abs(res.od_ref - od_true) > 0.05 * od_true) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("degenerate input is rejected") {
    const CellConditions cond = fit_conditions();
    const Eigen::ArrayXd grid = coarse_grid(10.0);

    SUBCASE("flat trace from zero density") {
        CellConditions empty = cond;
        empty.density_override = 0.0;
        SpectrumTrace data = transmission_spectrum(grid, table(), empty);
        CHECK_THROWS_AS(fit_spectrum(data, table(), cond), DataError);
    }
    SUBCASE("wrong trace kind") {
        SpectrumTrace data = make_data(grid, cond, Truth{});
        data.kind = TraceKind::OpticalDepth;
        CHECK_THROWS_AS(fit_spectrum(data, table(), cond), DataError);
    }
    SUBCASE("too few points") {
        SpectrumTrace data = make_data(grid, cond, Truth{});
        SpectrumTrace small;
        small.kind = TraceKind::Transmission;
        small.detunings = data.detunings.head(40);
        small.values = data.values.head(40);
        CHECK_THROWS_AS(fit_spectrum(small, table(), cond), DataError);
    }
    SUBCASE("span too short for two line groups") {
        Eigen::ArrayXd narrow(101);
        for (int i = 0; i < 101; ++i) narrow[i] = -500.0 + 10.0 * i;
        CellConditions gen = cond;
        SpectrumTrace data = transmission_spectrum(narrow, table(), gen);
        CHECK_THROWS_AS(fit_spectrum(data, table(), cond), DataError);
    }
}

TEST_CASE("model Jacobian matches central finite differences") {
    const CellConditions cond = fit_conditions();
    const Eigen::ArrayXd grid = coarse_grid(50.0);
    const Eigen::Index N = grid.size();

    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    for (int trial = 0; trial < 10; ++trial) {
        FitInit at;
        at.density_scale = std::exp(-0.7 + 1.4 * uni(rng));
        at.lorentz_extra = 0.5 + 59.5 * uni(rng);
        at.frequency_offset = -150.0 + 300.0 * uni(rng);
        at.amplitude = 0.8 + 0.4 * uni(rng);
        at.baseline = -0.05 + 0.1 * uni(rng);
        CAPTURE(trial);

        const auto [model, jac] =
            fit_model_with_jacobian(grid, table(), cond, at);
        REQUIRE(model.size() == N);
        REQUIRE(jac.rows() == N);
        REQUIRE(jac.cols() == 5);

        auto model_at = [&](const FitInit& p) {
            return fit_model_with_jacobian(grid, table(), cond, p).first;
        };
        auto check_column = [&](int col, const Eigen::VectorXd& fd) {
            const Eigen::VectorXd an = jac.col(col);
            CAPTURE(col);
            CHECK((fd - an).norm() <= 1e-5 * (an.norm() + 1e-9));
        };

        {
            const double h = 1e-5; // step in log(density_scale)
            FitInit up = at, dn = at;
            up.density_scale = at.density_scale * std::exp(h);
            dn.density_scale = at.density_scale * std::exp(-h);
            check_column(0, (model_at(up) - model_at(dn)) / (2.0 * h));
        }
        {
            const double h = 1e-4;
            FitInit up = at, dn = at;
            up.lorentz_extra += h;
            dn.lorentz_extra -= h;
            check_column(1, (model_at(up) - model_at(dn)) / (2.0 * h));
        }
        {
            const double h = 1e-4;
            FitInit up = at, dn = at;
            up.frequency_offset += h;
            dn.frequency_offset -= h;
            check_column(2, (model_at(up) - model_at(dn)) / (2.0 * h));
        }
        {
            const double h = 1e-5;
            FitInit up = at, dn = at;
            up.amplitude += h;
            dn.amplitude -= h;
            check_column(3, (model_at(up) - model_at(dn)) / (2.0 * h));
        }
        {
            const double h = 1e-5;
            FitInit up = at, dn = at;
            up.baseline += h;
            dn.baseline -= h;
            check_column(4, (model_at(up) - model_at(dn)) / (2.0 * h));
        }
    }

    SUBCASE("parameter domain") {
        FitInit bad;
        bad.density_scale = 0.0;
        CHECK_THROWS_AS(fit_model_with_jacobian(grid, table(), cond, bad),
                        RangeError);
        bad = FitInit{};
        bad.lorentz_extra = -1.0;
        CHECK_THROWS_AS(fit_model_with_jacobian(grid, table(), cond, bad),
                        RangeError);
    }
}

TEST_CASE("fit is equivariant under a shift of the detuning axis") {
    const CellConditions cond = fit_conditions();
    const Eigen::ArrayXd grid = coarse_grid(5.0);
    Truth truth;
    truth.frequency_offset = 37.0;
    truth.amplitude = 0.98;
    const SpectrumTrace data = make_data(grid, cond, truth);

    SpectrumTrace shifted = data;
    shifted.detunings = data.detunings + 100.0;

    const FitResult a = fit_spectrum(data, table(), cond);
    const FitResult b = fit_spectrum(shifted, table(), cond);
    CHECK(b.params.at("frequency_offset") - a.params.at("frequency_offset") ==
          doctest::Approx(100.0).epsilon(1e-3)); // +/- 0.1 MHz
    CHECK(b.od_ref == doctest::Approx(a.od_ref).epsilon(1e-6));
}

TEST_CASE("iteration cap raises a fit error carrying the best state") {
    const CellConditions cond = fit_conditions();
    const Eigen::ArrayXd grid = coarse_grid(10.0);
    Truth truth;
    truth.frequency_offset = 37.0;
    const SpectrumTrace data = make_data(grid, cond, truth);

    FitOptions opts;
    opts.max_iterations = 1;
    FitInit start; // deliberately off the optimum
    bool thrown = false;
    try {
        fit_spectrum(data, table(), cond, start, opts);
    } catch (const FitError& e) {
        thrown = true;
        CHECK_FALSE(e.best.converged);
        CHECK(e.best.n_iterations == 1);
        CHECK(e.best.params.count("density_scale") == 1);
        CHECK(e.best.params.count("frequency_offset") == 1);
    }
    CHECK(thrown);
}

TEST_CASE("initial guess from the data alone") {
    const CellConditions cond = fit_conditions();
    const Eigen::ArrayXd grid = coarse_grid(5.0);

    SUBCASE("offset located within 50 MHz") {
        Truth truth;
        truth.frequency_offset = 37.0;
        const SpectrumTrace data = make_data(grid, cond, truth);
        const FitInit init = peak_find_init(data, table(), cond);
        CHECK_FALSE(init.low_confidence);
        CHECK(std::abs(init.frequency_offset - 37.0) <= 50.0);
        CHECK(init.density_scale > 0.0);
    }
    SUBCASE("translation moves the guess along") {
        Truth truth;
        truth.frequency_offset = 37.0;
        const SpectrumTrace data = make_data(grid, cond, truth);
        Truth moved = truth;
        moved.frequency_offset = 337.0;
        const SpectrumTrace shifted = make_data(grid, cond, moved);
        const FitInit a = peak_find_init(data, table(), cond);
        const FitInit b = peak_find_init(shifted, table(), cond);
        CHECK(std::abs((b.frequency_offset - a.frequency_offset) - 300.0) <=
              50.0);
    }
    SUBCASE("monotone trace falls back to the centroid heuristic") {
        SpectrumTrace ramp;
        ramp.kind = TraceKind::Transmission;
        ramp.detunings = coarse_grid(50.0);
        ramp.values =
            Eigen::ArrayXd::LinSpaced(ramp.detunings.size(), 0.5, 1.0);
        const FitInit init = peak_find_init(ramp, table(), cond);
        CHECK(init.low_confidence);
    }
    SUBCASE("tiny traces are rejected") {
        SpectrumTrace tiny;
        tiny.kind = TraceKind::Transmission;
        tiny.detunings = Eigen::ArrayXd::LinSpaced(5, -4000.0, 7000.0);
        tiny.values = Eigen::ArrayXd::Constant(5, 0.5);
        CHECK_THROWS_AS(peak_find_init(tiny, table(), cond), DataError);
    }
}

TEST_CASE("thermometer offset calibration") {
    // Reservoir swept 90..190 C; cell runs 10 K warmer throughout.
    CellConditions base;
    base.reservoir_T = 363.15;
    base.cell_T = 373.15;
    base.path_length = 10e-6;
    const double ref = table().line_detuning("Rb85:3-4");

    // Spelled out so the top reading compares exactly equal to the 190 C
    // validity ceiling (strictly-above readings are rejected).
    const std::vector<double> readings = {363.15, 373.15, 383.15, 393.15,
                                          403.15, 413.15, 423.15, 433.15,
                                          443.15, 453.15, 463.15};
    auto synth_points = [&](double injected) {
        std::vector<OdMeasurement> pts;
        for (double T : readings) {
            CellConditions cond = base;
            cond.reservoir_T = T;
            cond.cell_T = T + 10.0;
            cond.temperature_offset = injected;
            pts.push_back({T, optical_density_at(ref, table(), cond)});
        }
        return pts;
    };

    SUBCASE("noiseless recovery is machine-level across the offset range") {
        for (double injected : {-20.0, -7.0, 0.0, 5.0, 20.0}) {
            CAPTURE(injected);
            const TemperatureOffsetResult res = fit_temperature_offset(
                synth_points(injected), ref, table(), base);
            CHECK(res.converged);
            CHECK(std::abs(res.delta_T - injected) < 1e-6);
            CHECK(res.uncertainty >= 0.0);
        }
    }

    SUBCASE("ten percent multiplicative noise keeps the offset within 2 K") {
        const auto clean = synth_points(-7.0);
        std::mt19937 rng(7081);
        std::uniform_real_distribution<double> factor(0.9, 1.1);
        for (int seed = 0; seed < 20; ++seed) {
            std::vector<OdMeasurement> pts = clean;
            for (auto& p : pts) p.od *= factor(rng);
            const TemperatureOffsetResult res =
                fit_temperature_offset(pts, ref, table(), base);
            CHECK(res.converged);
            CHECK(std::abs(res.delta_T - (-7.0)) <= 2.0);
            CHECK(res.uncertainty > 0.0);
        }
    }

    SUBCASE("input validation") {
        auto pts = synth_points(0.0);
        CHECK_THROWS_AS(fit_temperature_offset(
                            {pts.begin(), pts.begin() + 2}, ref, table(), base),
                        DataError);

        auto hot = pts;
        hot.push_back({464.0, 1.0}); // above the 190 C validity ceiling
        CHECK_THROWS_AS(fit_temperature_offset(hot, ref, table(), base),
                        DataError);

        auto nonpos = pts;
        nonpos[0].od = 0.0;
        CHECK_THROWS_AS(fit_temperature_offset(nonpos, ref, table(), base),
                        DataError);
        nonpos[0].od = -1.0;
        CHECK_THROWS_AS(fit_temperature_offset(nonpos, ref, table(), base),
                        DataError);
    }
}
