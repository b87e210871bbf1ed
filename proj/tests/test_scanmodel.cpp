#include <doctest.h>

#include "rbspec/errors.hpp"
#include "rbspec/scanmodel.hpp"
#include "rbspec/spectrum.hpp"

#include "oracle.hpp"

#include <cmath>
#include <vector>

using namespace rbspec;

namespace {

ChannelGeometry standard_channel() { return {40.0, 20.0, 10.0}; }

const TransitionTable& table() {
    static TransitionTable t = transition_table();
    return t;
}

CellConditions scan_conditions() {
    CellConditions cond;
    cond.reservoir_T = 403.15; // 130 C
    cond.cell_T = 463.15;      // 190 C
    cond.path_length = 1e-6;   // unused by the scan integrals
    return cond;
}

} // namespace

TEST_CASE("path_length traces the trapezoid chord") {
    const ChannelGeometry g = standard_channel();
    CHECK(path_length(0.0, g) == 10.0);
    CHECK(path_length(10.0, g) == 10.0);  // edge of the floor
    CHECK(path_length(-10.0, g) == 10.0);
    CHECK(path_length(12.5, g) == doctest::Approx(7.5)); // on the sidewall
    CHECK(path_length(15.0, g) == doctest::Approx(5.0));
    CHECK(path_length(-15.0, g) == doctest::Approx(5.0));
    CHECK(path_length(19.0, g) == doctest::Approx(1.0));
    CHECK(path_length(20.0, g) == 0.0);   // top corner
    CHECK(path_length(25.0, g) == 0.0);
    // rectangular limit
    const ChannelGeometry rect{20.0, 20.0, 6.0};
    CHECK(path_length(9.99, rect) == 6.0);
    CHECK(path_length(10.01, rect) == 0.0);
}

TEST_CASE("geometry and beam arguments are validated") {
    CHECK_THROWS_AS(path_length(0.0, {40.0, 0.0, 10.0}), RangeError);
    CHECK_THROWS_AS(path_length(0.0, {10.0, 20.0, 10.0}), RangeError);
    CHECK_THROWS_AS(path_length(0.0, {40.0, 20.0, -1.0}), RangeError);
    CHECK(ChannelGeometry{40.0, 20.0, 10.0}.smallest_dimension() == 10.0);
    CHECK(ChannelGeometry{40.0, 20.0, 30.0}.smallest_dimension() == 20.0);
    const Eigen::ArrayXd pos = Eigen::ArrayXd::Zero(1);
    CHECK_THROWS_AS(scan_signal(pos, standard_channel(), {0.0}, 1000.0),
                    RangeError);
    CHECK_THROWS_AS(scan_signal(pos, standard_channel(), {1.5}, -1.0),
                    RangeError);
}

TEST_CASE("group peak absorption finds the right feature") {
    const CellConditions cond = scan_conditions();
    // 87 Fg=2 local maximum near -66 MHz; the far stronger 85 feature at
    // +1080 MHz must not be picked up
    const double a87 = group_peak_absorption(table(), cond, "Rb87:2-3");
    CHECK(a87 == doctest::Approx(26379.34).epsilon(1e-4));
    const double a85 = group_peak_absorption(table(), cond, "Rb85:3-4");
    CHECK(a85 == doctest::Approx(66295.94).epsilon(1e-4));
    // the peak dominates nearby samples
    CHECK(a87 >= absorption_at(-66.0, table(), cond));
    CHECK(a85 >= absorption_at(1080.0, table(), cond));
    // any line label of the same group gives the same peak
    CHECK(group_peak_absorption(table(), cond, "Rb87:2-1") ==
          doctest::Approx(a87).epsilon(1e-12));
    CHECK_THROWS_AS(group_peak_absorption(table(), cond, "Rb87:9-9"),
                    ConfigError);
}

TEST_CASE("scan signal is even in the stage position") {
    const ChannelGeometry g = standard_channel();
    const BeamProfile beam{1.5};
    Eigen::ArrayXd pos(10);
    pos << -22.5, -17.5, -12.5, -7.5, -2.5, 2.5, 7.5, 12.5, 17.5, 22.5;
    const Eigen::ArrayXd s = scan_signal(pos, g, beam, 26379.34);
    const double peak = s.maxCoeff();
    for (int i = 0; i < 5; ++i) {
        CAPTURE(pos[i]);
        CHECK(std::abs(s[i] - s[9 - i]) <= 1e-4 * peak);
    }
}

TEST_CASE("scan signal support ends outside the channel opening") {
    const ChannelGeometry g = standard_channel();
    const BeamProfile beam{1.5};
    Eigen::ArrayXd pos(3);
    pos << 0.0, 25.0, 30.0;
    const Eigen::ArrayXd s = scan_signal(pos, g, beam, 26379.34);
    CHECK(s[1] < 1e-6 * s[0]);
    CHECK(s[2] < 1e-6 * s[0]);
}

TEST_CASE("narrow beam limit reduces to the pointwise absorbed fraction") {
    const ChannelGeometry g = standard_channel();
    const BeamProfile beam{0.01};
    const double alpha = 26379.34;
    Eigen::ArrayXd pos(5);
    pos << 0.0, 12.5, 15.0, 19.0, 21.0;
    const Eigen::ArrayXd s = scan_signal(pos, g, beam, alpha);
    for (int i = 0; i < pos.size(); ++i) {
        CAPTURE(pos[i]);
        const double direct =
            1.0 - std::exp(-alpha * 1e-6 * path_length(pos[i], g));
        CHECK(s[i] == doctest::Approx(direct).epsilon(1e-3).scale(1.0));
    }
}

TEST_CASE("opaque vapor saturates the absorbed fraction") {
    const ChannelGeometry g = standard_channel();
    const BeamProfile beam{1.5};
    Eigen::ArrayXd pos(1);
    pos << 0.0;
    const Eigen::ArrayXd s = scan_signal(pos, g, beam, 1e9);
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scan signal decreases monotonically across the sidewall") {
    const ChannelGeometry g = standard_channel();
    const BeamProfile beam{1.5};
    Eigen::ArrayXd pos = Eigen::ArrayXd::LinSpaced(11, 10.0, 30.0);
    const Eigen::ArrayXd s = scan_signal(pos, g, beam, 26379.34);
    for (int i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);
}

TEST_CASE("scan signal matches the riemann-sum oracle") {
    const ChannelGeometry g = standard_channel();
    const double w = 1.5, alpha = 26379.34;
    Eigen::ArrayXd pos(5);
    pos << 0.0, 7.5, 14.0, 18.5, 23.0;
    const Eigen::ArrayXd s = scan_signal(pos, g, {w}, alpha);
    for (int i = 0; i < pos.size(); ++i) {
        CAPTURE(pos[i]);
        const double ref = oracle::scan_signal_riemann(pos[i], g, w, alpha);
        CHECK(s[i] == doctest::Approx(ref).epsilon(1e-4));
    }
}

TEST_CASE("absorption and fluorescence scans share the beam-channel shape") {
    const ChannelGeometry g = standard_channel();
    const BeamProfile beam{1.5};
    const CellConditions cond = scan_conditions();
    const Eigen::ArrayXd pos = Eigen::ArrayXd::LinSpaced(141, -35.0, 35.0);

    const Eigen::ArrayXd abs85 =
        scan_absorption(pos, g, beam, cond, table(), "Rb85:3-4");
    const Eigen::ArrayXd fluo = scan_fluorescence(pos, g, beam, cond, table());

    // the 85 group absorbs more strongly than the 87 reference group
    CHECK(abs85.maxCoeff() > fluo.maxCoeff());

    // fluorescence profile width lies between the bottom and top widths
    auto fwhm = [&](const Eigen::ArrayXd& s) {
        Eigen::Index imax = 0;
        const double peak = s.maxCoeff(&imax);
        Eigen::Index l = imax, r = imax;
        while (l > 0 && s[l] > 0.5 * peak) --l;
        while (r < s.size() - 1 && s[r] > 0.5 * peak) ++r;
        auto cross = [&](Eigen::Index a, Eigen::Index b) {
            const double t = (0.5 * peak - s[a]) / (s[b] - s[a]);
            return pos[a] + t * (pos[b] - pos[a]);
        };
        return cross(r - 1, r) - cross(l + 1, l);
    };
    const double width = fwhm(fluo);
    CHECK(width > 20.0);
    CHECK(width < 40.0);
    // frozen regression for the standard geometry and beam
    CHECK(width == doctest::Approx(30.6).epsilon(0.02));
}
