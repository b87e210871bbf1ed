#include "rbspec/angular.hpp"
#include "rbspec/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rbspec {

namespace {

// ln(n!) table; momenta here never exceed a few tens so 128 entries is ample.
constexpr int kMaxFact = 128;

const std::array<double, kMaxFact>& log_fact_table() {
    static const std::array<double, kMaxFact> table = [] {
        std::array<double, kMaxFact> t{};
        t[0] = 0.0;
        for (int n = 1; n < kMaxFact; ++n)
            t[n] = t[n - 1] + std::log(static_cast<double>(n));
        return t;
    }();
    return table;
}

double log_fact(int n) {
    if (n < 0 || n >= kMaxFact)
        throw NumericError("factorial argument out of range");
    return log_fact_table()[n];
}

// Triangle rule for doubled momenta; also checks that the perimeter is even
// (i.e. the three momenta can actually couple).
bool triangle_ok(int two_a, int two_b, int two_c) {
    if ((two_a + two_b + two_c) % 2 != 0) return false;
    return two_c >= std::abs(two_a - two_b) && two_c <= two_a + two_b;
}

// log of the triangle coefficient Delta(abc), doubled args. Assumes
// triangle_ok already passed.
double log_triangle(int two_a, int two_b, int two_c) {
    int s = (two_a + two_b + two_c) / 2;
    return 0.5 * (log_fact((two_a + two_b - two_c) / 2) +
                  log_fact((two_a - two_b + two_c) / 2) +
                  log_fact((-two_a + two_b + two_c) / 2) -
                  log_fact(s + 1));
}

} // namespace

double wigner_6j(int two_j1, int two_j2, int two_j3,
                 int two_j4, int two_j5, int two_j6) {
    const int j[6] = {two_j1, two_j2, two_j3, two_j4, two_j5, two_j6};
    for (int v : j)
        if (v < 0)
            throw ConfigError("wigner_6j: negative angular momentum");

    // The four triads of the 6j symbol.
    const int triads[4][3] = {
        {two_j1, two_j2, two_j3},
        {two_j1, two_j5, two_j6},
        {two_j4, two_j2, two_j6},
        {two_j4, two_j5, two_j3},
    };
    for (const auto& t : triads)
        if (!triangle_ok(t[0], t[1], t[2]))
            return 0.0;

    // Racah's single-sum formula. All the combinations below are integers
    // once the triads pass parity checks.
    const int t1 = (two_j1 + two_j2 + two_j3) / 2;
    const int t2 = (two_j1 + two_j5 + two_j6) / 2;
    const int t3 = (two_j4 + two_j2 + two_j6) / 2;
    const int t4 = (two_j4 + two_j5 + two_j3) / 2;
    const int q1 = (two_j1 + two_j2 + two_j4 + two_j5) / 2;
    const int q2 = (two_j2 + two_j3 + two_j5 + two_j6) / 2;
    const int q3 = (two_j3 + two_j1 + two_j6 + two_j4) / 2;

    const int kmin = std::max({t1, t2, t3, t4});
    const int kmax = std::min({q1, q2, q3});

    double sum = 0.0;
    for (int k = kmin; k <= kmax; ++k) {
        double logterm = log_fact(k + 1) -
                         log_fact(k - t1) - log_fact(k - t2) -
                         log_fact(k - t3) - log_fact(k - t4) -
                         log_fact(q1 - k) - log_fact(q2 - k) - log_fact(q3 - k);
        double term = std::exp(logterm);
        sum += (k % 2 == 0) ? term : -term;
    }

    double logpre = log_triangle(two_j1, two_j2, two_j3) +
                    log_triangle(two_j1, two_j5, two_j6) +
                    log_triangle(two_j4, two_j2, two_j6) +
                    log_triangle(two_j4, two_j5, two_j3);
    return std::exp(logpre) * sum;
}

} // namespace rbspec
