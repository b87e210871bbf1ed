#pragma once

namespace rbspec {

// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}. Arguments are doubled so that
// half-integer momenta stay exact: pass two_j = 2*j (e.g. j=5/2 -> 5).
// Returns 0 for couplings that violate a triangle rule; throws
// ConfigError for negative or parity-inconsistent inputs.
double wigner_6j(int two_j1, int two_j2, int two_j3,
                 int two_j4, int two_j5, int two_j6);

} // namespace rbspec
