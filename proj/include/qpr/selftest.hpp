#pragma once

#include <ostream>

namespace qpr {

/// Runs the quick example suite (exact continued fractions, torus norms,
/// strip norms, shifts, Birkhoff sums, Schrodinger construction, rotation
/// numbers of constants, normalization and reduction smoke cases). Prints
/// one line per check; returns false on any failure.
bool selftest(std::ostream& os);

}  // namespace qpr
