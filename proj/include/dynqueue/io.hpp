#pragma once

#include <string>

namespace dynq {

// Shortest-roundtrip is not enough for cross-implementation diffs; every
// real written to disk uses 17 significant digits.
std::string format_real(double v);

}  // namespace dynq
