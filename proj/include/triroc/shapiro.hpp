#pragma once

#include <span>

namespace triroc {

struct ShapiroResult {
  double W = 0.0;
  double p_value = 0.0;
};

// Shapiro-Wilk normality test, Royston's AS R94 approximation: Blom normal
// scores with polynomial-corrected end weights, exact p for n = 3, lognormal
// p approximations for 4 <= n <= 11 and n >= 12. Requires 3 <= n <= 5000 and
// nonzero variance (DataError otherwise). Matches the reference
// implementation to ~1e-6 in W and p.
ShapiroResult shapiro_wilk(std::span<const double> data);

}  // namespace triroc
