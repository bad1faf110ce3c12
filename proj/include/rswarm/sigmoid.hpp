#pragma once

#include <algorithm>
#include <cmath>

namespace rswarm {

// Parametrized smooth step sigma_{s,q}: zero at y = 0, strictly increasing,
// with limits -q (y -> -inf) and 1 (y -> +inf).  Scale s > 0, offset
// q in (0,1).
//
// Two numerical guards keep its mathematical properties intact at double
// precision:
//   - the exponent argument is clamped to [-500, 500] before exp(), so large
//     inputs never overflow;
//   - the result is clamped into the open interval (-q, 1) by one ulp, so
//     strict comparisons against the hard step survive saturation rounding.
inline double sigmoid(double y, double s, double q) {
    const double z = std::clamp(-s * y, -500.0, 500.0);
    const double ex = std::exp(z);
    // Equivalent closed form q * (1 - e^z) / (q + e^z); expm1 keeps the
    // numerator exact for tiny |y|.
    double v = q * (-std::expm1(z)) / (q + ex);
    v = std::min(v, std::nextafter(1.0, 0.0));
    v = std::max(v, std::nextafter(-q, 1.0));
    return v;
}

// d sigma / dy = q (1+q) s e^z / (q + e^z)^2 with z = -s y.  Positive
// everywhere.  Factored so no intermediate overflows even at the clamp.
inline double sigmoid_deriv(double y, double s, double q) {
    const double z = std::clamp(-s * y, -500.0, 500.0);
    const double ex = std::exp(z);
    const double t = 1.0 / (q + ex);
    return q * (1.0 + q) * s * (ex * t) * t;
}

// d^2 sigma / dy^2 = q (1+q) s^2 e^z (e^z - q) / (q + e^z)^3.
inline double sigmoid_second_deriv(double y, double s, double q) {
    const double z = std::clamp(-s * y, -500.0, 500.0);
    const double ex = std::exp(z);
    const double t = 1.0 / (q + ex);
    return q * (1.0 + q) * s * s * (ex * t) * ((ex - q) * t) * t;
}

inline double heaviside(double y) { return y >= 0.0 ? 1.0 : 0.0; }

}  // namespace rswarm
