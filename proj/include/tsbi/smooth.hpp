#pragma once

#include <cmath>

#include "tsbi/dual.hpp"

namespace tsbi {

using std::exp;
using std::sqrt;

/// |x| regularized as sqrt(x^2 + eps). Satisfies |x| <= result <= |x| + sqrt(eps).
template <class T>
T smooth_abs(const T& x, double eps) {
    return sqrt(x * x + eps);
}

/// sgn(x) regularized as x / sqrt(x^2 + eps); odd, bounded by 1 in magnitude.
template <class T>
T smooth_sgn(const T& x, double eps) {
    return x / sqrt(x * x + eps);
}

/// d/dx of smooth_sgn: eps / (x^2 + eps)^{3/2}.
inline double smooth_sgn_derivative(double x, double eps) {
    const double s = x * x + eps;
    return eps / (s * std::sqrt(s));
}

/// max(x, 0) written as (x + |x|)/2 with the regularized absolute value.
template <class T>
T smooth_ramp(const T& x, double eps) {
    return 0.5 * (x + smooth_abs(x, eps));
}

/// Exponential whose argument is capped at `cap`; above the cap it continues
/// along the tangent line so value and first derivative stay continuous.
template <class T>
T guarded_exp(const T& x, double cap = 350.0) {
    if (value_of(x) <= cap) return exp(x);
    const double e = std::exp(cap);
    return e * (1.0 + (x - cap));
}

}  // namespace tsbi
