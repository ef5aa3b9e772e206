#ifndef MAGEDGE_SMOOTH_HPP
#define MAGEDGE_SMOOTH_HPP

// C-infinity steps built from psi(t) = exp(-1/t).

#include <cmath>

#include "jet.hpp"

namespace magedge {

// 0 for u <= 0, 1 for u >= 1
template <class T>
T smooth_step(const T& u) {
    const double u0 = value_of(u);
    if (u0 <= 0.0) return u * 0.0;
    if (u0 >= 1.0) return u * 0.0 + 1.0;
    const double a = 1.0 / u0 - 1.0 / (1.0 - u0);
    if (a > 700.0) return u * 0.0;
    if (a < -700.0) return u * 0.0 + 1.0;
    using std::exp;
    // psi(u) / (psi(u) + psi(1-u)) = 1 / (1 + exp(1/u - 1/(1-u)))
    const T e = exp(1.0 / u - 1.0 / (1.0 - u));
    return 1.0 / (1.0 + e);
}

inline double smooth_step_derivative(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double e = std::exp(1.0 / u - 1.0 / (1.0 - u));
    if (!std::isfinite(e)) return 0.0;
    const double s = 1.0 / (1.0 + e);
    return s * s * e * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)));
}

// radial cutoff: 1 for t <= 1/2, 0 for t >= 1
inline double plateau_cutoff(double t) { return smooth_step(2.0 * (1.0 - t)); }

} // namespace magedge

#endif
