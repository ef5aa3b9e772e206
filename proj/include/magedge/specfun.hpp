#ifndef MAGEDGE_SPECFUN_HPP
#define MAGEDGE_SPECFUN_HPP

// Macdonald functions K0, K1 for real and right-half-plane complex argument.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <algorithm>
#include <type_traits>

#include "errors.hpp"

namespace magedge::specfun {

using cplx = std::complex<double>;

enum class Regime { series, quadrature, asymptotic };

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::series: return "series";
    case Regime::quadrature: return "quadrature";
    case Regime::asymptotic: return "asymptotic";
    }
    return "?";
}

template <class T>
struct MacdonaldEval {
    T value{};
    double abs_err_estimate = 0.0;
    Regime regime = Regime::series;
    bool underflow = false;
};

// both orders from one pass; err0/err1 are absolute
template <class T>
struct K01 {
    T k0{}, k1{};
    double err0 = 0.0, err1 = 0.0;
    Regime regime = Regime::series;
    bool underflow = false;
};

namespace detail {

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double euler_gamma = std::numbers::egamma;
constexpr double series_max = 2.0;
constexpr double asym_min = 30.0;

// K0 = sum s_k (H_k - ln(z/2) - g), K1 = 1/z + z/2 sum t_k (ln(z/2) + g - (H_k+H_{k+1})/2)
template <class T>
K01<T> series(T z) {
    const T q = z * z / 4.0;
    const T L = std::log(z / 2.0);
    T s = 1.0;       // q^k/(k!)^2
    T t = 1.0;       // q^k/(k!(k+1)!)
    double H = 0.0;  // H_k
    T sum0 = 0.0, sum1 = 0.0;
    double mag0 = 0.0, mag1 = 0.0;
    double last0 = 0.0, last1 = 0.0;
    for (int k = 0; k < 60; ++k) {
        const double Hn = H + 1.0 / (k + 1);
        const T a0 = s * (H - L - euler_gamma);
        const T a1 = t * (L + euler_gamma - 0.5 * (H + Hn));
        sum0 += a0;
        sum1 += a1;
        mag0 += std::abs(a0);
        mag1 += std::abs(a1);
        last0 = std::abs(a0);
        last1 = std::abs(a1);
        if (k > 2 && last0 <= 1e-18 * std::abs(sum0) && last1 <= 1e-18 * std::abs(sum1))
            break;
        s *= q / double((k + 1) * (k + 1));
        t *= q / double((k + 1) * (k + 2));
        H = Hn;
    }
    K01<T> r;
    r.k0 = sum0;
    r.k1 = 1.0 / z + z / 2.0 * sum1;
    const double az = std::abs(z);
    // rounding of the running sums plus a generous remainder (ratio of later terms < 1/2)
    r.err0 = 8.0 * eps * (mag0 + std::abs(L) * 3.0) + 2.0 * last0;
    r.err1 = 8.0 * eps * (1.0 / az + az / 2.0 * mag1) + az * last1;
    r.regime = Regime::series;
    return r;
}

// trapezoid on int_0^inf {1, cosh t} exp(-x cosh t) dt; strip half-width d = 1.2
inline K01<double> cosh_trapezoid(double x) {
    const double d = 1.2;
    const double slack = x * (1.0 - std::cos(d));
    const double h = 2.0 * std::numbers::pi * d / (38.0 + slack);
    const double tmax = std::acosh(1.0 + 42.0 / x);
    // scale out e^{-x} so large x keeps full relative precision
    double s0 = 0.5 * 1.0, s1 = 0.5 * 1.0;
    int n = 0;
    for (double t = h; t <= tmax + h; t += h) {
        const double c = std::cosh(t);
        const double e = std::exp(-x * (c - 1.0));
        s0 += e;
        s1 += c * e;
        ++n;
    }
    const double ex = std::exp(-x);
    K01<double> r;
    r.k0 = h * s0 * ex;
    r.k1 = h * s1 * ex;
    const double disc = 2.0 * std::exp(-38.0) / std::sqrt(std::cos(d)) + 4.0 * (n + 2) * eps;
    r.err0 = r.k0 * disc;
    r.err1 = r.k1 * disc;
    r.regime = Regime::quadrature;
    return r;
}

// Laplace form K_nu(z) = sqrt(pi/2z) e^{-z} (2/sqrt(pi)) c_nu int_0^inf u^{2nu} e^{-u^2} (1+u^2/2z)^{nu-1/2} du
inline K01<cplx> laplace_trapezoid(cplx z) {
    const double d0 = std::abs(std::sqrt(2.0 * z).real());
    const double d = std::min(0.85 * d0, 2.5);
    const double h = 2.0 * std::numbers::pi * d / (38.0 + d * d);
    const double umax = 6.4;
    const cplx w = 1.0 / (2.0 * z);
    cplx s0 = 0.5, s1 = 0.0;
    int n = 0;
    for (double u = h; u <= umax; u += h) {
        const double u2 = u * u;
        const double g = std::exp(-u2);
        const cplx r = std::sqrt(1.0 + u2 * w);
        s0 += g / r;
        s1 += u2 * g * r;
        ++n;
    }
    const cplx pref = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z) * (2.0 / std::sqrt(std::numbers::pi));
    K01<cplx> r;
    r.k0 = pref * h * s0;
    r.k1 = pref * 2.0 * h * s1;
    // strip bound: |integrand| <= e^{d^2} / sqrt(1 - (d/d0)^2) on Im u = d
    const double strip = std::exp(d * d - 2.0 * std::numbers::pi * d / h) / std::sqrt(1.0 - 0.7225);
    const double apref = std::abs(pref);
    r.err0 = apref * (4.0 * strip + 8.0 * (n + 2) * eps * h * std::abs(s0));
    r.err1 = apref * (8.0 * strip + 16.0 * (n + 2) * eps * h * std::abs(s1));
    r.regime = Regime::quadrature;
    return r;
}

// Hankel expansion sqrt(pi/2z) e^{-z} sum a_k(nu) z^{-k}
template <class T>
K01<T> asymptotic(T z) {
    const T iz = 1.0 / z;
    T sum0 = 1.0, sum1 = 1.0;
    T a0 = 1.0, a1 = 1.0;
    double next0 = 0.0, next1 = 0.0;
    double prev0 = 1.0, prev1 = 1.0;
    for (int k = 1; k < 80; ++k) {
        const double m = (2.0 * k - 1.0) * (2.0 * k - 1.0);
        a0 *= (0.0 - m) / (8.0 * k) * iz;
        a1 *= (4.0 - m) / (8.0 * k) * iz;
        const double n0 = std::abs(a0), n1 = std::abs(a1);
        if ((n0 < 1e-18 && n1 < 1e-18) || n0 > prev0 || n1 > prev1) {
            next0 = n0;
            next1 = n1;
            break;
        }
        sum0 += a0;
        sum1 += a1;
        prev0 = n0;
        prev1 = n1;
    }
    K01<T> r;
    r.regime = Regime::asymptotic;
    const double re = std::real(z);
    double round = 8.0 * eps;  // relative rounding in the prefactor and sums
    if constexpr (std::is_same_v<T, double>) {
        // exp(-z) of an exact double is good to an ulp; the log form loses |z| eps, so only use it past underflow
        double pref = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z);
        if (z > 700.0) {
            pref = std::exp(0.5 * std::log(std::numbers::pi / (2.0 * z)) - z);
            round += 2.0 * z * eps;
        }
        r.k0 = pref * sum0;
        r.k1 = pref * sum1;
    } else {
        const T pref = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z);
        r.k0 = pref * sum0;
        r.k1 = pref * sum1;
    }
    // complex sectors |arg z| < pi/2 widen the remainder bound; factor 2 covers it
    const double scale = std::sqrt(std::numbers::pi / (2.0 * std::abs(z))) * std::exp(-re);
    r.err0 = scale * (2.0 * next0 + round * std::abs(sum0));
    r.err1 = scale * (2.0 * next1 + round * std::abs(sum1));
    r.underflow = re > 700.0;
    return r;
}

inline void check_real(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw domain_error("Macdonald function needs finite x > 0");
}

} // namespace detail

inline K01<double> k01(double x) {
    detail::check_real(x);
    if (x <= detail::series_max) return detail::series<double>(x);
    if (x <= detail::asym_min) return detail::cosh_trapezoid(x);
    return detail::asymptotic<double>(x);
}

inline K01<cplx> k01(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw domain_error("Macdonald function needs finite argument");
    if (!(z.real() > 0.0))
        throw domain_error("Macdonald function needs Re(kappa) > 0 (branch cut)");
    if (z.imag() == 0.0) {
        const K01<double> r = k01(z.real());
        return {r.k0, r.k1, r.err0, r.err1, r.regime, r.underflow};
    }
    const double a = std::abs(z);
    if (a <= detail::series_max) return detail::series<cplx>(z);
    if (a <= detail::asym_min) return detail::laplace_trapezoid(z);
    return detail::asymptotic<cplx>(z);
}

inline MacdonaldEval<double> k0(double x) {
    const auto r = k01(x);
    return {r.k0, r.err0, r.regime, r.underflow};
}

inline MacdonaldEval<double> k1(double x) {
    const auto r = k01(x);
    return {r.k1, r.err1, r.regime, r.underflow};
}

inline MacdonaldEval<cplx> k0_complex(cplx kappa) {
    const auto r = k01(kappa);
    return {r.k0, r.err0, r.regime, r.underflow};
}

inline MacdonaldEval<cplx> k1_complex(cplx kappa) {
    const auto r = k01(kappa);
    return {r.k1, r.err1, r.regime, r.underflow};
}

// K0' = -K1
inline double k0_prime(double x) { return -k01(x).k1; }

// K1' = -K0 - K1/x
inline double k1_prime(double x) {
    const auto r = k01(x);
    return -r.k0 - r.k1 / x;
}

} // namespace magedge::specfun

#endif
