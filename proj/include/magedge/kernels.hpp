#ifndef MAGEDGE_KERNELS_HPP
#define MAGEDGE_KERNELS_HPP

#include <cmath>
#include <complex>
#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "geometry.hpp"
#include "potentials.hpp"
#include "specfun.hpp"

namespace magedge {

enum class Singularity { none, log, inverse };

inline const char* to_string(Singularity s) {
    switch (s) {
    case Singularity::none: return "none";
    case Singularity::log: return "log";
    case Singularity::inverse: return "inverse";
    }
    return "?";
}

struct Kernel {
    std::function<cplx(const Point&, const Point&)> evaluator;
    Singularity singularity = Singularity::none;
    double decay_rate = 1.0;  // inverse length
    bool phase_factored = false;
    double fit_C = std::numeric_limits<double>::quiet_NaN();
    double fit_delta = std::numeric_limits<double>::quiet_NaN();
    bool identically_zero = false;
    std::string name;

    cplx operator()(const Point& x, const Point& y) const { return identically_zero ? cplx(0.0) : evaluator(x, y); }
};

inline Kernel zero_kernel(double decay_rate = 1.0) {
    Kernel k;
    k.evaluator = [](const Point&, const Point&) { return cplx(0.0); };
    k.decay_rate = decay_rate;
    k.identically_zero = true;
    k.name = "zero";
    return k;
}

namespace detail {

constexpr double inv_2pi = 0.5 / std::numbers::pi;

struct K01Value {
    cplx k0, k1;
};

inline K01Value k01_at(cplx kappa, double r) {
    if (kappa.imag() == 0.0) {
        const auto v = specfun::k01(kappa.real() * r);
        return {v.k0, v.k1};
    }
    const auto v = specfun::k01(kappa * r);
    return {v.k0, v.k1};
}

inline void check_off_diagonal(const Point& x, const Point& y) {
    if (x == y) throw singularity_error("kernel evaluated on the diagonal x = y");
}

} // namespace detail

// (1/2pi) K0(kappa |x - y|)
inline cplx free_kernel(const Point& x, const Point& y, const SpectralParam& s) {
    detail::check_off_diagonal(x, y);
    return detail::inv_2pi * detail::k01_at(s.kappa, norm(x - y)).k0;
}

// R_E(x, y) = G0(x - y) - G0(x - y*)
inline cplx dirichlet_kernel(const Point& x, const Point& y, const SpectralParam& s) {
    detail::check_off_diagonal(x, y);
    const double r = norm(x - y), rs = norm(x - star(y));
    return detail::inv_2pi * (detail::k01_at(s.kappa, r).k0 - detail::k01_at(s.kappa, rs).k0);
}

struct KernelGrad {
    cplx value;   // R_E
    cplx d1, d2;  // grad_x R_E, direct part
    cplx i1, i2;  // grad_x of the image term -G0(x - y*), kept separate
};

// R_E and its x-gradient via K0' = -K1
inline KernelGrad dirichlet_with_grad(const Point& x, const Point& y, const SpectralParam& s) {
    detail::check_off_diagonal(x, y);
    const Point u = x - y, us = x - star(y);
    const double r = norm(u), rs = norm(us);
    const auto a = detail::k01_at(s.kappa, r);
    const auto b = detail::k01_at(s.kappa, rs);
    KernelGrad g;
    g.value = detail::inv_2pi * (a.k0 - b.k0);
    const cplx ca = -s.kappa * a.k1 * detail::inv_2pi / r;
    const cplx cb = s.kappa * b.k1 * detail::inv_2pi / rs;
    g.d1 = ca * u.x1;
    g.d2 = ca * u.x2;
    g.i1 = cb * us.x1;
    g.i2 = cb * us.x2;
    return g;
}

// phi(x, y) = -1/2 (x1 - y1)(x2 + y2)
inline double peierls_phase(const Point& x, const Point& y) { return -0.5 * (x.x1 - y.x1) * (x.x2 + y.x2); }

// the equivalent form 1/2 (y1 - x1)(x2 + y2)
inline double peierls_phase_alt(const Point& x, const Point& y) { return 0.5 * (y.x1 - x.x1) * (x.x2 + y.x2); }

// phi_s(u, v) = -1/2 (u1 v2 - u2 v1)
inline double phi_s(const Point& u, const Point& v) { return -0.5 * (u.x1 * v.x2 - u.x2 * v.x1); }

// phi(x,y) + phi(y,xp) - phi(x,xp) == phi_s(x - y, y - xp)
inline double phase_composition_defect(const Point& x, const Point& y, const Point& xp) {
    return phi_s(x - y, y - xp);
}

// A_t(u) = 1/2 (-u2, u1)
inline Point transverse_gauge(const Point& u) { return {-0.5 * u.x2, 0.5 * u.x1}; }

inline cplx peierls_factor(double b, const Point& x, const Point& y) {
    const double a = b * peierls_phase(x, y);
    return {std::cos(a), std::sin(a)};
}

inline cplx s_kernel(double b, const Point& x, const Point& y, const SpectralParam& s) {
    return peierls_factor(b, x, y) * dirichlet_kernel(x, y, s);
}

// e^{ib phi} b A_t(x-y).[2i grad_1 + b A_t(x-y)] R_E; A_t(u).u = 0 kills the direct gradient,
// so T is continuous across the diagonal with T(x, x) = 0
inline cplx t_kernel(double b, const Point& x, const Point& y, const SpectralParam& s) {
    if (b == 0.0) return 0.0;
    if (x == y) return 0.0;
    const Point at = transverse_gauge(x - y);
    const auto g = dirichlet_with_grad(x, y, s);
    const cplx grad_dot = at.x1 * g.i1 + at.x2 * g.i2;
    const cplx br = cplx(0.0, 2.0 * b) * grad_dot + b * b * dot(at, at) * g.value;
    return peierls_factor(b, x, y) * br;
}

// p_j S for p = -i grad - bA:  e^{ib phi}[-b A_t,j(x-y) - i d_j] R_E
inline std::array<cplx, 2> p_s_kernel(double b, const Point& x, const Point& y, const SpectralParam& s) {
    const Point at = transverse_gauge(x - y);
    const auto g = dirichlet_with_grad(x, y, s);
    const cplx I(0.0, 1.0);
    const cplx e = peierls_factor(b, x, y);
    return {e * (-b * at.x1 * g.value - I * (g.d1 + g.i1)), e * (-b * at.x2 * g.value - I * (g.d2 + g.i2))};
}

// P_j S with P_j = -i d_j - b A_j - calA_j
inline cplx pj_s_kernel(int j, const PotentialConfig& pot, const Point& x, const Point& y, const SpectralParam& s) {
    const auto ps = p_s_kernel(pot.b, x, y, s);
    const auto a = pot.A(x);
    const cplx sv = s_kernel(pot.b, x, y, s);
    return j == 1 ? ps[0] - a[0] * sv : ps[1] - a[1] * sv;
}

// W S with W = -2 calA.p + i div calA + calA^2 + V
inline cplx w_s_kernel(const PotentialConfig& pot, const Point& x, const Point& y, const SpectralParam& s) {
    if (pot.trivial()) return 0.0;
    const auto a = pot.A(x);
    const double v = pot.scalar(x);
    const auto ps = p_s_kernel(pot.b, x, y, s);
    const cplx sv = s_kernel(pot.b, x, y, s);
    const cplx onsite(a[0] * a[0] + a[1] * a[1] + v, pot.divA(x));
    return -2.0 * (a[0] * ps[0] + a[1] * ps[1]) + onsite * sv;
}

enum class KernelKind { S, T, P1S, P2S, WS };

inline const char* to_string(KernelKind k) {
    switch (k) {
    case KernelKind::S: return "S";
    case KernelKind::T: return "T";
    case KernelKind::P1S: return "P1S";
    case KernelKind::P2S: return "P2S";
    case KernelKind::WS: return "WS";
    }
    return "?";
}

inline Kernel make_kernel(KernelKind kind, const FieldParams& fp, const PotentialConfig& pot, const SpectralParam& s) {
    if (!(s.kappa.real() > 0.0)) throw domain_error("spectral parameter on the branch cut");
    Kernel k;
    k.phase_factored = true;
    k.name = to_string(kind);
    const double b = fp.b;
    const double kr = s.kappa.real();
    switch (kind) {
    case KernelKind::S:
        k.evaluator = [b, s](const Point& x, const Point& y) { return s_kernel(b, x, y, s); };
        k.singularity = Singularity::log;
        k.decay_rate = kr;
        break;
    case KernelKind::T:
        k.evaluator = [b, s](const Point& x, const Point& y) { return t_kernel(b, x, y, s); };
        k.singularity = Singularity::none;
        k.decay_rate = 0.5 * kr;
        k.identically_zero = (b == 0.0);
        break;
    case KernelKind::P1S:
    case KernelKind::P2S: {
        const int j = kind == KernelKind::P1S ? 1 : 2;
        auto p = std::make_shared<PotentialConfig>(pot);
        p->b = b;
        k.evaluator = [j, p, s](const Point& x, const Point& y) { return pj_s_kernel(j, *p, x, y, s); };
        k.singularity = Singularity::inverse;
        k.decay_rate = 0.5 * kr;
        break;
    }
    case KernelKind::WS: {
        auto p = std::make_shared<PotentialConfig>(pot);
        p->b = b;
        k.evaluator = [p, s](const Point& x, const Point& y) { return w_s_kernel(*p, x, y, s); };
        k.singularity = Singularity::inverse;
        k.decay_rate = 0.5 * kr;
        k.identically_zero = pot.trivial();
        break;
    }
    default:
        throw domain_error("unsupported kernel kind");
    }
    return k;
}

inline Kernel dirichlet_kernel_object(const SpectralParam& s) {
    Kernel k;
    k.evaluator = [s](const Point& x, const Point& y) { return dirichlet_kernel(x, y, s); };
    k.singularity = Singularity::log;
    k.decay_rate = s.kappa.real();
    k.name = "R_E";
    return k;
}

inline Kernel free_kernel_object(const SpectralParam& s) {
    Kernel k;
    k.evaluator = [s](const Point& x, const Point& y) { return free_kernel(x, y, s); };
    k.singularity = Singularity::log;
    k.decay_rate = s.kappa.real();
    k.name = "G0";
    return k;
}

} // namespace magedge

#endif
