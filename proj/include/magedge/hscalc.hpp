#ifndef MAGEDGE_HSCALC_HPP
#define MAGEDGE_HSCALC_HPP

// Almost-analytic extensions and the area formula
//   F(H) = (1/pi) int dbar F_N(z) (H - z)^{-1} dz1 dz2,  dbar = (d1 + i d2)/2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "grid.hpp"
#include "jet.hpp"
#include "quadrature.hpp"
#include "smooth.hpp"

namespace magedge {

constexpr int max_jet_order = 12;
using FJet = Jet<max_jet_order>;

// F^{(j)}(x), j = 0..order
using DerivFn = std::function<std::vector<double>(double x, int order)>;

struct FermiParams {
    double mu = 0.0;
    double T = 0.1;
    double E0 = 0.0;
    double cutoff_width = 1.0;
};

inline FJet fermi_dirac_jet(const FJet& x, double mu, double T) {
    const FJet a = (x - mu) / T;
    if (a.value() > 0.0) {
        const FJet e = exp(-a);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + exp(a));
}

// F = F_FD * chi, chi = 1 on [E0 - 1, inf), 0 below E0 - 1 - width
inline FJet fermi_schwartz_jet(const FermiParams& fp, double x) {
    const FJet X = FJet::variable(x);
    const double lo = fp.E0 - 1.0 - fp.cutoff_width;
    const FJet chi = smooth_step((X - lo) / fp.cutoff_width);
    if (chi.value() == 0.0 && x <= lo) return FJet::constant(0.0);
    return fermi_dirac_jet(X, fp.mu, fp.T) * chi;
}

inline DerivFn fermi_schwartz(const FermiParams& fp) {
    if (!(fp.T > 0.0)) throw domain_error("temperature must be positive");
    if (!(fp.cutoff_width > 0.0)) throw domain_error("cutoff width must be positive");
    return [fp](double x, int order) {
        if (order > max_jet_order) throw domain_error("derivative order too high");
        const FJet j = fermi_schwartz_jet(fp, x);
        std::vector<double> d(std::size_t(order + 1));
        for (int k = 0; k <= order; ++k) d[std::size_t(k)] = j.derivative(k);
        return d;
    };
}

inline double fermi_schwartz_value(const FermiParams& fp, double x) { return fermi_schwartz_jet(fp, x).value(); }

// g = 1 on |y| <= 1/2, 0 on |y| >= 1
inline double strip_cutoff(double y) { return plateau_cutoff(std::abs(y)); }
inline double strip_cutoff_derivative(double y) {
    const double t = std::abs(y);
    const double d = -2.0 * smooth_step_derivative(2.0 * (1.0 - t));
    return y < 0.0 ? -d : d;
}

struct AlmostAnalytic {
    DerivFn F;
    int N = 2;
    double C_N_fitted = std::numeric_limits<double>::quiet_NaN();
    double z1_lo = -10.0, z1_hi = 10.0;  // where F is not negligible
    double fine_lo = 0.0, fine_hi = 0.0; // z1 band with steep derivatives (the low-energy switch)
};

inline AlmostAnalytic make_almost_analytic(DerivFn F, int N, double z1_lo, double z1_hi) {
    if (N < 2) throw domain_error("almost-analytic order N must be >= 2");
    if (N + 1 > max_jet_order) throw domain_error("almost-analytic order too high");
    AlmostAnalytic aa;
    aa.F = std::move(F);
    aa.N = N;
    aa.z1_lo = z1_lo;
    aa.z1_hi = z1_hi;
    return aa;
}

inline AlmostAnalytic almost_analytic_fermi(const FermiParams& fp, int N) {
    const double lo = fp.E0 - 1.0 - fp.cutoff_width;
    auto aa = make_almost_analytic(fermi_schwartz(fp), N, lo, fp.mu + 30.0 * fp.T);
    aa.fine_lo = lo;
    aa.fine_hi = fp.E0 - 1.0;
    return aa;
}

// F_N(z) = g(z2) sum_j F^{(j)}(z1) (i z2)^j / j!
inline cplx almost_analytic_value(const AlmostAnalytic& aa, cplx z) {
    const double y = z.imag();
    const double g = strip_cutoff(y);
    if (g == 0.0) return 0.0;
    const auto d = aa.F(z.real(), aa.N);
    cplx s = 0.0, p = 1.0;
    double fact = 1.0;
    for (int j = 0; j <= aa.N; ++j) {
        if (j > 0) {
            p *= cplx(0.0, y);
            fact *= j;
        }
        s += d[std::size_t(j)] * p / fact;
    }
    return g * s;
}

// dbar = (d1 + i d2)/2 applied to F_N; the sum telescopes to the F^{(N+1)} term
inline cplx dbar_eval(const AlmostAnalytic& aa, cplx z) {
    const double y = z.imag();
    if (std::abs(y) >= 1.0) return 0.0;
    const double g = strip_cutoff(y), gp = strip_cutoff_derivative(y);
    if (g == 0.0 && gp == 0.0) return 0.0;
    const auto d = aa.F(z.real(), aa.N + 1);
    cplx s = 0.0, p = 1.0;
    double fact = 1.0;
    for (int j = 0; j <= aa.N; ++j) {
        if (j > 0) {
            p *= cplx(0.0, y);
            fact *= j;
        }
        s += d[std::size_t(j)] * p / fact;
    }
    const cplx I(0.0, 1.0);
    return 0.5 * I * gp * s + 0.5 * g * d[std::size_t(aa.N + 1)] * p / fact;
}

// max |dbar F_N| <z1>^N / |z2|^N over a n1 x n2 grid, z2 in (0, 1)
inline double fit_C_N(AlmostAnalytic& aa, int n1 = 200, int n2 = 20, double margin = 2.0) {
    const double a = aa.z1_lo - margin, b = aa.z1_hi + margin;
    double m = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double x = a + (b - a) * (i + 0.5) / n1;
        for (int j = 1; j <= n2; ++j) {
            const double y = double(j) / (n2 + 1);
            const double v = std::abs(dbar_eval(aa, {x, y})) * std::pow(1.0 + x * x, 0.5 * aa.N) / std::pow(y, aa.N);
            m = std::max(m, v);
        }
    }
    aa.C_N_fitted = m;
    return m;
}

struct StripQuadrature {
    double z2_min = 0.05;      // nodes only at |z2| >= z2_min
    double panel_scale = 1.0;  // multiplies every z1 panel width
    double z1_scale = 0.25;    // feature scale of F along the real axis
    double fine_width = 0.02;  // z1 panel width inside the fine band
    int cutoff_panels = 4;     // z2 panels on [1/2, 1] where g' lives
    int m1 = 6, m2 = 6;
};

struct HSResult {
    Eigen::MatrixXcd out;         // F(H) applied to the columns of V
    double truncation_bound = 0;  // excluded |z2| < z2_min, per unit input norm
    long nodes = 0;
};

// int <z1>^{-N} dz1 over R
inline double bracket_integral(int N) {
    return std::sqrt(std::numbers::pi) * boost::math::tgamma(0.5 * (N - 1)) / boost::math::tgamma(0.5 * N);
}

namespace detail {

// (start, width) of z1 panels over [z1_lo, z1_hi]
inline std::vector<std::pair<double, double>> z1_panels(const AlmostAnalytic& aa, const StripQuadrature& q, double coarse) {
    std::vector<std::pair<double, double>> out;
    auto fill = [&](double a, double b, double w) {
        if (!(b > a)) return;
        const int n = std::max(1, int(std::ceil((b - a) / w)));
        for (int p = 0; p < n; ++p) out.push_back({a + (b - a) * p / n, (b - a) / n});
    };
    const double flo = std::clamp(aa.fine_lo, aa.z1_lo, aa.z1_hi), fhi = std::clamp(aa.fine_hi, aa.z1_lo, aa.z1_hi);
    fill(aa.z1_lo, flo, coarse);
    fill(flo, fhi, q.panel_scale * q.fine_width);
    fill(fhi, aa.z1_hi, coarse);
    return out;
}

} // namespace detail

// (1/pi) sum_nodes w dbar F_N(z) (H - z)^{-1} V, both half-strips
inline HSResult hs_apply(const GridHamiltonian& g, AlmostAnalytic& aa, const StripQuadrature& q, const Eigen::MatrixXcd& V,
                         double max_truncation = std::numeric_limits<double>::infinity()) {
    if (std::isnan(aa.C_N_fitted)) fit_C_N(aa);
    HSResult res;
    res.out = Eigen::MatrixXcd::Zero(V.rows(), V.cols());
    res.truncation_bound = 2.0 / std::numbers::pi * aa.C_N_fitted * std::pow(q.z2_min, aa.N) / aa.N *
                           bracket_integral(aa.N);
    if (res.truncation_bound > max_truncation)
        throw accuracy_error("near-axis truncation bound exceeds request", res.truncation_bound);
    const auto& r1 = quad::gauss_legendre(q.m1);
    const auto& r2 = quad::gauss_legendre(q.m2);
    // z2: cutoff band split evenly, then dyadic panels [y/2, y] down to z2_min
    std::vector<std::pair<double, double>> ypan;
    for (int k = 0; k < q.cutoff_panels; ++k)
        ypan.push_back({0.5 + 0.5 * k / q.cutoff_panels, 0.5 + 0.5 * (k + 1) / q.cutoff_panels});
    for (double y = 0.5; y > q.z2_min * (1 + 1e-12); y *= 0.5) ypan.push_back({std::max(0.5 * y, q.z2_min), y});
    ShiftedFamily fam(g);
    for (const auto& [ya, yb] : ypan) {
        const auto pans = detail::z1_panels(aa, q, q.panel_scale * std::min(q.z1_scale, std::max(ya, q.z2_min)));
        for (int k2 = 0; k2 < q.m2; ++k2) {
            const double y = ya + (yb - ya) * r2.x[std::size_t(k2)];
            const double wy = (yb - ya) * r2.w[std::size_t(k2)];
            for (const auto& [pa, pw] : pans)
                for (int k1 = 0; k1 < q.m1; ++k1) {
                    const double x = pa + pw * r1.x[std::size_t(k1)];
                    const double wx = pw * r1.w[std::size_t(k1)];
                    const cplx z(x, y);
                    const cplx dp = dbar_eval(aa, z), dm = dbar_eval(aa, std::conj(z));
                    if (dp == 0.0 && dm == 0.0) continue;
                    fam.factorize(z);
                    const double w = wx * wy / std::numbers::pi;
                    for (Eigen::Index c = 0; c < V.cols(); ++c) {
                        const CVec col = V.col(c);
                        res.out.col(c) += (w * dp) * fam.solve(col) + (w * dm) * fam.solve_conjugate(col);
                    }
                    res.nodes += 2;
                }
        }
    }
    return res;
}

} // namespace magedge

#endif
