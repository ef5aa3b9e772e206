#ifndef MAGEDGE_GPT_HPP
#define MAGEDGE_GPT_HPP

// Cutoff pairs in x2 and the gluing identity
//   (H_E - z) U(z) = 1 + W(z),  U = et_l R_bulk e_l + et_0 R_edge e_0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "jet.hpp"
#include "smooth.hpp"

namespace magedge {

// profile value and first two x2-derivatives
struct Profile3 {
    double v = 0, d1 = 0, d2 = 0;
};

namespace detail {

// rises from 0 at x2 = a to 1 at x2 = b
inline Profile3 rise(double x2, double a, double b) {
    using J = Jet<2>;
    const J u = (J::variable(x2) - a) / (b - a);
    const J s = smooth_step(u);
    return {s.value(), s.derivative(1), s.derivative(2)};
}

} // namespace detail

// bands in units of sqrt(ell):
//   eta_0 falls on [1, 2], eta_l = 1 - eta_0,
//   et_l rises on [1/4, 3/4], et_0 falls on [9/4, 11/4]
struct CutoffPair {
    double ell = 9.0;
    double s = 3.0;        // sqrt(ell)
    double c_sep = 0.25;   // dist(supp d et_i, supp eta_i) = c_sep sqrt(ell)

    Profile3 eta_ell(double x2) const { return detail::rise(x2, 1.0 * s, 2.0 * s); }
    Profile3 eta0(double x2) const {
        const auto r = eta_ell(x2);
        return {1.0 - r.v, -r.d1, -r.d2};
    }
    Profile3 eta_ell_tilde(double x2) const { return detail::rise(x2, 0.25 * s, 0.75 * s); }
    Profile3 eta0_tilde(double x2) const {
        const auto r = detail::rise(x2, 2.25 * s, 2.75 * s);
        return {1.0 - r.v, -r.d1, -r.d2};
    }
};

inline CutoffPair build_cutoffs(double ell) {
    if (!(ell > 2.0)) throw domain_error("cutoff scale ell must exceed 2");
    CutoffPair c;
    c.ell = ell;
    c.s = std::sqrt(ell);
    return c;
}

struct CutoffReport {
    double partition_residual = 0;   // max |eta0 + eta_l - 1|
    double tilde_residual = 0;       // max |et_i eta_i - eta_i|
    double disjoint_product = 0;     // max |d et_i * eta_i|
    double support_violation = 0;    // mass outside the prescribed bands
    double sup_d1_eta0 = 0, sup_d2_eta0 = 0;
    double sup_d1_tilde = 0, sup_d2_tilde = 0;
};

// checks on n points of x2 in (0, 4 sqrt(ell)]
inline CutoffReport verify_cutoffs(const CutoffPair& c, int n = 10000) {
    CutoffReport r;
    for (int k = 1; k <= n; ++k) {
        const double x2 = 4.0 * c.s * k / n;
        const auto e0 = c.eta0(x2), el = c.eta_ell(x2), t0 = c.eta0_tilde(x2), tl = c.eta_ell_tilde(x2);
        r.partition_residual = std::max(r.partition_residual, std::abs(e0.v + el.v - 1.0));
        r.tilde_residual = std::max({r.tilde_residual, std::abs(t0.v * e0.v - e0.v), std::abs(tl.v * el.v - el.v)});
        r.disjoint_product = std::max({r.disjoint_product, std::abs(t0.d1 * e0.v), std::abs(tl.d1 * el.v)});
        double viol = 0;
        if (x2 > 2.0 * c.s) viol = std::max(viol, e0.v);
        if (x2 <= 1.0 * c.s) viol = std::max(viol, el.v);
        if (x2 > 2.75 * c.s) viol = std::max(viol, t0.v);
        if (x2 <= 0.25 * c.s) viol = std::max(viol, tl.v);
        r.support_violation = std::max(r.support_violation, viol);
        r.sup_d1_eta0 = std::max(r.sup_d1_eta0, std::abs(e0.d1));
        r.sup_d2_eta0 = std::max(r.sup_d2_eta0, std::abs(e0.d2));
        r.sup_d1_tilde = std::max({r.sup_d1_tilde, std::abs(t0.d1), std::abs(tl.d1)});
        r.sup_d2_tilde = std::max({r.sup_d2_tilde, std::abs(t0.d2), std::abs(tl.d2)});
    }
    return r;
}

struct GptResidual {
    double residual = 0;  // |(H_E - z) U f - f - W f| / |f|
    double W_norm = 0;    // |W f| / |f|
    double bulk_branch_norm = 0, edge_branch_norm = 0;
};

namespace detail {

// vector indexed by the sites of `to`; sites missing in `from` give 0
inline CVec transfer(const GridHamiltonian& from, const CVec& v, const GridHamiltonian& to) {
    CVec out = CVec::Zero(to.dimension());
    for (int s = 0; s < to.dimension(); ++s) {
        const auto k = from.site_at(to.sites[std::size_t(s)]);
        if (k) out(s) = v(*k);
    }
    return out;
}

template <class Fn>
CVec multiply(const GridHamiltonian& g, const CVec& v, Fn&& f) {
    CVec out(v.size());
    for (int s = 0; s < g.dimension(); ++s) out(s) = f(g.sites[std::size_t(s)].x2) * v(s);
    return out;
}

// centered covariant difference along x2: (U(x, x+h e2) u(x+h e2) - U(x, x-h e2) u(x-h e2)) / 2h,
// with U(x, y) = -h^2 H_{x,y}
inline CVec covariant_d2(const GridHamiltonian& g, const CVec& u) {
    CVec out = CVec::Zero(u.size());
    const double h = g.h();
    for (int k = 0; k < g.H.outerSize(); ++k)
        for (SpMat::InnerIterator it(g.H, k); it; ++it) {
            const int x = int(it.row()), y = int(it.col());
            if (x == y) continue;
            const double dy2 = g.sites[std::size_t(y)].x2 - g.sites[std::size_t(x)].x2;
            if (std::abs(dy2) < 0.5 * h) continue;
            const cplx U = -h * h * it.value();
            out(x) += (dy2 > 0 ? 1.0 : -1.0) * U * u(y) / (2.0 * h);
        }
    return out;
}

// (-2 i grad et . (p - a) - lap et) u = -2 et' D2 u - et'' u
template <class Prof>
CVec defect(const GridHamiltonian& g, const CVec& u, Prof&& et) {
    const CVec d2 = covariant_d2(g, u);
    CVec out(u.size());
    for (int s = 0; s < g.dimension(); ++s) {
        const auto p = et(g.sites[std::size_t(s)].x2);
        out(s) = -2.0 * p.d1 * d2(s) - p.d2 * u(s);
    }
    return out;
}

} // namespace detail

// seeded sum of complex Gaussian bumps sampled on the grid sites
inline CVec smooth_test_vector(const GridHamiltonian& g, std::uint64_t seed, int bumps = 8) {
    std::mt19937_64 rng(seed);
    const auto& sp = g.spec;
    const double m1 = 0.15 * (sp.x1hi - sp.x1lo), m2 = 0.15 * (sp.x2hi - sp.x2lo);
    std::uniform_real_distribution<double> c1(sp.x1lo + m1, sp.x1hi - m1), c2(sp.x2lo + m2, sp.x2hi - m2),
        wd(0.5, 1.0), ph(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> amp;
    CVec f = CVec::Zero(g.dimension());
    for (int k = 0; k < bumps; ++k) {
        const double a1 = c1(rng), a2 = c2(rng), w = wd(rng);
        const cplx A = amp(rng) * std::polar(1.0, ph(rng));
        for (int s = 0; s < g.dimension(); ++s) {
            const auto& p = g.sites[std::size_t(s)];
            const double r2 = (p.x1 - a1) * (p.x1 - a1) + (p.x2 - a2) * (p.x2 - a2);
            f(s) += A * std::exp(-r2 / (2 * w * w));
        }
    }
    return f;
}

// f lives on the edge grid; the bulk grid must contain every edge site
inline GptResidual gpt_identity_residual(const GridHamiltonian& H_edge, const GridHamiltonian& H_bulk,
                                         const CutoffPair& cut, cplx z, const CVec& f) {
    if (z.imag() == 0.0) throw domain_error("gpt identity needs Im z != 0");
    if (H_edge.h() != H_bulk.h()) throw domain_error("edge and bulk grids must share the spacing");
    for (const auto& p : H_edge.sites)
        if (!H_bulk.site_at(p)) throw domain_error("bulk grid does not cover the edge grid");
    const double fn = f.norm();
    if (fn == 0.0) throw domain_error("zero test vector");

    auto val = [](auto prof) { return [prof](double x2) { return prof(x2).v; }; };
    const auto e0 = [&](double x2) { return cut.eta0(x2); };
    const auto el = [&](double x2) { return cut.eta_ell(x2); };
    const auto t0 = [&](double x2) { return cut.eta0_tilde(x2); };
    const auto tl = [&](double x2) { return cut.eta_ell_tilde(x2); };

    // bulk branch: u_b = R_bulk (eta_l f)
    const CVec fb = detail::transfer(H_edge, f, H_bulk);
    const CVec ub = GridResolvent(H_bulk, z).solve(detail::multiply(H_bulk, fb, val(el)));
    // edge branch: u_e = R_edge (eta_0 f)
    const CVec ue = GridResolvent(H_edge, z).solve(detail::multiply(H_edge, f, val(e0)));

    const CVec U = detail::transfer(H_bulk, detail::multiply(H_bulk, ub, val(tl)), H_edge) +
                   detail::multiply(H_edge, ue, val(t0));
    const CVec Wf = detail::transfer(H_bulk, detail::defect(H_bulk, ub, tl), H_edge) + detail::defect(H_edge, ue, t0);

    const CVec lhs = H_edge.H * U - z * U;
    GptResidual r;
    r.residual = (lhs - f - Wf).norm() / fn;
    r.W_norm = Wf.norm() / fn;
    r.bulk_branch_norm = ub.norm() / fn;
    r.edge_branch_norm = ue.norm() / fn;
    return r;
}

} // namespace magedge

#endif
