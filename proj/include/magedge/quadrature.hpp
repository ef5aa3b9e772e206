#ifndef MAGEDGE_QUADRATURE_HPP
#define MAGEDGE_QUADRATURE_HPP

// Globally adaptive 2-D integration over boxes of the half-plane with polar
// disks (r = r_max(theta) t^2) around integrable point singularities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "smooth.hpp"

namespace magedge {

struct QuadraturePolicy {
    double target_abs_err = 1e-6;
    double target_rel_err = 0.0;           // if > 0, target = max(abs, rel * |scale|) where the caller supplies scale
    double tail_cut_radius_factor = 14.0;  // box half-extension in units of 1/decay
    int singular_cell_levels = 10;
    long max_evals = 4'000'000;
};

struct QuadResult {
    cplx value = 0.0;
    double err_estimate = 0.0;
    long evals = 0;
    bool converged = true;
};

namespace quad {

// Gauss-Legendre nodes and weights on [0, 1]
struct Rule {
    std::vector<double> x, w;
};

namespace detail {
template <int N>
Rule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    Rule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            r.x.push_back(0.5);
            r.w.push_back(0.5 * wt[i]);
        } else {
            r.x.push_back(0.5 - 0.5 * a[i]);
            r.w.push_back(0.5 * wt[i]);
            r.x.push_back(0.5 + 0.5 * a[i]);
            r.w.push_back(0.5 * wt[i]);
        }
    }
    std::vector<std::size_t> idx(r.x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto p, auto q) { return r.x[p] < r.x[q]; });
    Rule s;
    for (auto i : idx) {
        s.x.push_back(r.x[i]);
        s.w.push_back(r.w[i]);
    }
    return s;
}
} // namespace detail

inline const Rule& gauss_legendre(int n) {
    static const Rule r3 = detail::make_rule<3>();
    static const Rule r4 = detail::make_rule<4>();
    static const Rule r5 = detail::make_rule<5>();
    static const Rule r6 = detail::make_rule<6>();
    static const Rule r8 = detail::make_rule<8>();
    static const Rule r10 = detail::make_rule<10>();
    switch (n) {
    case 3: return r3;
    case 4: return r4;
    case 5: return r5;
    case 6: return r6;
    case 8: return r8;
    case 10: return r10;
    default: throw domain_error("unsupported Gauss-Legendre order");
    }
}

} // namespace quad

struct SingularCenter {
    Point c;
    double rho;  // disk radius; the cutoff is 1 inside rho/2
};

struct Box {
    double y1lo, y1hi, y2lo, y2hi;
};

// f(y) over box minus disks, plus f(y) over clipped disks (y2 > 0)
template <class F>
QuadResult integrate_half_plane(F&& f, const std::vector<SingularCenter>& centers, const Box& box, double target,
                                const QuadraturePolicy& policy) {
    struct Cell {
        double a0, a1, b0, b1;  // (y1, y2) for cartesian, (theta, t) for polar
        int center;             // -1 cartesian
        int depth;
        cplx q;
        double err;
        bool operator<(const Cell& o) const { return err < o.err; }
    };
    const auto& hi = quad::gauss_legendre(8);
    const auto& lo = quad::gauss_legendre(5);
    long evals = 0;

    auto weight_cart = [&](const Point& y) {
        double w = 1.0;
        for (const auto& sc : centers) {
            const double d = norm(y - sc.c) / sc.rho;
            if (d < 1.0) w -= plateau_cutoff(d);
        }
        return w;
    };
    auto rmax = [&](const SingularCenter& sc, double th) {
        const double s = std::sin(th);
        if (s < 0.0) return std::min(sc.rho, sc.c.x2 / (-s));
        return sc.rho;
    };

    auto eval_cell = [&](Cell& c) {
        cplx qh = 0.0, ql = 0.0;
        const double da = c.a1 - c.a0, db = c.b1 - c.b0;
        auto point_value = [&](double a, double b) -> cplx {
            ++evals;
            if (c.center < 0) {
                const Point y{a, b};
                const double w = weight_cart(y);
                if (w == 0.0) return 0.0;
                return w * f(y);
            }
            const auto& sc = centers[std::size_t(c.center)];
            const double rm = rmax(sc, a);
            const double r = rm * b * b;
            const Point y{sc.c.x1 + r * std::cos(a), sc.c.x2 + r * std::sin(a)};
            if (!(y.x2 > 0.0) || r == 0.0) return 0.0;
            const double psi = plateau_cutoff(r / sc.rho);
            if (psi == 0.0) return 0.0;
            return psi * 2.0 * rm * rm * b * b * b * f(y);
        };
        for (std::size_t i = 0; i < hi.x.size(); ++i)
            for (std::size_t j = 0; j < hi.x.size(); ++j)
                qh += hi.w[i] * hi.w[j] * point_value(c.a0 + da * hi.x[i], c.b0 + db * hi.x[j]);
        for (std::size_t i = 0; i < lo.x.size(); ++i)
            for (std::size_t j = 0; j < lo.x.size(); ++j)
                ql += lo.w[i] * lo.w[j] * point_value(c.a0 + da * lo.x[i], c.b0 + db * lo.x[j]);
        c.q = qh * (da * db);
        c.err = std::abs(qh - ql) * (da * db);
    };

    std::priority_queue<Cell> heap;
    std::vector<Cell> done;
    cplx total = 0.0;
    double err_total = 0.0;

    auto push = [&](Cell c) {
        eval_cell(c);
        total += c.q;
        err_total += c.err;
        heap.push(c);
    };

    // cartesian seed cells
    {
        double smin = box.y2hi - box.y2lo;
        for (const auto& sc : centers) smin = std::min(smin, sc.rho);
        const double w1 = box.y1hi - box.y1lo, w2 = box.y2hi - box.y2lo;
        double s = std::max(smin, std::sqrt(w1 * w2 / 400.0));
        const int n1 = std::max(1, int(std::ceil(w1 / s))), n2 = std::max(1, int(std::ceil(w2 / s)));
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                push({box.y1lo + w1 * i / n1, box.y1lo + w1 * (i + 1) / n1, box.y2lo + w2 * j / n2,
                      box.y2lo + w2 * (j + 1) / n2, -1, 0, 0.0, 0.0});
    }
    // polar seed cells; theta split where the disk meets the boundary
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const auto& sc = centers[k];
        std::vector<double> cuts{0.0};
        if (sc.c.x2 < sc.rho) {
            const double a = std::asin(sc.c.x2 / sc.rho);
            cuts.push_back(std::numbers::pi + a);
            cuts.push_back(2.0 * std::numbers::pi - a);
        }
        cuts.push_back(2.0 * std::numbers::pi);
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const int nth = std::max(1, int(std::ceil((cuts[p + 1] - cuts[p]) / (std::numbers::pi / 4))));
            for (int i = 0; i < nth; ++i) {
                const double t0 = cuts[p] + (cuts[p + 1] - cuts[p]) * i / nth;
                const double t1 = cuts[p] + (cuts[p + 1] - cuts[p]) * (i + 1) / nth;
                push({t0, t1, 0.0, 1.0, int(k), 0, 0.0, 0.0});
            }
        }
    }

    const int cart_levels = 16;
    const int polar_levels = std::clamp(policy.singular_cell_levels, 0, 12);
    // |G8 - G5| runs up to ~5x low on the cutoff-weighted cells; refine past it and report scaled
    constexpr double safety = 8.0;
    while (err_total * safety > target && !heap.empty() && evals < policy.max_evals) {
        Cell c = heap.top();
        heap.pop();
        const int cap = c.center < 0 ? cart_levels : polar_levels;
        if (c.depth >= cap) {
            done.push_back(c);
            continue;
        }
        total -= c.q;
        err_total -= c.err;
        const double am = 0.5 * (c.a0 + c.a1), bm = 0.5 * (c.b0 + c.b1);
        push({c.a0, am, c.b0, bm, c.center, c.depth + 1, 0.0, 0.0});
        push({am, c.a1, c.b0, bm, c.center, c.depth + 1, 0.0, 0.0});
        push({c.a0, am, bm, c.b1, c.center, c.depth + 1, 0.0, 0.0});
        push({am, c.a1, bm, c.b1, c.center, c.depth + 1, 0.0, 0.0});
    }
    // re-sum to shed drift from the running add/subtract
    total = 0.0;
    err_total = 0.0;
    while (!heap.empty()) {
        done.push_back(heap.top());
        heap.pop();
    }
    for (const auto& c : done) {
        total += c.q;
        err_total += c.err;
    }
    QuadResult r;
    r.value = total;
    r.err_estimate = safety * err_total;
    r.evals = evals;
    r.converged = r.err_estimate <= target;
    return r;
}

// max |f| along the three open sides of the box (sides touching y2 = 0 excluded)
template <class F>
double boundary_max(F&& f, const Box& box, int n = 48) {
    double m = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = double(i) / n;
        const double y1 = box.y1lo + s * (box.y1hi - box.y1lo);
        const double y2 = box.y2lo + s * (box.y2hi - box.y2lo);
        m = std::max(m, std::abs(f(Point{y1, box.y2hi})));
        if (y2 > 0.0) {
            m = std::max(m, std::abs(f(Point{box.y1lo, y2})));
            m = std::max(m, std::abs(f(Point{box.y1hi, y2})));
        }
        if (box.y2lo > 0.0) m = std::max(m, std::abs(f(Point{y1, box.y2lo})));
    }
    return m;
}

} // namespace magedge

#endif
