#ifndef MAGEDGE_COMPOSITION_HPP
#define MAGEDGE_COMPOSITION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fitting.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "potentials.hpp"
#include "quadrature.hpp"

namespace magedge {

namespace detail {

inline double disk_radius(double decay, double sep) {
    double rho = std::min(0.5, 1.0 / decay);
    if (sep > 0.0) rho = std::min(rho, 0.45 * sep);
    return rho;
}

inline Box box_around(const Point& a, const Point& b, double R) {
    return {std::min(a.x1, b.x1) - R, std::max(a.x1, b.x1) + R, std::max(0.0, std::min(a.x2, b.x2) - R),
            std::max(a.x2, b.x2) + R};
}

// crude outside-box bound: boundary max times perimeter over decay
template <class F>
double tail_estimate(F&& f, const Box& box, double decay) {
    const double m = boundary_max(f, box);
    const double per = 2.0 * (box.y1hi - box.y1lo) + 2.0 * (box.y2hi - box.y2lo);
    return m * per / decay;
}

} // namespace detail

// int_E K1(x, y) K2(y, xp) dy
inline QuadResult compose(const Kernel& K1, const Kernel& K2, const Point& x, const Point& xp,
                          const QuadraturePolicy& policy) {
    if (K1.identically_zero || K2.identically_zero) return {};
    if (!(K1.decay_rate > 0.0) || !(K2.decay_rate > 0.0)) throw domain_error("compose needs decay_rate > 0");
    const double sep = norm(x - xp);
    const bool s1 = K1.singularity != Singularity::none, s2 = K2.singularity != Singularity::none;
    if (sep == 0.0 && (s1 || s2)) throw singularity_error("compose at x = xp with singular factors");
    std::vector<SingularCenter> centers;
    if (s1) centers.push_back({x, detail::disk_radius(K1.decay_rate, sep)});
    if (s2) centers.push_back({xp, detail::disk_radius(K2.decay_rate, sep)});
    const double decay = std::min(K1.decay_rate, K2.decay_rate);
    const Box box = detail::box_around(x, xp, policy.tail_cut_radius_factor / decay);
    auto f = [&](const Point& y) -> cplx {
        if (y == x || y == xp) return 0.0;
        return K1(x, y) * K2(y, xp);
    };
    QuadResult r = integrate_half_plane(f, centers, box, policy.target_abs_err, policy);
    r.err_estimate += detail::tail_estimate(f, box, decay);
    if (r.err_estimate > 10.0 * policy.target_abs_err)
        throw accuracy_error("compose: refinement did not converge", r.err_estimate);
    return r;
}

// int_E |K(x, y)| dy (row) or int_E |K(y, x)| dy (column), with outside-box tail added
inline double abs_integral(const Kernel& K, const Point& x, bool row, double rel_tol = 1e-4) {
    std::vector<SingularCenter> centers;
    if (K.singularity != Singularity::none) centers.push_back({x, detail::disk_radius(K.decay_rate, 0.0)});
    const Box box = detail::box_around(x, x, 16.0 / K.decay_rate);
    auto f = [&](const Point& y) -> cplx {
        if (y == x) return 0.0;
        return std::abs(row ? K(x, y) : K(y, x));
    };
    QuadraturePolicy pilot;
    pilot.max_evals = 20'000;
    const QuadResult p = integrate_half_plane(f, centers, box, 0.0, pilot);
    QuadraturePolicy fine;
    const QuadResult r = integrate_half_plane(f, centers, box, rel_tol * std::abs(p.value) + 1e-300, fine);
    return r.value.real() + r.err_estimate + detail::tail_estimate(f, box, K.decay_rate);
}

struct SchurReport {
    double bound = 0.0;    // sqrt(max_row * max_col), L2 operator norm bound
    double max_row = 0.0;  // L-infinity operator norm bound
    double max_col = 0.0;  // L1 operator norm bound
};

// x2 sampled geometrically in [0.02, 20]/decay; x1 over one period when the kernel is not x1-invariant
inline SchurReport schur_norm_report(const Kernel& K, int sample_grid, bool x1_invariant = true) {
    SchurReport rep;
    if (K.identically_zero) return rep;
    if (!(K.decay_rate > 0.0)) throw domain_error("schur bound needs decay_rate > 0");
    const int n = std::max(2, sample_grid);
    const double lo = 0.02 / K.decay_rate, hi = 20.0 / K.decay_rate;
    std::vector<double> x1s{0.0};
    if (!x1_invariant) x1s = {0.0, 0.25, 0.5, 0.75};
    for (int i = 0; i < n; ++i) {
        const double x2 = lo * std::pow(hi / lo, double(i) / (n - 1));
        for (double x1 : x1s) {
            rep.max_row = std::max(rep.max_row, abs_integral(K, {x1, x2}, true));
            rep.max_col = std::max(rep.max_col, abs_integral(K, {x1, x2}, false));
        }
    }
    rep.bound = std::sqrt(rep.max_row * rep.max_col);
    return rep;
}

inline double schur_norm_bound(const Kernel& K, int sample_grid) { return schur_norm_report(K, sample_grid).bound; }

struct NeumannPlan {
    int order = 0;
    double contraction_bound = 0.0;  // L2 (Schur) bound on the perturbation
    double row_bound = 0.0;          // L-infinity bound used by the pointwise tail
    double tail_bound = 0.0;         // c^{order+1}/(1-c), multiplied by the per-pair prefactor
};

// contraction check for T (and W S when pot is non-trivial); refuses when not certified
inline NeumannPlan plan_neumann(const FieldParams& fp, const SpectralParam& s, int order,
                                const PotentialConfig* pot = nullptr, int sample_grid = 12) {
    if (order < 0) throw domain_error("Neumann order must be >= 0");
    NeumannPlan plan;
    plan.order = order;
    const PotentialConfig none;
    const Kernel T = make_kernel(KernelKind::T, fp, none, s);
    SchurReport rep = schur_norm_report(T, sample_grid);
    if (pot && !pot->trivial()) {
        const Kernel W = make_kernel(KernelKind::WS, fp, *pot, s);
        const SchurReport w = schur_norm_report(W, sample_grid, false);
        rep.bound += w.bound;
        rep.max_row += w.max_row;
        rep.max_col += w.max_col;
    }
    plan.contraction_bound = rep.bound;
    plan.row_bound = rep.max_row;
    if (!(rep.bound < 1.0))
        throw contraction_error("perturbation series not certified: Schur bound " + std::to_string(rep.bound) + " >= 1",
                                rep.bound);
    const double c = std::max(rep.bound, rep.max_row);
    plan.tail_bound = c < 1.0 ? std::pow(c, order + 1) / (1.0 - c) : std::numeric_limits<double>::infinity();
    return plan;
}

struct ResolventValue {
    cplx value = 0.0;
    double quad_err = 0.0;
    double nystrom_err = 0.0;
    double tail_bound = 0.0;
    int order = 0;
    double total_err() const { return quad_err + nystrom_err + tail_bound; }
};

// Sum_{n<=N} S (-T')^n at point pairs, T' = T (+ W S for the full resolvent).
// value(x, x') = S(x, x') + int S(x, y) [q_1(y) + W2(y)] dy with q_1 = -T'(., x') exact and
// W2 = q_2 + ... + q_N from a Nystrom mesh around x'.
class ResolventEngine {
public:
    struct Options {
        double mesh_radius = 12.0;  // in units of 1 / Re kappa
        double x1_step = 0.3;       // in units of 1 / Re kappa
        double x2_panel = 1.0;      // in units of 1 / Re kappa
        int x2_order = 6;
        double rel_tol = 1e-6;
        long max_nodes = 60'000;
    };

    ResolventEngine(const FieldParams& fp, const PotentialConfig& pot, const SpectralParam& s, const NeumannPlan& plan,
                    const QuadraturePolicy& policy, Options opt)
        : b_(fp.b), pot_(pot), s_(s), plan_(plan), policy_(policy), opt_(opt) {
        pot_.b = b_;
        kr_ = s_.kappa.real();
        with_w_ = !pot_.trivial();
        if (plan_.contraction_bound >= 1.0)
            throw contraction_error("plan not certified", plan_.contraction_bound);
    }
    ResolventEngine(const FieldParams& fp, const PotentialConfig& pot, const SpectralParam& s, const NeumannPlan& plan,
                    const QuadraturePolicy& policy)
        : ResolventEngine(fp, pot, s, plan, policy, Options{}) {}

    bool free_case() const { return b_ == 0.0 && !with_w_; }

    ResolventValue evaluate(const Point& x, const Point& xp) const {
        ResolventValue out;
        out.order = plan_.order;
        const cplx s0 = s_kernel(b_, x, xp, s_);
        out.value = s0;
        if (free_case() || plan_.order == 0) {
            if (!free_case()) out.tail_bound = tail_prefactor(xp) * plan_.tail_bound;
            return out;
        }
        std::shared_ptr<const Mesh> mesh;
        if (plan_.order >= 2) mesh = mesh_for(xp);

        const double sep = norm(x - xp);
        std::vector<SingularCenter> centers{{x, detail::disk_radius(kr_, sep)}, {xp, detail::disk_radius(kr_, sep)}};
        const Box box = detail::box_around(x, xp, opt_.mesh_radius / kr_);
        auto g = [&](const Point& y) -> cplx {
            if (y == x || y == xp) return 0.0;
            cplx w = q1(y, xp);
            if (mesh) w += mesh->interpolate(y, xp);
            return s_kernel(b_, x, y, s_) * w;
        };
        const double target = std::max(policy_.target_abs_err * 1e-3, opt_.rel_tol * std::abs(s0));
        QuadraturePolicy pol = policy_;
        const QuadResult r = integrate_half_plane(g, centers, box, target, pol);
        out.value += r.value;
        out.quad_err = r.err_estimate + detail::tail_estimate(g, box, kr_);
        if (mesh) out.nystrom_err = mesh->rel_err * nystrom_scale(*mesh, x, xp);
        out.tail_bound = tail_prefactor(xp) * plan_.tail_bound;
        return out;
    }

    Kernel kernel() const {
        Kernel k;
        auto self = std::make_shared<ResolventEngine>(*this);
        k.evaluator = [self](const Point& x, const Point& y) { return self->evaluate(x, y).value; };
        k.singularity = Singularity::log;
        k.decay_rate = 0.5 * kr_;
        k.phase_factored = true;
        k.name = with_w_ ? "full_resolvent" : "neumann_resolvent";
        return k;
    }

    const NeumannPlan& plan() const { return plan_; }
    const SpectralParam& spectral() const { return s_; }

    // -T'(y, x')
    cplx q1(const Point& y, const Point& xp) const {
        cplx v = -t_kernel(b_, y, xp, s_);
        if (with_w_) v -= w_s_kernel(pot_, y, xp, s_);
        return v;
    }

private:
    struct Mesh {
        Point anchor;
        double hx = 0.0;
        int M = 0;  // x1 nodes anchor.x1 + i hx, |i| <= M
        std::vector<double> z2, w2;
        std::vector<double> edges;  // x2 panel edges
        int p = 0;
        std::vector<cplx> W2;  // (i1 + M) * n2 + i2
        double rel_err = 0.0;
        double sup_q1 = 0.0;

        int n2() const { return int(z2.size()); }

        // panel Lagrange in x2, 6-point Lagrange in x1; zero outside
        cplx interpolate(const Point& y, const Point& xp) const {
            const double t1 = (y.x1 - xp.x1) / hx;
            if (t1 < -M || t1 > M) return 0.0;
            if (y.x2 < edges.front() || y.x2 > edges.back()) return 0.0;
            const int P = int(edges.size()) - 1;
            int pan = int(std::upper_bound(edges.begin(), edges.end(), y.x2) - edges.begin()) - 1;
            pan = std::clamp(pan, 0, P - 1);
            double l2[10];
            for (int a = 0; a < p; ++a) {
                double v = 1.0;
                const double za = z2[std::size_t(pan * p + a)];
                for (int c = 0; c < p; ++c)
                    if (c != a) v *= (y.x2 - z2[std::size_t(pan * p + c)]) / (za - z2[std::size_t(pan * p + c)]);
                l2[a] = v;
            }
            int i0 = int(std::floor(t1)) - 2;
            i0 = std::clamp(i0, -M, M - 5);
            cplx acc = 0.0;
            for (int a = 0; a < 6; ++a) {
                double v = 1.0;
                for (int c = 0; c < 6; ++c)
                    if (c != a) v *= (t1 - (i0 + c)) / double(a - c);
                const std::size_t row = std::size_t(i0 + a + M) * std::size_t(n2());
                cplx s = 0.0;
                for (int k = 0; k < p; ++k) s += l2[k] * W2[row + std::size_t(pan * p + k)];
                acc += v * s;
            }
            return acc;
        }
    };

    double tail_prefactor(const Point& xp) const {
        // |int S(x,y) sum_{n>N} q_n| <= ||S(x,.)||_1 sup|q_1| c^{N}/(1-c); plan carries c^{N+1}/(1-c)
        const double c = std::max(plan_.contraction_bound, plan_.row_bound);
        if (!(c > 0.0)) return 0.0;
        const double srow = 1.0 / std::norm(s_.kappa) * (s_.is_real() ? 1.0 : 2.0 * std::abs(s_.kappa) / kr_);
        return srow * sup_q1(xp) / c;
    }

    double sup_q1(const Point& xp) const {
        if (with_w_) {
            // q_1 has a 1/r singularity; use its ring average at the inner mesh scale instead
            const double r0 = 0.3 / kr_;
            double m = 0.0;
            for (int k = 0; k < 16; ++k) {
                const double th = 2.0 * std::numbers::pi * k / 16;
                const Point y{xp.x1 + r0 * std::cos(th), xp.x2 + r0 * std::sin(th)};
                if (y.x2 > 0.0) m = std::max(m, std::abs(q1(y, xp)));
            }
            return m;
        }
        double m = 0.0;
        const double R = 6.0 / kr_;
        for (int i = -24; i <= 24; ++i)
            for (int j = 1; j <= 24; ++j) {
                const Point y{xp.x1 + R * i / 24.0, std::max(1e-6, xp.x2 + R * (j - 12) / 12.0)};
                if (y.x2 > 0.0 && !(y == xp)) m = std::max(m, std::abs(q1(y, xp)));
            }
        return m * 1.25;
    }

    double nystrom_scale(const Mesh& m, const Point& x, const Point& xp) const {
        // |sum_nodes S(x, node) W2(node) w|, a rough size of the W2 contribution
        cplx acc = 0.0;
        const int n2 = m.n2();
        for (int i1 = -m.M; i1 <= m.M; ++i1)
            for (int i2 = 0; i2 < n2; ++i2) {
                const Point y{xp.x1 + i1 * m.hx, m.z2[std::size_t(i2)]};
                if (norm(y - x) < 1e-12) continue;
                acc += s_kernel(b_, x, y, s_) * m.W2[std::size_t(i1 + m.M) * std::size_t(n2) + std::size_t(i2)] *
                       (m.hx * m.w2[std::size_t(i2)]);
            }
        return std::abs(acc);
    }

    struct Key {
        double x1, x2;
        bool operator<(const Key& o) const { return std::tie(x1, x2) < std::tie(o.x1, o.x2); }
    };

    std::shared_ptr<const Mesh> mesh_for(const Point& xp) const {
        // T (and the Peierls phase) are exactly x1-translation invariant; potentials are not
        const Key key{with_w_ ? xp.x1 : 0.0, xp.x2};
        {
            std::lock_guard<std::mutex> lk(cache_->mu);
            auto it = cache_->meshes.find(key);
            if (it != cache_->meshes.end()) return it->second;
        }
        auto m = std::make_shared<Mesh>(build_mesh({key.x1, xp.x2}));
        std::lock_guard<std::mutex> lk(cache_->mu);
        cache_->meshes[key] = m;
        return m;
    }

    Mesh build_mesh(const Point& anchor) const;
    cplx row_integral(int which, double y2) const;

    double b_;
    PotentialConfig pot_;
    SpectralParam s_;
    NeumannPlan plan_;
    QuadraturePolicy policy_;
    Options opt_;
    double kr_ = 1.0;
    bool with_w_ = false;

    struct Cache {
        std::mutex mu;
        std::map<Key, std::shared_ptr<const Mesh>> meshes;
        std::map<std::pair<int, double>, cplx> row_int;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// int_E K(y, z) dz for K in {S, p1 S, p2 S} at y = (0, y2); depends on y2 only
inline cplx ResolventEngine::row_integral(int which, double y2) const {
    {
        std::lock_guard<std::mutex> lk(cache_->mu);
        auto it = cache_->row_int.find({which, y2});
        if (it != cache_->row_int.end()) return it->second;
    }
    const Point y{0.0, y2};
    auto f = [&](const Point& z) -> cplx {
        if (z == y) return 0.0;
        if (which == 0) return s_kernel(b_, y, z, s_);
        return p_s_kernel(b_, y, z, s_)[std::size_t(which - 1)];
    };
    std::vector<SingularCenter> centers{{y, detail::disk_radius(kr_, 0.0)}};
    const Box box = detail::box_around(y, y, 16.0 / kr_);
    QuadraturePolicy pol = policy_;
    const double scale = which == 0 ? 1.0 / std::norm(s_.kappa) : 1.0 / std::abs(s_.kappa);
    const QuadResult r = integrate_half_plane(f, centers, box, 1e-8 * scale, pol);
    std::lock_guard<std::mutex> lk(cache_->mu);
    cache_->row_int[{which, y2}] = r.value;
    return r.value;
}

inline ResolventEngine::Mesh ResolventEngine::build_mesh(const Point& anchor) const {
    Mesh m;
    m.anchor = anchor;
    const double R = opt_.mesh_radius / kr_;
    m.hx = opt_.x1_step / kr_;
    m.M = int(std::ceil(R / m.hx));
    m.p = opt_.x2_order;
    const double w2 = opt_.x2_panel / kr_;
    const int k0 = int(std::floor(std::max(0.0, anchor.x2 - R) / w2));
    const int k1 = int(std::ceil((anchor.x2 + R) / w2));
    const auto& gl = quad::gauss_legendre(m.p);
    for (int k = k0; k <= k1; ++k) m.edges.push_back(k * w2);
    for (int k = k0; k < k1; ++k)
        for (int a = 0; a < m.p; ++a) {
            m.z2.push_back((k + gl.x[std::size_t(a)]) * w2);
            m.w2.push_back(gl.w[std::size_t(a)] * w2);
        }
    const int n1 = 2 * m.M + 1, n2 = m.n2();
    const long nodes = long(n1) * n2;
    if (nodes > opt_.max_nodes) throw budget_error("Nystrom mesh exceeds node budget");

    // Toeplitz tables over d = i1 - j1 in [-M, M]; beyond that |y - z| > R
    const int D = 2 * m.M + 1;
    const std::size_t nn = std::size_t(n2) * std::size_t(n2);
    std::vector<cplx> Ttab(std::size_t(D) * nn), Stab, P1tab, P2tab;
    if (with_w_) {
        Stab.resize(Ttab.size());
        P1tab.resize(Ttab.size());
        P2tab.resize(Ttab.size());
    }
    const double cut = R * 1.0 + 1e-12;
    for (int d = -m.M; d <= m.M; ++d)
        for (int i2 = 0; i2 < n2; ++i2)
            for (int j2 = 0; j2 < n2; ++j2) {
                const Point y{d * m.hx, m.z2[std::size_t(i2)]}, z{0.0, m.z2[std::size_t(j2)]};
                const std::size_t idx = std::size_t(d + m.M) * nn + std::size_t(i2) * n2 + std::size_t(j2);
                if (norm(y - z) > cut) continue;
                if (y == z) continue;  // T(y,y) = 0; singular tables use subtraction
                Ttab[idx] = t_kernel(b_, y, z, s_);
                if (with_w_) {
                    Stab[idx] = s_kernel(b_, y, z, s_);
                    const auto ps = p_s_kernel(b_, y, z, s_);
                    P1tab[idx] = ps[0];
                    P2tab[idx] = ps[1];
                }
            }

    // node data
    std::vector<cplx> q(static_cast<std::size_t>(nodes)), acc(std::size_t(nodes), 0.0);
    std::vector<double> wz(static_cast<std::size_t>(n2));
    for (int j2 = 0; j2 < n2; ++j2) wz[std::size_t(j2)] = m.w2[std::size_t(j2)] * m.hx;
    auto node = [&](int i1, int i2) { return Point{anchor.x1 + i1 * m.hx, m.z2[std::size_t(i2)]}; };
    for (int i1 = -m.M; i1 <= m.M; ++i1)
        for (int i2 = 0; i2 < n2; ++i2) {
            const cplx v = q1(node(i1, i2), anchor);
            q[std::size_t(i1 + m.M) * n2 + std::size_t(i2)] = v;
            m.sup_q1 = std::max(m.sup_q1, std::abs(v));
        }

    std::vector<std::array<double, 2>> Anode;
    std::vector<cplx> Cnode, IS, IP1, IP2;
    if (with_w_) {
        Anode.resize(static_cast<std::size_t>(nodes));
        Cnode.resize(static_cast<std::size_t>(nodes));
        for (int i1 = -m.M; i1 <= m.M; ++i1)
            for (int i2 = 0; i2 < n2; ++i2) {
                const Point y = node(i1, i2);
                const auto a = pot_.A(y);
                const std::size_t k = std::size_t(i1 + m.M) * n2 + std::size_t(i2);
                Anode[k] = a;
                Cnode[k] = cplx(a[0] * a[0] + a[1] * a[1] + pot_.scalar(y), pot_.divA(y));
            }
        IS.resize(std::size_t(n2));
        IP1.resize(std::size_t(n2));
        IP2.resize(std::size_t(n2));
        for (int i2 = 0; i2 < n2; ++i2) {
            IS[std::size_t(i2)] = row_integral(0, m.z2[std::size_t(i2)]);
            IP1[std::size_t(i2)] = row_integral(1, m.z2[std::size_t(i2)]);
            IP2[std::size_t(i2)] = row_integral(2, m.z2[std::size_t(i2)]);
        }
    }

    // q_{n+1} = -T' q_n
    auto apply = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        for (int i1 = -m.M; i1 <= m.M; ++i1)
            for (int i2 = 0; i2 < n2; ++i2) {
                const std::size_t ky = std::size_t(i1 + m.M) * n2 + std::size_t(i2);
                const cplx qy = in[ky];
                cplx sT = 0.0, sS = 0.0, s1 = 0.0, s2 = 0.0;
                for (int j1 = std::max(-m.M, i1 - m.M); j1 <= std::min(m.M, i1 + m.M); ++j1) {
                    const std::size_t base = std::size_t(i1 - j1 + m.M) * nn + std::size_t(i2) * n2;
                    const std::size_t kz0 = std::size_t(j1 + m.M) * n2;
                    for (int j2 = 0; j2 < n2; ++j2) {
                        const cplx qz = in[kz0 + std::size_t(j2)] * wz[std::size_t(j2)];
                        sT += Ttab[base + std::size_t(j2)] * qz;
                        if (with_w_) {
                            const cplx dq = (in[kz0 + std::size_t(j2)] - qy) * wz[std::size_t(j2)];
                            sS += Stab[base + std::size_t(j2)] * dq;
                            s1 += P1tab[base + std::size_t(j2)] * dq;
                            s2 += P2tab[base + std::size_t(j2)] * dq;
                        }
                    }
                }
                cplx tq = sT;
                if (with_w_) {
                    sS += qy * IS[std::size_t(i2)];
                    s1 += qy * IP1[std::size_t(i2)];
                    s2 += qy * IP2[std::size_t(i2)];
                    const auto& a = Anode[ky];
                    tq += -2.0 * (a[0] * s1 + a[1] * s2) + Cnode[ky] * sS;
                }
                out[ky] = -tq;
            }
    };

    m.W2.assign(std::size_t(nodes), 0.0);
    std::vector<cplx> cur = q, nxt(static_cast<std::size_t>(nodes));
    std::vector<cplx> q2;
    for (int n = 2; n <= plan_.order; ++n) {
        apply(cur, nxt);
        if (n == 2) q2 = nxt;
        for (std::size_t k = 0; k < m.W2.size(); ++k) m.W2[k] += nxt[k];
        std::swap(cur, nxt);
    }

    // spot-check q_2 at the largest nodes against adaptive quadrature of int T'(y,z) T'(z,x') dz
    if (!q2.empty()) {
        std::vector<std::size_t> order(q2.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::partial_sort(order.begin(), order.begin() + 3, order.end(),
                          [&](auto a, auto c) { return std::abs(q2[a]) > std::abs(q2[c]); });
        double worst = 0.0;
        const double qmax = std::abs(q2[order[0]]);
        for (int t = 0; t < 3; ++t) {
            const std::size_t k = order[std::size_t(t)];
            const int i1 = int(k / std::size_t(n2)) - m.M, i2 = int(k % std::size_t(n2));
            const Point y = node(i1, i2);
            auto f = [&](const Point& z) -> cplx {
                if (z == y || z == anchor) return 0.0;
                cplx a = t_kernel(b_, y, z, s_);
                if (with_w_) a += w_s_kernel(pot_, y, z, s_);
                return a * q1(z, anchor);
            };
            const double sep = norm(y - anchor);
            std::vector<SingularCenter> centers{{y, detail::disk_radius(kr_, sep)},
                                                {anchor, detail::disk_radius(kr_, sep)}};
            const Box box = detail::box_around(y, anchor, opt_.mesh_radius / kr_);
            QuadraturePolicy pol = policy_;
            pol.max_evals = 400'000;
            const QuadResult r = integrate_half_plane(f, centers, box, 1e-4 * qmax, pol);
            const cplx ref = -r.value;
            worst = std::max(worst, (std::abs(ref - q2[k]) + r.err_estimate) / qmax);
        }
        m.rel_err = worst;
    }
    return m;
}

inline ResolventEngine neumann_resolvent(const FieldParams& fp, const SpectralParam& s, const NeumannPlan& plan,
                                         const QuadraturePolicy& policy) {
    return ResolventEngine(fp, PotentialConfig{}, s, plan, policy);
}

inline ResolventEngine full_resolvent(const PotentialConfig& cfg, const SpectralParam& s, const NeumannPlan& plan,
                                      const QuadraturePolicy& policy) {
    return ResolventEngine(FieldParams{cfg.b}, cfg, s, plan, policy);
}

struct PhaseSample {
    Point x, xp;
    double lambda = 0, r = 0;
    double abs_diff = 0;  // |e^{-i b phi} resolvent - R_E|
    double err = 0;       // engine error estimate
};

struct PhaseReport {
    std::vector<PhaseSample> samples;
    EnvelopeFit envelope;           // |K_b - R_E| <= C lambda^{-1} exp(-delta sqrt(lambda) r)
    // sup over the r1 pairs of |K_b - R_E|, largest lambda over smallest lambda
    double ratio_r1 = 0;
    double ratio_r1_compensated = 0;  // smallest lambda evaluated on the pairs scaled by sqrt(lambda_max / lambda_min)
    double ratio_r1_envelope = 0;     // raw ratio with the fitted exp(-delta sqrt(lambda) r) divided out
    double expected_ratio = 0;      // lambda_min / lambda_max
    std::vector<cplx> dq_coarse, dq_fine;  // central b-difference quotients at the two steps
    double dq_rel_change = 0;       // max |dq_fine - dq_coarse| / |dq_fine|
};

struct PhaseCheckOptions {
    int order = 6;
    int dq_pairs = 3;                   // first pairs used for the b-derivative check
    double dq_coarse = 1e-2, dq_fine = 1e-3;
    // pairs at |x - x'| = 1 for the lambda ratio: horizontal and vertical at several heights
    std::vector<std::pair<Point, Point>> r1_pairs{
        {{0.0, 0.02}, {1.0, 0.02}}, {{0.0, 0.1}, {1.0, 0.1}}, {{0.0, 0.3}, {1.0, 0.3}}, {{0.0, 1.0}, {1.0, 1.0}},
        {{0.0, 0.02}, {0.0, 1.02}}, {{0.0, 0.1}, {0.0, 1.1}}, {{0.0, 0.3}, {0.0, 1.3}}, {{0.0, 1.0}, {0.0, 2.0}}};
};

// K_b - R_E = e^{-i b phi} (resolvent - S_b); the difference avoids cancellation
inline PhaseReport phase_factorization_check(const FieldParams& fp, const std::vector<double>& lambdas,
                                             const std::vector<std::pair<Point, Point>>& pairs,
                                             const QuadraturePolicy& policy, const PhaseCheckOptions& opt = {}) {
    if (lambdas.empty()) throw domain_error("no lambda values");
    PhaseReport rep;
    auto correction = [](const ResolventEngine& e, double b, const Point& x, const Point& xp, double* err) {
        const ResolventValue v = e.evaluate(x, xp);
        if (err) *err = v.total_err();
        return std::conj(peierls_factor(b, x, xp)) * (v.value - s_kernel(b, x, xp, e.spectral()));
    };
    auto engine = [&](double b, double lambda) {
        const SpectralParam s = SpectralParam::from_lambda(lambda);
        return neumann_resolvent(FieldParams{b}, s, plan_neumann(FieldParams{b}, s, opt.order), policy);
    };
    std::vector<double> t, v, pre;
    double lo = *std::min_element(lambdas.begin(), lambdas.end()), hi = *std::max_element(lambdas.begin(), lambdas.end());
    double at_lo = 0.0, at_hi = 0.0, at_lo_scaled = 0.0;
    for (double lambda : lambdas) {
        const ResolventEngine e = engine(fp.b, lambda);
        for (const auto& [x, xp] : pairs) {
            PhaseSample ps{x, xp, lambda, norm(x - xp), 0.0, 0.0};
            ps.abs_diff = std::abs(correction(e, fp.b, x, xp, &ps.err));
            rep.samples.push_back(ps);
            t.push_back(std::sqrt(lambda) * ps.r);
            v.push_back(ps.abs_diff);
            pre.push_back(1.0 / lambda);
        }
        for (const auto& [x, xp] : opt.r1_pairs) {
            if (lambda == lo) {
                const double sc = std::sqrt(hi / lo);
                at_lo = std::max(at_lo, std::abs(correction(e, fp.b, x, xp, nullptr)));
                at_lo_scaled = std::max(at_lo_scaled, std::abs(correction(e, fp.b, x * sc, xp * sc, nullptr)));
            }
            if (lambda == hi) at_hi = std::max(at_hi, std::abs(correction(e, fp.b, x, xp, nullptr)));
        }
    }
    rep.envelope = fit_envelope(t, v, pre);
    rep.expected_ratio = lo / hi;
    if (at_lo > 0.0) {
        rep.ratio_r1 = at_hi / at_lo;
        rep.ratio_r1_envelope = rep.ratio_r1 * std::exp(rep.envelope.delta * (std::sqrt(hi) - std::sqrt(lo)));
    }
    if (at_lo_scaled > 0.0) rep.ratio_r1_compensated = at_hi / at_lo_scaled;
    // smoothness in b at the smallest lambda
    const int nd = std::min<int>(opt.dq_pairs, int(pairs.size()));
    if (nd > 0) {
        auto quotients = [&](double h) {
            const ResolventEngine ep = engine(fp.b + h, lo), em = engine(fp.b - h, lo);
            std::vector<cplx> q;
            for (int k = 0; k < nd; ++k) {
                const auto& [x, xp] = pairs[std::size_t(k)];
                // K_b = R_E + correction
                q.push_back((correction(ep, fp.b + h, x, xp, nullptr) - correction(em, fp.b - h, x, xp, nullptr)) / (2.0 * h));
            }
            return q;
        };
        rep.dq_coarse = quotients(opt.dq_coarse);
        rep.dq_fine = quotients(opt.dq_fine);
        for (int k = 0; k < nd; ++k) {
            const double a = std::abs(rep.dq_fine[std::size_t(k)]);
            if (a > 0.0)
                rep.dq_rel_change = std::max(rep.dq_rel_change, std::abs(rep.dq_fine[std::size_t(k)] - rep.dq_coarse[std::size_t(k)]) / a);
        }
    }
    return rep;
}

} // namespace magedge

#endif
