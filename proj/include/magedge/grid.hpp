#ifndef MAGEDGE_GRID_HPP
#define MAGEDGE_GRID_HPP

// Finite-difference Peierls Hamiltonian on a Dirichlet box. Boundary sites are
// dropped, so the matrix acts on interior sites only.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <arpack/arpack.hpp>

#include "errors.hpp"
#include "geometry.hpp"
#include "potentials.hpp"

namespace magedge {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;
using CVec = Eigen::VectorXcd;

enum class BoxKind { edge, bulk };

struct GridSpec {
    BoxKind kind = BoxKind::edge;
    double x1lo = -5, x1hi = 5, x2lo = 0, x2hi = 5;
    double h = 0.1;
    PotentialConfig cfg;  // cfg.b is the field

    // [-L1, L1] x (0, L2]
    static GridSpec edge(double L1, double L2, double h, PotentialConfig cfg = {}) {
        return {BoxKind::edge, -L1, L1, 0.0, L2, h, std::move(cfg)};
    }
    // [-L1, L1] x [-L2, L2]
    static GridSpec bulk(double L1, double L2, double h, PotentialConfig cfg = {}) {
        return {BoxKind::bulk, -L1, L1, -L2, L2, h, std::move(cfg)};
    }
    static GridSpec bulk_window(double x1lo, double x1hi, double x2lo, double x2hi, double h, PotentialConfig cfg = {}) {
        return {BoxKind::bulk, x1lo, x1hi, x2lo, x2hi, h, std::move(cfg)};
    }

    int n1() const { return int(std::lround((x1hi - x1lo) / h)) - 1; }
    int n2() const { return int(std::lround((x2hi - x2lo) / h)) - 1; }
};

struct GridHamiltonian {
    GridSpec spec;
    SpMat H;
    std::vector<Point> sites;
    int n1 = 0, n2 = 0;

    int dimension() const { return int(sites.size()); }
    double h() const { return spec.h; }
    // site (i, j), 1-based interior indices
    int index(int i, int j) const { return (i - 1) * n2 + (j - 1); }
    Point coord(int i, int j) const { return {spec.x1lo + i * spec.h, spec.x2lo + j * spec.h}; }

    std::optional<int> site_at(const Point& x, double tol = 1e-9) const {
        const double fi = (x.x1 - spec.x1lo) / spec.h, fj = (x.x2 - spec.x2lo) / spec.h;
        const long i = std::lround(fi), j = std::lround(fj);
        if (std::abs(fi - i) > tol || std::abs(fj - j) > tol) return std::nullopt;
        if (i < 1 || i > n1 || j < 1 || j > n2) return std::nullopt;
        return index(int(i), int(j));
    }
    int site_or_throw(const Point& x) const {
        auto s = site_at(x);
        if (!s) throw domain_error("point is not an interior grid site");
        return *s;
    }
};

namespace detail {

// integral of (bA + calA).dl from y to x along the straight link; A = (-x2, 0)
inline double link_phase(const PotentialConfig& cfg, const Point& y, const Point& x) {
    const Point m{0.5 * (x.x1 + y.x1), 0.5 * (x.x2 + y.x2)};
    const Point d = x - y;
    double th = cfg.b * (-m.x2) * d.x1;
    if (!cfg.vector_free()) {
        const auto a = cfg.A(m);
        th += a[0] * d.x1 + a[1] * d.x2;
    }
    return th;
}

} // namespace detail

inline double hermiticity_residual(const SpMat& H) {
    const SpMat D = H - SpMat(H.adjoint());
    double m = 0.0;
    for (int k = 0; k < D.outerSize(); ++k)
        for (SpMat::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

inline GridHamiltonian assemble(const GridSpec& spec) {
    if (!(spec.h > 0.0)) throw domain_error("grid spacing must be positive");
    const double r1 = (spec.x1hi - spec.x1lo) / spec.h, r2 = (spec.x2hi - spec.x2lo) / spec.h;
    if (std::abs(r1 - std::round(r1)) > 1e-9 || std::abs(r2 - std::round(r2)) > 1e-9)
        throw domain_error("box sides must be integer multiples of h");
    if (std::abs(spec.cfg.b) * spec.h * spec.h > 0.2) throw domain_error("flux per plaquette b h^2 exceeds 0.2");
    if (spec.kind == BoxKind::edge && spec.x2lo != 0.0) throw domain_error("edge box must start at x2 = 0");
    GridHamiltonian g;
    g.spec = spec;
    g.n1 = spec.n1();
    g.n2 = spec.n2();
    if (g.n1 < 1 || g.n2 < 1) throw domain_error("box too small for spacing");
    const int n = g.n1 * g.n2;
    g.sites.resize(std::size_t(n));
    const double ih2 = 1.0 / (spec.h * spec.h);
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(std::size_t(n) * 5);
    for (int i = 1; i <= g.n1; ++i)
        for (int j = 1; j <= g.n2; ++j) {
            const int s = g.index(i, j);
            const Point x = g.coord(i, j);
            g.sites[std::size_t(s)] = x;
            trip.emplace_back(s, s, 4.0 * ih2 + spec.cfg.scalar(x));
            const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
            for (const auto& q : nb) {
                if (q[0] < 1 || q[0] > g.n1 || q[1] < 1 || q[1] > g.n2) continue;
                const Point y = g.coord(q[0], q[1]);
                // H_{x,y} = -exp(i int_y^x a.dl) / h^2
                const double th = detail::link_phase(spec.cfg, y, x);
                trip.emplace_back(s, g.index(q[0], q[1]), -ih2 * cplx(std::cos(th), std::sin(th)));
            }
        }
    g.H.resize(n, n);
    g.H.setFromTriplets(trip.begin(), trip.end());
    g.H.makeCompressed();
    return g;
}

// factorization of H - z reused across right-hand sides
class GridResolvent {
public:
    GridResolvent(const GridHamiltonian& g, cplx z, double tol = 1e-10) : z_(z), tol_(tol) {
        SpMat I(g.H.rows(), g.H.cols());
        I.setIdentity();
        A_ = g.H - z * I;
        lu_.analyzePattern(A_);
        lu_.factorize(A_);
        if (lu_.info() != Eigen::Success) throw solver_error("sparse LU failed for H - z", 1.0);
    }
    // plain factor solve, no residual check (shift-invert iterations)
    CVec solve_unchecked(const CVec& rhs) const { return lu_.solve(rhs); }

    CVec solve(const CVec& rhs) const {
        CVec u = lu_.solve(rhs);
        const double nr = rhs.norm();
        double res = nr > 0.0 ? (A_ * u - rhs).norm() / nr : 0.0;
        if (res > tol_) {
            // one step of iterative refinement before giving up
            u += lu_.solve(CVec(rhs - A_ * u));
            res = (A_ * u - rhs).norm() / nr;
            if (res > tol_) throw solver_error("resolvent solve residual above tolerance", res);
        }
        return u;
    }
    cplx z() const { return z_; }

private:
    cplx z_;
    double tol_;
    SpMat A_;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

// H - z for many z sharing one symbolic analysis
class ShiftedFamily {
public:
    explicit ShiftedFamily(const GridHamiltonian& g, double tol = 1e-10) : H_(g.H), tol_(tol) {
        I_.resize(H_.rows(), H_.cols());
        I_.setIdentity();
        A_ = H_ - cplx(0.0, 1.0) * I_;
        lu_.analyzePattern(A_);
    }
    void factorize(cplx z) {
        A_ = H_ - z * I_;
        lu_.factorize(A_);
        if (lu_.info() != Eigen::Success) throw solver_error("sparse LU failed for H - z", 1.0);
    }
    CVec solve(const CVec& rhs) const {
        CVec u = lu_.solve(rhs);
        const double nr = rhs.norm();
        const double res = nr > 0.0 ? (A_ * u - rhs).norm() / nr : 0.0;
        if (res > tol_) throw solver_error("resolvent solve residual above tolerance", res);
        return u;
    }
    // (H - conj z)^{-1} rhs through the adjoint of the current factors
    CVec solve_conjugate(const CVec& rhs) const {
        CVec u = lu_.adjoint().solve(rhs);
        const double nr = rhs.norm();
        const double res = nr > 0.0 ? (SpMat(A_.adjoint()) * u - rhs).norm() / nr : 0.0;
        if (res > tol_) throw solver_error("resolvent solve residual above tolerance", res);
        return u;
    }

private:
    SpMat H_, I_, A_;
    double tol_;
    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

inline CVec resolve(const GridHamiltonian& g, cplx z, const CVec& rhs) { return GridResolvent(g, z).solve(rhs); }

// continuum kernel (H - z)^{-1}(x, x') ~ [(H - z)^{-1}]_{ij} / h^2
inline cplx grid_resolvent_entry(const GridHamiltonian& g, const GridResolvent& R, const Point& x, const Point& xp) {
    const int i = g.site_or_throw(x), j = g.site_or_throw(xp);
    CVec e = CVec::Zero(g.dimension());
    e(j) = 1.0;
    return R.solve(e)(i) / (g.h() * g.h());
}

// D H D^*, D = diag(exp(i chi(x))); same sites, same spectrum
inline GridHamiltonian gauge_conjugate(const GridHamiltonian& g, const std::function<double(const Point&)>& chi) {
    GridHamiltonian out = g;
    std::vector<cplx> d(g.sites.size());
    for (std::size_t s = 0; s < d.size(); ++s) d[s] = std::polar(1.0, chi(g.sites[s]));
    for (int k = 0; k < out.H.outerSize(); ++k)
        for (SpMat::InnerIterator it(out.H, k); it; ++it)
            it.valueRef() *= d[std::size_t(it.row())] * std::conj(d[std::size_t(it.col())]);
    return out;
}

// i [H, X1]: entries i H_{st} (x1_t - x1_s)
inline SpMat current_operator(const GridHamiltonian& g) {
    SpMat J = g.H;
    for (int k = 0; k < J.outerSize(); ++k)
        for (SpMat::InnerIterator it(J, k); it; ++it) {
            const double d = g.sites[std::size_t(it.col())].x1 - g.sites[std::size_t(it.row())].x1;
            it.valueRef() = cplx(0.0, 1.0) * it.value() * d;
        }
    J.prune(cplx(0.0));
    return J;
}

struct EigenSystem {
    Eigen::VectorXd E;
    Eigen::MatrixXcd V;  // columns are eigenvectors
};

constexpr int default_eig_budget = 20000;

// full Hermitian eigendecomposition (LAPACK zheevd)
inline EigenSystem eig_dense(const GridHamiltonian& g, int budget = default_eig_budget) {
    const int n = g.dimension();
    if (n > budget) throw budget_error("dimension " + std::to_string(n) + " exceeds eigensolve budget");
    EigenSystem es;
    es.V = Eigen::MatrixXcd(g.H);
    es.E.resize(n);
    const lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, es.V.data(), n, es.E.data());
    if (info != 0) throw solver_error("zheevd failed with info " + std::to_string(info), double(info));
    return es;
}

// F(H) entry (t, s) from a decomposition
class SpectralFunction {
public:
    SpectralFunction(std::shared_ptr<const EigenSystem> es, const std::function<double(double)>& F) : es_(std::move(es)) {
        f_.resize(es_->E.size());
        for (Eigen::Index k = 0; k < es_->E.size(); ++k) f_(k) = F(es_->E(k));
    }
    cplx entry(int t, int s) const {
        return (es_->V.row(t).array() * f_.transpose().array().cast<cplx>() * es_->V.row(s).conjugate().array()).sum();
    }
    CVec apply(const CVec& v) const {
        const CVec c = es_->V.adjoint() * v;
        return es_->V * (f_.cast<cplx>().array() * c.array()).matrix();
    }
    Eigen::MatrixXcd dense() const { return es_->V * f_.cast<cplx>().asDiagonal() * es_->V.adjoint(); }
    const Eigen::VectorXd& values() const { return f_; }

private:
    std::shared_ptr<const EigenSystem> es_;
    Eigen::VectorXd f_;
};

inline Eigen::MatrixXcd function_of_operator_eig(const GridHamiltonian& g, const std::function<double(double)>& F,
                                                 int budget = default_eig_budget) {
    auto es = std::make_shared<const EigenSystem>(eig_dense(g, budget));
    return SpectralFunction(es, F).dense();
}

// eigenvalues of H nearest sigma by shift-invert Arnoldi (ARPACK)
inline std::vector<double> eigenvalues_near(const GridHamiltonian& g, double sigma, int nev, double tol = 1e-10) {
    const int n = g.dimension();
    if (nev >= n - 1) {
        const auto es = eig_dense(g);
        std::vector<double> e(es.E.data(), es.E.data() + n);
        std::sort(e.begin(), e.end(), [&](double a, double b) { return std::abs(a - sigma) < std::abs(b - sigma); });
        e.resize(std::size_t(std::min(nev, n)));
        std::sort(e.begin(), e.end());
        return e;
    }
    GridResolvent R(g, cplx(sigma, 0.0), 1e-8);
    const int ncv = std::min(n, std::max(2 * nev + 1, nev + 20));
    std::vector<cplx> resid(static_cast<std::size_t>(n)), v(std::size_t(n) * ncv), workd(3 * std::size_t(n)),
        workl(std::size_t(3 * ncv * ncv + 5 * ncv)), d(std::size_t(nev + 1)), workev(2 * std::size_t(ncv));
    std::vector<double> rwork(static_cast<std::size_t>(ncv));
    a_int iparam[11] = {}, ipntr[14] = {};
    iparam[0] = 1;
    iparam[2] = 10 * n;
    iparam[6] = 3;
    a_int ido = 0, info = 0;
    const a_int lworkl = a_int(workl.size());
    while (true) {
        arpack::naupd(ido, arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, tol, resid.data(), ncv,
                      v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, rwork.data(), info);
        if (ido == -1 || ido == 1) {
            Eigen::Map<CVec> x(workd.data() + ipntr[0] - 1, n), y(workd.data() + ipntr[1] - 1, n);
            y = R.solve_unchecked(CVec(x));
        } else {
            break;
        }
    }
    if (info < 0) throw solver_error("ARPACK naupd failed with info " + std::to_string(info), double(info));
    std::vector<a_int> select(static_cast<std::size_t>(ncv));
    arpack::neupd(0, arpack::howmny::ritz_vectors, select.data(), d.data(), nullptr, n, cplx(sigma, 0.0),
                  workev.data(), arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, tol, resid.data(),
                  ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, rwork.data(), info);
    if (info != 0) throw solver_error("ARPACK neupd failed with info " + std::to_string(info), double(info));
    std::vector<double> e;
    for (int k = 0; k < iparam[4]; ++k) e.push_back(d[std::size_t(k)].real());
    std::sort(e.begin(), e.end());
    return e;
}

struct LandauCluster {
    int level = 0;
    double expected = 0.0;  // (2n+1) b
    double center = 0.0;    // lowest eigenvalue among those nearest the expected value
    double rel_err = 0.0;
    std::vector<double> eigenvalues;
};

inline std::vector<LandauCluster> landau_clusters(const GridHamiltonian& g, int levels, int nev = 12) {
    const double b = g.spec.cfg.b;
    if (b == 0.0) throw domain_error("no Landau levels at b = 0");
    std::vector<LandauCluster> out;
    for (int n = 0; n < levels; ++n) {
        LandauCluster c;
        c.level = n;
        c.expected = (2 * n + 1) * std::abs(b);
        c.eigenvalues = eigenvalues_near(g, c.expected, nev);
        // walls only push states up, so the bottom of the window is the bulk level
        c.center = *std::min_element(c.eigenvalues.begin(), c.eigenvalues.end());
        c.rel_err = std::abs(c.center - c.expected) / c.expected;
        out.push_back(std::move(c));
    }
    return out;
}

enum class Averaging { none, x1_cell, disorder };

inline const char* to_string(Averaging a) {
    switch (a) {
    case Averaging::none: return "none";
    case Averaging::x1_cell: return "x1-cell-average";
    case Averaging::disorder: return "disorder-average";
    }
    return "?";
}

struct ProfileSample {
    double x1 = 0, x2 = 0, value = 0, stderr_ = 0;
    double imag_residue = 0;
};

struct CurrentDensityProfile {
    std::vector<ProfileSample> samples;
    Averaging averaging = Averaging::none;
    double b = 0, mu = 0, T = 0;
    std::vector<std::uint64_t> seeds;
    bool imag_flag = false;  // some |Im| exceeded 1e-10
};

// (J F)_{ss} / h^2 for a Hermitian J with x1-directed links only
inline cplx current_diagonal(const GridHamiltonian& g, const SpMat& J, const std::function<cplx(int, int)>& F_entry,
                             int s) {
    cplx acc = 0.0;
    // J is Hermitian, so row s of J is the conjugate of column s
    for (SpMat::InnerIterator it(J, s); it; ++it) acc += std::conj(it.value()) * F_entry(int(it.row()), s);
    return acc / (g.h() * g.h());
}

// samples at (x1, x2); x1_cell averages over the sites x1 + k h, k h in [0, 1)
inline CurrentDensityProfile current_density(const GridHamiltonian& g, const std::function<cplx(int, int)>& F_entry,
                                             const std::vector<Point>& points, Averaging averaging) {
    CurrentDensityProfile prof;
    prof.averaging = averaging;
    prof.b = g.spec.cfg.b;
    const SpMat J = current_operator(g);
    const int per = std::max(1, int(std::lround(1.0 / g.h())));
    for (const auto& p : points) {
        ProfileSample smp;
        smp.x1 = p.x1;
        smp.x2 = p.x2;
        cplx v = 0.0;
        if (averaging == Averaging::x1_cell) {
            for (int k = 0; k < per; ++k) v += current_diagonal(g, J, F_entry, g.site_or_throw({p.x1 + k * g.h(), p.x2}));
            v /= double(per);
        } else {
            v = current_diagonal(g, J, F_entry, g.site_or_throw(p));
        }
        smp.value = v.real();
        smp.imag_residue = std::abs(v.imag());
        if (smp.imag_residue > 1e-10) prof.imag_flag = true;
        prof.samples.push_back(smp);
    }
    return prof;
}

// mean and standard error across per-seed profiles sharing abscissae
inline CurrentDensityProfile disorder_average(const std::vector<CurrentDensityProfile>& runs,
                                              std::vector<std::uint64_t> seeds) {
    if (runs.empty()) throw domain_error("no runs to average");
    CurrentDensityProfile out = runs.front();
    out.averaging = Averaging::disorder;
    out.seeds = std::move(seeds);
    const double m = double(runs.size());
    for (std::size_t k = 0; k < out.samples.size(); ++k) {
        double s = 0.0, s2 = 0.0;
        for (const auto& r : runs) {
            s += r.samples[k].value;
            s2 += r.samples[k].value * r.samples[k].value;
        }
        const double mean = s / m;
        const double var = runs.size() > 1 ? std::max(0.0, (s2 - m * mean * mean) / (m - 1.0)) : 0.0;
        out.samples[k].value = mean;
        out.samples[k].stderr_ = std::sqrt(var / m);
    }
    return out;
}

} // namespace magedge

#endif
