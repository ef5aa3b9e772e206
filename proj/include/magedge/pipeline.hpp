#ifndef MAGEDGE_PIPELINE_HPP
#define MAGEDGE_PIPELINE_HPP

// one run function per command; results are plain structs, IO lives in the tool

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "composition.hpp"
#include "decayfit.hpp"
#include "gpt.hpp"
#include "grid.hpp"
#include "hscalc.hpp"
#include "kernels.hpp"
#include "potentials.hpp"
#include "specfun.hpp"

namespace magedge {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- landau-levels

struct LandauConfig {
    double b = 1.0, h = 0.1, L = 12.0;  // box [-L, L]^2
    int levels = 3, nev = 12;
    double tol = 0.02;
};

struct LandauRow {
    int level = 0;
    double expected = 0, center = 0, rel_err = 0;
    std::vector<double> eigenvalues;
};

struct LandauResult {
    std::vector<LandauRow> rows;
    int dimension = 0;
    double dirichlet_max_dev = 0;  // b = 0: lowest eigenvalues vs the exact box spectrum
    bool pass = false;
};

// exact lowest eigenvalues of the Dirichlet 5-point Laplacian on an n1 x n2 interior grid
inline std::vector<double> dirichlet_box_spectrum(int n1, int n2, double h, int count) {
    std::vector<double> e;
    for (int p = 1; p <= n1; ++p)
        for (int q = 1; q <= n2; ++q) {
            const double s1 = std::sin(std::numbers::pi * p / (2.0 * (n1 + 1))), s2 = std::sin(std::numbers::pi * q / (2.0 * (n2 + 1)));
            e.push_back(4.0 / (h * h) * (s1 * s1 + s2 * s2));
        }
    std::sort(e.begin(), e.end());
    e.resize(std::size_t(std::min<int>(count, int(e.size()))));
    return e;
}

inline LandauResult run_landau_levels(const LandauConfig& c) {
    PotentialConfig pc;
    pc.b = c.b;
    const auto g = assemble(GridSpec::bulk(c.L, c.L, c.h, pc));
    LandauResult res;
    res.dimension = g.dimension();
    if (c.b == 0.0) {
        const auto exact = dirichlet_box_spectrum(g.n1, g.n2, c.h, c.nev);
        // shift below the bottom of the spectrum so the nearest eigenvalues are the lowest ones
        auto got = eigenvalues_near(g, exact.front() - 1.0, c.nev);
        LandauRow row;
        row.eigenvalues = got;
        for (std::size_t k = 0; k < got.size(); ++k)
            res.dirichlet_max_dev = std::max(res.dirichlet_max_dev, std::abs(got[k] - exact[k]) / exact[k]);
        res.rows.push_back(row);
        res.pass = res.dirichlet_max_dev < 1e-8;
        return res;
    }
    res.pass = true;
    for (const auto& cl : landau_clusters(g, c.levels, c.nev)) {
        res.rows.push_back({cl.level, cl.expected, cl.center, cl.rel_err, cl.eigenvalues});
        if (!(cl.rel_err <= c.tol)) res.pass = false;
    }
    return res;
}

// ---- resolvent-compare

struct ResolventCompareConfig {
    double b = 1.0, lambda = 50.0, h = 0.05;
    double box_L1 = 4.0, box_L2 = 5.0;  // edge grid [-L1, L1] x (0, L2]
    double background = 0.0;            // amplitude of the smooth periodic A, V
    int order = 8;
    double target_abs_err = 1e-8;
    double tol = 0.03;
    bool refine = true;                 // also run the grid at h/2
    std::vector<std::pair<Point, Point>> pairs{
        {{0, 1}, {1, 1}},     {{0, 1}, {0, 1.3}},   {{0, 0.5}, {0.5, 0.5}}, {{0, 1}, {0.6, 1.8}},
        {{0, 2}, {2, 2}},     {{0, 0.3}, {0.3, 0.7}}, {{0, 1}, {1.2, 1.9}}, {{0, 0.2}, {1.5, 0.2}},
        {{0, 1.5}, {0.35, 1.5}}, {{0, 1}, {0.7, 1.7}}};
};

struct ResolventRow {
    Point x, xp;
    cplx kernel = 0.0;
    double kernel_err = 0;
    cplx grid = 0.0, grid_fine = 0.0, richardson = 0.0;
    double dev = 0, dev_fine = 0, dev_richardson = 0;
};

struct ResolventCompareResult {
    std::vector<ResolventRow> rows;
    double contraction_bound = 0;
    double max_dev = 0, max_dev_fine = 0;
    bool shrinks = false;  // every pair's deviation drops at h/2
    bool pass = false;
};

namespace detail {

// grid resolvent entries at (x, xp) for every pair, one solve per distinct xp
inline std::vector<cplx> grid_entries(const ResolventCompareConfig& c, const PotentialConfig& pc, double h) {
    const auto g = assemble(GridSpec::edge(c.box_L1, c.box_L2, h, pc));
    GridResolvent R(g, cplx(-c.lambda, 0.0));
    std::map<std::pair<double, double>, CVec> cols;
    std::vector<cplx> out;
    for (const auto& [x, xp] : c.pairs) {
        auto key = std::make_pair(xp.x1, xp.x2);
        auto it = cols.find(key);
        if (it == cols.end()) {
            CVec e = CVec::Zero(g.dimension());
            e(g.site_or_throw(xp)) = 1.0;
            it = cols.emplace(key, R.solve(e)).first;
        }
        out.push_back(it->second(g.site_or_throw(x)) / (h * h));
    }
    return out;
}

} // namespace detail

inline ResolventCompareResult run_resolvent_compare(const ResolventCompareConfig& c) {
    PotentialConfig pc = c.background != 0.0 ? smooth_background(c.background, c.b) : PotentialConfig{};
    pc.b = c.b;
    const SpectralParam s = SpectralParam::from_lambda(c.lambda);
    const NeumannPlan plan = plan_neumann(FieldParams{c.b}, s, c.order, &pc);
    QuadraturePolicy pol;
    pol.target_abs_err = c.target_abs_err;
    const ResolventEngine eng = full_resolvent(pc, s, plan, pol);

    ResolventCompareResult res;
    res.contraction_bound = plan.contraction_bound;
    const auto coarse = detail::grid_entries(c, pc, c.h);
    std::vector<cplx> fine;
    if (c.refine) fine = detail::grid_entries(c, pc, 0.5 * c.h);
    res.shrinks = c.refine;
    res.pass = true;
    for (std::size_t k = 0; k < c.pairs.size(); ++k) {
        ResolventRow r;
        r.x = c.pairs[k].first;
        r.xp = c.pairs[k].second;
        const ResolventValue v = eng.evaluate(r.x, r.xp);
        r.kernel = v.value;
        r.kernel_err = v.total_err();
        r.grid = coarse[k];
        r.dev = std::abs(r.kernel - r.grid) / std::abs(r.grid);
        if (c.refine) {
            r.grid_fine = fine[k];
            r.richardson = (4.0 * r.grid_fine - r.grid) / 3.0;
            r.dev_fine = std::abs(r.kernel - r.grid_fine) / std::abs(r.grid_fine);
            r.dev_richardson = std::abs(r.kernel - r.richardson) / std::abs(r.richardson);
            if (!(r.dev_fine < r.dev)) res.shrinks = false;
            res.max_dev_fine = std::max(res.max_dev_fine, r.dev_fine);
        }
        res.max_dev = std::max(res.max_dev, r.dev);
        if (!(r.dev <= c.tol)) res.pass = false;
        res.rows.push_back(r);
    }
    return res;
}

// ---- edge-current

enum class FMethod { eig, hs };

struct DisorderSpec {
    int seeds = 0;  // 0 = no disorder
    double amplitude = 0.5;
    double bump_radius = 0.4;
    DisorderLaw law = DisorderLaw::uniform;
};

struct EdgeCurrentConfig {
    double b = 1.0, T = 0.2, mu = 2.0, h = 0.25;
    double L1 = 7.0, L2 = 14.0;             // edge box [-L1, L1] x (0, L2]
    double bulk_lo = -7.0, bulk_hi = 14.0;  // bulk box [-L1, L1] x [bulk_lo, bulk_hi]; same top wall as the edge box
    double x2_max = 7.0;                    // deepest abscissa
    std::vector<double> x1_samples{0.0, 0.25, 0.5, 0.75};
    double background = 0.0;
    FMethod method = FMethod::eig;
    int N = 5;
    double cutoff_width = 1.0;
    double hs_z2_min = 0.1, hs_panel_scale = 3.0;  // strip quadrature of the HS route
    DecayOptions decay;
    DisorderSpec disorder;
    std::uint64_t seed = 1;
};

struct EdgeProfileRow {
    double x1 = 0, x2 = 0, edge = 0, bulk = 0, diff = 0, edge_stderr = 0;
};

struct EdgeCurrentResult {
    std::vector<EdgeProfileRow> rows;
    DecayReport decay;
    double bulk_center_current = 0;     // x1-cell average at the bulk box center
    double E0 = 0;                      // bottom of the edge spectrum
    bool imag_flag = false;
    std::vector<CurrentDensityProfile> per_seed;  // disorder runs
    bool pass = false;
    bool inconclusive = false;
};

namespace detail {

inline PotentialConfig edge_potential(const EdgeCurrentConfig& c, std::optional<std::uint64_t> seed) {
    PotentialConfig pc = c.background != 0.0 ? smooth_background(c.background, c.b) : PotentialConfig{};
    pc.b = c.b;
    if (seed) {
        const int L = int(std::ceil(std::max({c.L1, c.L2, std::abs(c.bulk_lo), std::abs(c.bulk_hi)}))) + 1;
        pc.disorder = sample_disorder(*seed, L, c.disorder.law, c.disorder.bump_radius, c.disorder.amplitude);
    }
    return pc;
}

// F entries on g for the sites the profile touches
struct FOperator {
    std::function<cplx(int, int)> entry;
    double E0 = 0;
};

inline FOperator fermi_operator(const GridHamiltonian& g, const EdgeCurrentConfig& c, const std::vector<Point>& pts,
                                std::optional<double> E0_hint = std::nullopt) {
    FOperator out;
    if (c.method == FMethod::eig) {
        auto es = std::make_shared<const EigenSystem>(eig_dense(g));
        out.E0 = E0_hint.value_or(es->E(0) - 0.5);
        const FermiParams fp{c.mu, c.T, out.E0, c.cutoff_width};
        auto sf = std::make_shared<SpectralFunction>(es, [fp](double x) { return fermi_schwartz_value(fp, x); });
        out.entry = [sf](int t, int s) { return sf->entry(t, s); };
        return out;
    }
    // HS: columns of F at the sample sites and their x1 neighbours
    const auto low = eigenvalues_near(g, -10.0, 1);
    out.E0 = E0_hint.value_or(low.front() - 0.5);
    const FermiParams fp{c.mu, c.T, out.E0, c.cutoff_width};
    auto aa = almost_analytic_fermi(fp, c.N);
    std::vector<int> sites;
    for (const auto& p : pts) sites.push_back(g.site_or_throw(p));
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(g.dimension(), Eigen::Index(sites.size()));
    std::map<int, Eigen::Index> col;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        V(sites[k], Eigen::Index(k)) = 1.0;
        col[sites[k]] = Eigen::Index(k);
    }
    StripQuadrature q;
    q.z1_scale = std::min(0.25, c.T);
    q.z2_min = c.hs_z2_min;
    q.panel_scale = c.hs_panel_scale;
    auto out_cols = std::make_shared<Eigen::MatrixXcd>(hs_apply(g, aa, q, V).out);
    out.entry = [out_cols, col](int t, int s) { return (*out_cols)(t, col.at(s)); };
    return out;
}

inline CurrentDensityProfile profile_on(const GridHamiltonian& g, const EdgeCurrentConfig& c, const std::vector<Point>& pts,
                                        const FOperator& F) {
    auto p = current_density(g, F.entry, pts, Averaging::none);
    p.mu = c.mu;
    p.T = c.T;
    return p;
}

inline std::vector<Point> profile_points(const EdgeCurrentConfig& c) {
    std::vector<Point> pts;
    const int K = int(std::floor(c.x2_max / c.h + 1e-9));
    for (int k = 1; k <= K; ++k)
        for (double x1 : c.x1_samples) pts.push_back({x1, k * c.h});
    return pts;
}

} // namespace detail

inline EdgeCurrentResult run_edge_current(const EdgeCurrentConfig& c) {
    EdgeCurrentResult res;
    const auto pts = detail::profile_points(c);

    auto one = [&](std::optional<std::uint64_t> seed, CurrentDensityProfile& edge, CurrentDensityProfile& bulk,
                   double& center) {
        const PotentialConfig pc = detail::edge_potential(c, seed);
        const auto ge = assemble(GridSpec::edge(c.L1, c.L2, c.h, pc));
        const auto gb = assemble(GridSpec::bulk_window(-c.L1, c.L1, c.bulk_lo, c.bulk_hi, c.h, pc));
        const auto Fe = detail::fermi_operator(ge, c, pts);
        res.E0 = Fe.E0;
        edge = detail::profile_on(ge, c, pts, Fe);
        // same E0 on both boxes so F is the same function
        const double mid = c.h * std::round(0.5 * (c.bulk_lo + c.bulk_hi) / c.h);
        std::vector<Point> bpts = pts;
        const int per = std::max(1, int(std::lround(1.0 / c.h)));
        for (int k = 0; k < per; ++k) bpts.push_back({k * c.h, mid});
        const auto Fb = detail::fermi_operator(gb, c, bpts, Fe.E0);
        bulk = detail::profile_on(gb, c, pts, Fb);
        center = current_density(gb, Fb.entry, {{0.0, mid}}, Averaging::x1_cell).samples.front().value;
    };

    CurrentDensityProfile edge, bulk;
    if (c.disorder.seeds <= 0) {
        one(std::nullopt, edge, bulk, res.bulk_center_current);
    } else {
        std::vector<CurrentDensityProfile> er, br;
        std::vector<std::uint64_t> seeds;
        double csum = 0;
        for (int k = 0; k < c.disorder.seeds; ++k) {
            const std::uint64_t sd = c.seed + std::uint64_t(k);
            CurrentDensityProfile e, b;
            double cc = 0;
            one(sd, e, b, cc);
            er.push_back(e);
            br.push_back(b);
            seeds.push_back(sd);
            csum += cc;
        }
        res.per_seed = er;
        edge = disorder_average(er, seeds);
        bulk = disorder_average(br, seeds);
        res.bulk_center_current = csum / c.disorder.seeds;
    }
    res.imag_flag = edge.imag_flag || bulk.imag_flag;
    for (std::size_t k = 0; k < edge.samples.size(); ++k) {
        const auto &e = edge.samples[k], &b = bulk.samples[k];
        res.rows.push_back({e.x1, e.x2, e.value, b.value, e.value - b.value, e.stderr_});
    }
    res.decay = superpoly_check(edge, bulk, c.decay);
    res.pass = res.decay.verdict == Verdict::pass;
    res.inconclusive = res.decay.verdict == Verdict::inconclusive;
    return res;
}

// ---- gauge covariance of the current diagonal

struct GaugeCheckConfig {
    double b = 1.0, T = 0.2, mu = 2.0, h = 0.25;
    double L1 = 4.0, L2 = 5.0;
    double background = 0.3;
    std::uint64_t seed = 3;
    double tol = 1e-10;
};

struct GaugeCheckResult {
    double max_abs_diff = 0;  // over every site, complex diagonal
    double max_abs_value = 0;
    int sites = 0;
    bool pass = false;
};

// diag(i[H, X1] F(H)) before and after H -> D H D^*, D a random diagonal phase
inline GaugeCheckResult run_gauge_check(const GaugeCheckConfig& c) {
    PotentialConfig pc = c.background != 0.0 ? smooth_background(c.background, c.b) : PotentialConfig{};
    pc.b = c.b;
    const auto g = assemble(GridSpec::edge(c.L1, c.L2, c.h, pc));
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
    std::map<std::pair<long, long>, double> chi;
    for (const auto& p : g.sites) chi[{std::lround(p.x1 / c.h), std::lround(p.x2 / c.h)}] = ph(rng);
    const auto gc = gauge_conjugate(g, [&](const Point& p) { return chi.at({std::lround(p.x1 / c.h), std::lround(p.x2 / c.h)}); });

    auto diag = [&](const GridHamiltonian& gg) {
        auto es = std::make_shared<const EigenSystem>(eig_dense(gg));
        const FermiParams fp{c.mu, c.T, es->E(0) - 0.5, 1.0};
        const SpectralFunction sf(es, [fp](double x) { return fermi_schwartz_value(fp, x); });
        const SpMat J = current_operator(gg);
        std::vector<cplx> d;
        for (int s = 0; s < gg.dimension(); ++s)
            d.push_back(current_diagonal(gg, J, [&](int t, int u) { return sf.entry(t, u); }, s));
        return d;
    };
    const auto d0 = diag(g), d1 = diag(gc);
    GaugeCheckResult r;
    r.sites = g.dimension();
    for (std::size_t s = 0; s < d0.size(); ++s) {
        r.max_abs_diff = std::max(r.max_abs_diff, std::abs(d0[s] - d1[s]));
        r.max_abs_value = std::max(r.max_abs_value, std::abs(d0[s]));
    }
    r.pass = r.max_abs_diff <= c.tol;
    return r;
}

// ---- disorder ergodicity

struct ErgodicityConfig {
    double b = 1.0, T = 0.2, mu = 2.0, h = 0.25;
    double L1 = 7.0, L2 = 8.0;  // edge box only; side walls 6 away keep the x1 shift effect near 3e-5
    double x1 = 0.0;            // profiles at x1 and x1 + 1, each cell-averaged over [x, x + 1)
    double x2_probe = 1.0;
    double x2_max = 4.0;
    double background = 0.0;
    DisorderSpec disorder{16, 0.5, 0.4, DisorderLaw::uniform};
    std::uint64_t seed = 1;
    double rel_se_max = 0.1;
    double z_max = 2.0;
};

struct ErgodicityRow {
    double x2 = 0, mean_a = 0, se_a = 0, mean_b = 0, se_b = 0, diff = 0, se_diff = 0;
};

struct ErgodicityResult {
    std::vector<ErgodicityRow> rows;   // a at x1, b at x1 + 1
    double probe_mean = 0, probe_se = 0, probe_rel_se = 0;
    double max_z = 0;                  // max |mean_b - mean_a| / sqrt(se_a^2 + se_b^2) over x2
    double max_z_paired = 0;           // same with the paired-difference SE (diagnostic)
    int exceed = 0;                    // abscissae with z above z_max
    std::vector<std::vector<double>> per_seed_a;  // [seed][x2]
    bool pass_se = false, pass_translation = false, pass = false;
};

inline ErgodicityResult run_disorder_ergodicity(const ErgodicityConfig& c) {
    if (c.disorder.seeds < 2) throw domain_error("ergodicity check needs at least two seeds");
    EdgeCurrentConfig ec;
    ec.b = c.b;
    ec.T = c.T;
    ec.mu = c.mu;
    ec.h = c.h;
    ec.L1 = c.L1;
    ec.L2 = c.L2;
    ec.bulk_lo = 0.0;
    ec.bulk_hi = c.L2;
    ec.background = c.background;
    ec.disorder = c.disorder;

    std::vector<double> x2s;
    const int K = int(std::floor(c.x2_max / c.h + 1e-9));
    for (int k = 1; k <= K; ++k) x2s.push_back(k * c.h);
    std::size_t probe = 0;
    for (std::size_t k = 0; k < x2s.size(); ++k)
        if (std::abs(x2s[k] - c.x2_probe) < std::abs(x2s[probe] - c.x2_probe)) probe = k;
    std::vector<Point> pts;
    for (double x2 : x2s) pts.push_back({c.x1, x2});
    for (double x2 : x2s) pts.push_back({c.x1 + 1.0, x2});

    const std::size_t m = x2s.size();
    const int S = c.disorder.seeds;
    std::vector<std::vector<double>> A, B;
    for (int k = 0; k < S; ++k) {
        const auto pc = detail::edge_potential(ec, c.seed + std::uint64_t(k));
        const auto g = assemble(GridSpec::edge(c.L1, c.L2, c.h, pc));
        auto es = std::make_shared<const EigenSystem>(eig_dense(g));
        const FermiParams fp{c.mu, c.T, es->E(0) - 0.5, 1.0};
        const SpectralFunction sf(es, [fp](double x) { return fermi_schwartz_value(fp, x); });
        const auto prof = current_density(g, [&](int t, int s) { return sf.entry(t, s); }, pts, Averaging::x1_cell);
        std::vector<double> a(m), b(m);
        for (std::size_t i = 0; i < m; ++i) {
            a[i] = prof.samples[i].value;
            b[i] = prof.samples[m + i].value;
        }
        A.push_back(a);
        B.push_back(b);
    }
    auto mean_se = [S](const std::vector<double>& v) {
        double s = 0, s2 = 0;
        for (double x : v) s += x;
        const double mu = s / S;
        for (double x : v) s2 += (x - mu) * (x - mu);
        return std::pair{mu, std::sqrt(s2 / (S - 1) / S)};
    };
    ErgodicityResult res;
    res.per_seed_a = A;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> a, b, d;
        for (int k = 0; k < S; ++k) {
            a.push_back(A[std::size_t(k)][i]);
            b.push_back(B[std::size_t(k)][i]);
            d.push_back(b.back() - a.back());
        }
        ErgodicityRow r;
        r.x2 = x2s[i];
        std::tie(r.mean_a, r.se_a) = mean_se(a);
        std::tie(r.mean_b, r.se_b) = mean_se(b);
        // paired: both cells see the same realisation
        std::tie(r.diff, r.se_diff) = mean_se(d);
        auto zscore = [](double d, double se) { return se > 0 ? std::abs(d) / se : (d == 0 ? 0.0 : INFINITY); };
        const double z = zscore(r.mean_b - r.mean_a, std::hypot(r.se_a, r.se_b));
        res.max_z = std::max(res.max_z, z);
        if (z > c.z_max) ++res.exceed;
        res.max_z_paired = std::max(res.max_z_paired, zscore(r.diff, r.se_diff));
        res.rows.push_back(r);
    }
    res.probe_mean = res.rows[probe].mean_a;
    res.probe_se = res.rows[probe].se_a;
    res.probe_rel_se = res.probe_se / std::abs(res.probe_mean);
    res.pass_se = res.probe_rel_se < c.rel_se_max;
    res.pass_translation = res.max_z <= c.z_max;
    res.pass = res.pass_se && res.pass_translation;
    return res;
}

// ---- hs-check

struct HsCheckConfig {
    double b = 1.0, mu = 2.0, T = 0.5, h = 0.2;
    double half_width = 4.1;            // box [-w, w]^2, 40 x 40 sites at the defaults
    std::vector<int> N_values{3, 5};
    double z2_min = 0.1;
    double panel_scale = 3.0;
    bool refine = true;                 // also at doubled node density
    double tol = 1e-3;
    std::uint64_t seed = 1;
};

struct HsRow {
    int N = 0;
    double panel_scale = 0, z2_min = 0;
    long nodes = 0;
    double rel_err = 0, truncation_bound = 0, C_N = 0, seconds = 0;
};

struct HsCheckResult {
    std::vector<HsRow> rows;
    std::vector<std::pair<int, double>> C_N_fits;       // N = 2..6
    std::vector<std::pair<int, double>> ray_exponents;  // fitted d ln|dbar F_N| / d ln z2 near the axis
    int dimension = 0;
    double E0 = 0;
    bool pass = false;
};

// slope of ln|dbar F_N(z1 + i y)| against ln y on y in [y_lo, y_hi]
inline double ray_exponent(const AlmostAnalytic& aa, double z1, double y_lo = 1e-3, double y_hi = 0.3, int n = 12) {
    std::vector<double> t, v;
    for (int k = 0; k < n; ++k) {
        const double y = y_lo * std::pow(y_hi / y_lo, double(k) / (n - 1));
        const double a = std::abs(dbar_eval(aa, {z1, y}));
        if (a > 0.0) {
            t.push_back(std::log(y));
            v.push_back(std::log(a));
        }
    }
    if (t.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return fit_line(t, v).slope;
}

inline HsCheckResult run_hs_check(const HsCheckConfig& c) {
    PotentialConfig pc;
    pc.b = c.b;
    const auto g = assemble(GridSpec::bulk_window(-c.half_width, c.half_width, -c.half_width, c.half_width, c.h, pc));
    HsCheckResult res;
    res.dimension = g.dimension();
    auto es = std::make_shared<const EigenSystem>(eig_dense(g));
    res.E0 = es->E(0) - 0.5;
    const FermiParams fp{c.mu, c.T, res.E0, 1.0};
    SpectralFunction SF(es, [&](double x) { return fermi_schwartz_value(fp, x); });
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    CVec v(g.dimension());
    for (auto& x : v) x = cplx(nd(rng), nd(rng));
    const CVec ref = SF.apply(v);

    std::vector<double> scales{c.panel_scale};
    if (c.refine) scales.push_back(0.5 * c.panel_scale);
    res.pass = false;
    for (int N : c.N_values)
        for (double ps : scales) {
            auto aa = almost_analytic_fermi(fp, N);
            fit_C_N(aa);
            StripQuadrature q;
            q.z2_min = c.z2_min;
            q.panel_scale = ps;
            q.z1_scale = std::min(0.25, c.T);
            const auto t0 = std::chrono::steady_clock::now();
            const HSResult r = hs_apply(g, aa, q, v);
            HsRow row{N, ps, c.z2_min, r.nodes, (r.out.col(0) - ref).norm() / v.norm(), r.truncation_bound, aa.C_N_fitted,
                      seconds_since(t0)};
            if (N == 5 && ps == c.panel_scale && row.rel_err <= c.tol) res.pass = true;
            res.rows.push_back(row);
        }
    for (int N = 2; N <= 6; ++N) {
        auto aa = almost_analytic_fermi(fp, N);
        res.C_N_fits.push_back({N, fit_C_N(aa)});
        res.ray_exponents.push_back({N, ray_exponent(aa, c.mu)});
        if (!std::isfinite(aa.C_N_fitted)) res.pass = false;
    }
    return res;
}

// ---- gpt-check

struct GptCheckConfig {
    double b = 1.0, ell = 9.0;
    cplx z{2.0, 0.5};
    std::vector<double> hs{0.2, 0.1, 0.05};
    double L1 = 6.0, L2 = 10.0, bulk_lo = -6.0;
    double background = 0.0;
    double min_order = 1.0;
    std::uint64_t seed = 7;
};

struct GptRow {
    double h = 0, residual = 0, W_norm = 0;
    int edge_sites = 0, bulk_sites = 0;
};

struct GptCheckResult {
    std::vector<GptRow> rows;
    CutoffReport cutoffs;
    double order = 0;  // least-squares slope of ln residual vs ln h
    bool pass = false;
};

inline GptCheckResult run_gpt_check(const GptCheckConfig& c) {
    GptCheckResult res;
    const auto cut = build_cutoffs(c.ell);
    res.cutoffs = verify_cutoffs(cut);
    PotentialConfig pc = c.background != 0.0 ? smooth_background(c.background, c.b) : PotentialConfig{};
    pc.b = c.b;
    std::vector<double> lh, lr;
    for (double h : c.hs) {
        const auto ge = assemble(GridSpec::edge(c.L1, c.L2, h, pc));
        const auto gb = assemble(GridSpec::bulk_window(-c.L1, c.L1, c.bulk_lo, c.L2, h, pc));
        const CVec f = smooth_test_vector(ge, c.seed);
        const auto r = gpt_identity_residual(ge, gb, cut, c.z, f);
        res.rows.push_back({h, r.residual, r.W_norm, ge.dimension(), gb.dimension()});
        lh.push_back(std::log(h));
        lr.push_back(std::log(r.residual));
    }
    if (lh.size() >= 2) res.order = fit_line(lh, lr).slope;
    res.pass = res.order >= c.min_order;
    return res;
}

// ---- specfun-selftest

struct SelftestRow {
    std::string name;
    double value = 0, reference = 0, rel_err = 0, tol = 0;
    bool pass = false;
};

struct SelftestResult {
    std::vector<SelftestRow> rows;
    bool pass = false;
};

inline SelftestResult run_specfun_selftest(double tol = 1e-12) {
    SelftestResult res;
    auto add = [&](std::string name, double v, double ref, double t) {
        const double e = std::abs(v - ref) / std::abs(ref);
        res.rows.push_back({std::move(name), v, ref, e, t, e <= t});
    };
    // reference values: 40-digit quadrature of the cosh integral representations
    add("k0(1)", specfun::k0(1.0).value, 0.42102443824070833334, tol);
    add("k1(1)", specfun::k1(1.0).value, 0.60190723019723457474, tol);
    add("k0(2)", specfun::k0(2.0).value, 0.11389387274953343565, tol);
    add("k0(3)", specfun::k0(3.0).value, 0.034739504386279248072, tol);
    add("k1(3)", specfun::k1(3.0).value, 0.040156431128194184377, tol);
    add("k0(50)", specfun::k0(50.0).value, 3.4101677497894955139e-23, tol);
    add("1e-6*k1(1e-6)", 1e-6 * specfun::k1(1e-6).value, 0.99999999999278427896, tol);
    add("|k0(1+i)|", std::abs(specfun::k0_complex({1.0, 1.0}).value),
        std::abs(cplx(0.080197726946517818727, -0.35727745928533025061)), 1e-10);
    // K1' = -K0 - K1/x against central differences, 100 log-spaced points
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const double x = 1e-3 * std::pow(5e4, k / 99.0), d = 1e-5 * x;
        const double fd = (specfun::k1(x + d).value - specfun::k1(x - d).value) / (2 * d);
        const double rhs = -specfun::k0(x).value - specfun::k1(x).value / x;
        worst = std::max(worst, std::abs(fd - rhs) / std::abs(rhs));
    }
    res.rows.push_back({"K1' recurrence (max rel)", worst, 0.0, worst, 1e-6, worst <= 1e-6});
    res.pass = std::all_of(res.rows.begin(), res.rows.end(), [](const SelftestRow& r) { return r.pass; });
    return res;
}

} // namespace magedge

#endif
