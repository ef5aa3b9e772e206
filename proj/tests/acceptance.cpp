// One test per acceptance criterion; each prints a single PASS/FAIL line.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <magedge/pipeline.hpp>

using namespace magedge;

namespace {

void report(int n, bool ok, const std::string& detail) {
    std::printf("ACCEPTANCE %2d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    EXPECT_TRUE(ok) << "criterion " << n << ": " << detail;
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

} // namespace

TEST(Acceptance, C01_SpecialFunctions) {
    const auto r = run_specfun_selftest(1e-12);
    const double e0 = std::abs(specfun::k0(1.0).value - 0.42102443824070833334) / 0.42102443824070833334;
    const double e1 = std::abs(specfun::k1(1.0).value - 0.60190723019723457474) / 0.60190723019723457474;
    double rec = 0;
    for (const auto& row : r.rows)
        if (row.name.rfind("K1'", 0) == 0) rec = row.value;
    report(1, r.pass && e0 <= 1e-12 && e1 <= 1e-12 && rec <= 1e-6,
           fmt("k0(1) rel %.2e, k1(1) rel %.2e, recurrence max rel %.2e over 100 points", e0, e1, rec));
}

TEST(Acceptance, C02_ImageIdentity) {
    const auto s = SpectralParam::from_lambda(1.0);
    const auto R = dirichlet_kernel_object(s);
    QuadraturePolicy p;
    p.target_abs_err = 1e-4;
    const auto q = compose(R, R, {0, 1}, {0, 2}, p);
    const double err = std::abs(q.value - 0.038311613717848567517);
    report(2, err <= p.target_abs_err, fmt("value %.8f, |error| %.2e, estimate %.2e, target 1e-4", q.value.real(), err, q.err_estimate));
}

TEST(Acceptance, C03_CrossEngineResolvent) {
    ResolventCompareConfig c;  // b = 1, lambda = 50, h = 0.05 and 0.025, 10 pairs
    const auto r = run_resolvent_compare(c);
    int over = 0;
    double rmin = 1e9, rmax = 0;
    for (const auto& row : r.rows) {
        if (row.dev > 0.03) ++over;
        rmin = std::min(rmin, norm(row.x - row.xp));
        rmax = std::max(rmax, norm(row.x - row.xp));
    }
    const bool ok = r.rows.size() == 10 && r.max_dev <= 0.03 && r.shrinks && rmin >= 0.3 && rmax <= 2.0;
    report(3, ok, fmt("max dev %.4f at h=0.05 (%d of %zu pairs above 3%%), h=0.025 max dev %.4f, shrinks %s", r.max_dev,
                      over, r.rows.size(), r.max_dev_fine, r.shrinks ? "yes" : "no"));
}

TEST(Acceptance, C04_PhaseFactorization) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<std::pair<Point, Point>> pairs;
    for (int i = 0; i < 25; ++i) {
        const Point xp{0.0, 0.2 + 1.8 * U(rng)};
        for (int j = 0; j < 20; ++j) {
            const double r = 0.05 + 1.45 * U(rng), th = 2 * std::numbers::pi * U(rng);
            Point x{xp.x1 + r * std::cos(th), xp.x2 + r * std::sin(th)};
            if (x.x2 <= 0.02) x.x2 = 0.02 + U(rng);
            pairs.push_back({x, xp});
        }
    }
    QuadraturePolicy pol;
    pol.target_abs_err = 1e-8;
    const auto rep = phase_factorization_check(FieldParams{1.0}, {50.0, 200.0}, pairs, pol);
    const double q = rep.ratio_r1_compensated / rep.expected_ratio;
    const bool ok = rep.samples.size() >= 1000 && rep.envelope.violations == 0 && rep.envelope.delta > 0 && q >= 0.5 && q <= 2.0;
    report(4, ok, fmt("%zu samples, fitted C %.3g delta %.3f, violations %d; lambda ratio %.4f (compensated) vs %.4f",
                      rep.samples.size(), rep.envelope.C, rep.envelope.delta, rep.envelope.violations,
                      rep.ratio_r1_compensated, rep.expected_ratio));
}

TEST(Acceptance, C05_LandauLevels) {
    LandauConfig c;  // b = 1, L = 12
    c.h = 0.1;
    const auto a = run_landau_levels(c);
    c.h = 0.05;
    const auto b = run_landau_levels(c);
    bool ok = a.pass;
    std::ostringstream os;
    for (std::size_t n = 0; n < a.rows.size(); ++n) {
        const double ratio = a.rows[n].rel_err / b.rows[n].rel_err;
        if (!(ratio >= 3.0 && ratio <= 5.0)) ok = false;
        os << fmt("E%zu %.5f (err %.2e, x%.2f at h/2) ", n, a.rows[n].center, a.rows[n].rel_err, ratio);
    }
    report(5, ok, os.str());
}

TEST(Acceptance, C06_HelfferSjostrand) {
    HsCheckConfig c;  // 40 x 40 sites, N in {3, 5}
    const auto r = run_hs_check(c);
    double err5 = NAN;
    for (const auto& row : r.rows)
        if (row.N == 5 && row.panel_scale == c.panel_scale) err5 = row.rel_err;
    bool finite = true, rays = true;
    std::ostringstream os;
    for (const auto& [N, cn] : r.C_N_fits) finite = finite && std::isfinite(cn);
    for (const auto& [N, p] : r.ray_exponents) {
        if (!(std::abs(p - N) <= 0.05)) rays = false;
        os << fmt("%d:%.3f ", N, p);
    }
    report(6, r.dimension == 1600 && err5 <= 1e-3 && finite && rays,
           fmt("%d sites, N=5 rel err %.2e; C_N finite for N=2..6: %s; ray exponents ", r.dimension, err5,
               finite ? "yes" : "no") + os.str());
}

TEST(Acceptance, C07_GluingIdentity) {
    GptCheckConfig c;  // ell = 9, z = 2 + 0.5i, h in {0.2, 0.1, 0.05}
    const auto r = run_gpt_check(c);
    std::ostringstream os;
    for (const auto& row : r.rows) os << fmt("h=%.2f %.3e ", row.h, row.residual);
    report(7, r.pass && r.order >= 1.0, fmt("order %.2f; ", r.order) + os.str());
}

TEST(Acceptance, C08_EdgeCurrentDecay) {
    EdgeCurrentConfig c;  // b = 1, T = 0.2, mu = 2
    c.decay.require_gaussian = true;
    const auto a = run_edge_current(c);
    c.background = 0.3;
    c.decay.require_gaussian = false;
    const auto b = run_edge_current(c);
    const bool ok = std::abs(a.bulk_center_current) <= 1e-3 && a.pass && a.decay.max_exponent > 6 &&
                    a.decay.gaussian_r2 >= 0.95 && b.pass;
    report(8, ok,
           fmt("pure Landau: bulk center %.2e, max exponent %.1f (>= 6 at x2 = %.2f), Gaussian r2 %.3f, %s; background 0.3: %s (max exponent %.1f)",
               a.bulk_center_current, a.decay.max_exponent, a.decay.x2_threshold, a.decay.gaussian_r2,
               to_string(a.decay.verdict), to_string(b.decay.verdict), b.decay.max_exponent));
}

TEST(Acceptance, C09_GaugeInvariance) {
    GaugeCheckConfig c;
    const auto r = run_gauge_check(c);
    report(9, r.pass && r.max_abs_diff <= 1e-10,
           fmt("max |diff| %.2e over %d sites (max |value| %.2e)", r.max_abs_diff, r.sites, r.max_abs_value));
}

TEST(Acceptance, C10_DisorderErgodicity) {
    ErgodicityConfig c;  // 16 seeds
    const auto r = run_disorder_ergodicity(c);
    report(10, r.pass_se && r.pass_translation,
           fmt("x2=1: mean %.4e, SE/mean %.3f (< 0.1: %s); x1 vs x1+1: max z %.2f, %d abscissae above 2 (paired z %.2f)",
               r.probe_mean, r.probe_rel_se, r.pass_se ? "yes" : "no", r.max_z, r.exceed, r.max_z_paired));
}
