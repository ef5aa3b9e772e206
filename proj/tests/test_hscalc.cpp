#include <gtest/gtest.h>

#include <boost/math/special_functions/hermite.hpp>
#include <cmath>
#include <memory>
#include <random>

#include <magedge/hscalc.hpp>

using namespace magedge;

namespace {

// d^n/dx^n e^{-x^2} = (-1)^n H_n(x) e^{-x^2}
DerivFn gaussian() {
    return [](double x, int order) {
        std::vector<double> d(std::size_t(order + 1));
        for (int n = 0; n <= order; ++n)
            d[std::size_t(n)] = (n % 2 ? -1.0 : 1.0) * boost::math::hermite(unsigned(n), x) * std::exp(-x * x);
        return d;
    };
}

struct Box {
    GridHamiltonian g;
    std::shared_ptr<const EigenSystem> es;
    CVec v;
};

const Box& small_box() {
    static const Box b = [] {
        PotentialConfig c;
        c.b = 1.0;
        Box out{assemble(GridSpec::bulk_window(-2.1, 2.1, -2.1, 2.1, 0.2, c)), nullptr, {}};
        out.es = std::make_shared<const EigenSystem>(eig_dense(out.g));
        std::mt19937_64 rng(1);
        std::normal_distribution<double> nd;
        out.v.resize(out.g.dimension());
        for (auto& x : out.v) x = cplx(nd(rng), nd(rng));
        return out;
    }();
    return b;
}

double hs_error(double T, int N, double z2_min, double panel_scale, double* trunc = nullptr) {
    const auto& b = small_box();
    const FermiParams fp{2.0, T, b.es->E(0) - 0.5, 1.0};
    const SpectralFunction SF(b.es, [&](double x) { return fermi_schwartz_value(fp, x); });
    auto aa = almost_analytic_fermi(fp, N);
    StripQuadrature q;
    q.z2_min = z2_min;
    q.panel_scale = panel_scale;
    q.z1_scale = std::min(0.25, T);
    const auto r = hs_apply(b.g, aa, q, b.v);
    if (trunc) *trunc = r.truncation_bound;
    return (r.out.col(0) - SF.apply(b.v)).norm() / b.v.norm();
}

} // namespace

TEST(HsCalc, DbarVanishesOnAxis) {
    auto aa = make_almost_analytic(gaussian(), 2, -6, 6);
    for (double x : {-3.0, -0.4, 0.0, 1.0, 2.5}) EXPECT_EQ(dbar_eval(aa, {x, 0.0}), cplx(0.0));
    auto fa = almost_analytic_fermi(FermiParams{2.0, 0.2, 0.5, 1.0}, 4);
    for (double x : {-1.0, 0.0, 2.0, 3.0}) EXPECT_EQ(dbar_eval(fa, {x, 0.0}), cplx(0.0));
}

TEST(HsCalc, GaussianExample) {
    // 1/2 F'''(1) (0.25 i)^2 / 2!, F''' = (12x - 8x^3) e^{-x^2}
    auto aa = make_almost_analytic(gaussian(), 2, -6, 6);
    const cplx v = dbar_eval(aa, {1.0, 0.25});
    EXPECT_NEAR(v.real(), -0.0229924650732151451, 1e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(HsCalc, DbarMatchesFiniteDifferences) {
    // independent of the telescoped formula: differentiate F_N itself
    auto aa = make_almost_analytic(gaussian(), 3, -6, 6);
    const double e = 1e-5;
    for (cplx z : {cplx(1.0, 0.25), cplx(-0.3, 0.6), cplx(0.7, 0.8), cplx(0.2, -0.7)}) {
        const cplx d1 = (almost_analytic_value(aa, z + e) - almost_analytic_value(aa, z - e)) / (2 * e);
        const cplx d2 = (almost_analytic_value(aa, z + cplx(0, e)) - almost_analytic_value(aa, z - cplx(0, e))) / (2 * e);
        EXPECT_LE(std::abs(0.5 * (d1 + cplx(0, 1) * d2) - dbar_eval(aa, z)), 1e-8) << z;
    }
}

TEST(HsCalc, CNFinite) {
    for (int N = 2; N <= 6; ++N) {
        auto aa = almost_analytic_fermi(FermiParams{2.0, 0.5, 0.5, 1.0}, N);
        const double c = fit_C_N(aa);
        EXPECT_TRUE(std::isfinite(c)) << N;
        EXPECT_GT(c, 0.0);
    }
}

TEST(HsCalc, FermiProfile) {
    const FermiParams fp{2.0, 0.2, 0.5, 1.0};
    EXPECT_DOUBLE_EQ(fermi_schwartz_value(fp, fp.mu), 0.5);
    EXPECT_NEAR(fermi_schwartz_value(fp, fp.mu + 10 * fp.T) / std::exp(-10.0), 1.0, 1e-4);
    EXPECT_EQ(fermi_schwartz_value(fp, fp.E0 - 1 - fp.cutoff_width - 0.1), 0.0);
    // F = F_FD on [E0 - 1, inf)
    for (double x : {-0.5, 0.0, 1.0, 3.0})
        EXPECT_DOUBLE_EQ(fermi_schwartz_value(fp, x), 1.0 / (1.0 + std::exp((x - fp.mu) / fp.T)));
}

TEST(HsCalc, Refusals) {
    EXPECT_THROW(make_almost_analytic(gaussian(), 1, -1, 1), magedge::domain_error);
    EXPECT_THROW(fermi_schwartz(FermiParams{0.0, 0.0, 0.0, 1.0}), magedge::domain_error);
    const auto& b = small_box();
    auto aa = almost_analytic_fermi(FermiParams{2.0, 0.5, b.es->E(0) - 0.5, 1.0}, 3);
    StripQuadrature q;
    q.z2_min = 0.5;
    EXPECT_THROW(hs_apply(b.g, aa, q, b.v, 1e-6), accuracy_error);
}

TEST(HsCalc, MatchesEigendecomposition) {
    double trunc = 0.0;
    const double e = hs_error(0.5, 5, 0.1, 3.0, &trunc);
    EXPECT_LE(e, 1e-3);
    EXPECT_TRUE(std::isfinite(trunc));
    // doubling the node density moves the result by less than the reported bound
    EXPECT_LE(std::abs(hs_error(0.5, 5, 0.1, 1.5) - e), trunc);
}

TEST(HsCalc, HigherNSuppressesStrip) {
    // coarse z2_min so the excluded strip dominates
    EXPECT_LT(hs_error(0.5, 5, 0.4, 3.0), hs_error(0.5, 3, 0.4, 3.0));
}

TEST(HsCalc, Hermitian) {
    const auto& b = small_box();
    const FermiParams fp{2.0, 0.5, b.es->E(0) - 0.5, 1.0};
    auto aa = almost_analytic_fermi(fp, 5);
    StripQuadrature q;
    q.z2_min = 0.1;
    q.panel_scale = 3.0;
    Eigen::MatrixXcd V(b.g.dimension(), 2);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (Eigen::Index i = 0; i < V.size(); ++i) V.data()[i] = cplx(nd(rng), nd(rng));
    const auto r = hs_apply(b.g, aa, q, V);
    const cplx a = V.col(0).dot(r.out.col(1)), c = V.col(1).dot(r.out.col(0));
    EXPECT_LE(std::abs(a - std::conj(c)), 1e-10 * V.squaredNorm());
}

TEST(HsCalc, BelowSpectrumIsZero) {
    const auto& b = small_box();
    const double emin = b.es->E(0);
    // F_FD(emin) ~ e^{-30}; the switch sits well below
    const FermiParams fp{emin - 3.0, 0.1, emin - 3.0, 1.0};
    auto aa = almost_analytic_fermi(fp, 5);
    StripQuadrature q;
    q.z2_min = 0.1;
    q.z1_scale = 0.1;
    const auto r = hs_apply(b.g, aa, q, b.v);
    EXPECT_LE(r.out.col(0).norm() / b.v.norm(), 1e-8);
}
