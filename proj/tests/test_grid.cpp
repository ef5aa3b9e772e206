#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <magedge/grid.hpp>

using namespace magedge;

namespace {

PotentialConfig landau(double b) {
    PotentialConfig c;
    c.b = b;
    return c;
}

double fd(double E, double mu, double T) { return 1.0 / (1.0 + std::exp((E - mu) / T)); }

std::function<cplx(int, int)> entries(const SpectralFunction& F) {
    auto p = std::make_shared<const Eigen::MatrixXcd>(F.dense());
    return [p](int t, int s) { return (*p)(t, s); };
}

} // namespace

TEST(Grid, FreeLaplacianBounds) {
    const auto g = assemble(GridSpec::bulk(2, 2, 0.1));
    const auto es = eig_dense(g);
    const double h = 0.1;
    EXPECT_GE(es.E.minCoeff(), 0.0);
    EXPECT_LE(es.E.maxCoeff(), 8.0 / (h * h));
    // 5-point Dirichlet ground state of the 4 x 4 square
    const double k = std::numbers::pi / 4.0;
    const double exact = 2.0 * (2.0 - 2.0 * std::cos(k * h)) / (h * h);
    EXPECT_NEAR(es.E.minCoeff(), exact, 1e-10);
    EXPECT_NEAR(es.E.minCoeff(), 2 * k * k, 0.01 * 2 * k * k);
}

TEST(Grid, Hermitian) {
    EXPECT_LT(hermiticity_residual(assemble(GridSpec::edge(3, 3, 0.1, landau(1.3))).H), 1e-13);
    PotentialConfig c = smooth_background(0.3);
    c.b = 1.0;
    c.disorder = sample_disorder(5, 4);
    EXPECT_LT(hermiticity_residual(assemble(GridSpec::bulk(3, 3, 0.1, c)).H), 1e-13);
}

TEST(Grid, Refusals) {
    EXPECT_THROW(assemble(GridSpec::edge(3, 3, 0.5, landau(1.0))), magedge::domain_error);  // b h^2 > 0.2
    EXPECT_THROW(assemble(GridSpec::edge(3, 3, 0.07)), magedge::domain_error);             // not a multiple
    const auto g = assemble(GridSpec::edge(1, 1, 0.1));
    EXPECT_THROW(eig_dense(g, 10), budget_error);
}

TEST(Grid, LandauClusters) {
    // coarse version of the L = 12 run; walls only raise the bottom of each window
    const auto g = assemble(GridSpec::bulk(6, 6, 0.1, landau(1.0)));
    const auto cl = landau_clusters(g, 3, 8);
    for (const auto& c : cl) EXPECT_LE(c.rel_err, 0.02) << "level " << c.level << " center " << c.center;
}

TEST(Grid, ResolveEigenvector) {
    const auto g = assemble(GridSpec::edge(2, 2, 0.1, landau(1.0)));
    const auto es = eig_dense(g);
    const cplx z{1.5, 0.4};
    for (int k : {0, 7, 100}) {
        const CVec v = es.V.col(k);
        const CVec u = resolve(g, z, v);
        EXPECT_LE((u - v / (es.E(k) - z)).norm(), 1e-8);
    }
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    CVec rhs(g.dimension());
    for (auto& r : rhs) r = {n(rng), n(rng)};
    SpMat I(g.dimension(), g.dimension());
    I.setIdentity();
    const CVec u = resolve(g, z, rhs);
    EXPECT_LE((SpMat(g.H - z * I) * u - rhs).norm() / rhs.norm(), 1e-10);
}

TEST(Grid, CurrentOperatorStencil) {
    const double h = 0.1;
    const auto g = assemble(GridSpec::edge(1, 1, h));
    const SpMat J = current_operator(g);
    EXPECT_LT(hermiticity_residual(J), 1e-13);
    const int s = g.site_or_throw({0.0, 0.5});
    const int r = g.site_or_throw({0.1, 0.5}), l = g.site_or_throw({-0.1, 0.5}), u = g.site_or_throw({0.0, 0.6});
    // i H_{st} (x1_t - x1_s) with H_{st} = -1/h^2
    EXPECT_NEAR(std::abs(J.coeff(s, r) - cplx(0.0, -1.0 / h)), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(J.coeff(s, l) - cplx(0.0, 1.0 / h)), 0.0, 1e-9);
    EXPECT_EQ(J.coeff(s, u), cplx(0.0));
    EXPECT_EQ(J.coeff(s, s), cplx(0.0));
    EXPECT_LT(hermiticity_residual(current_operator(assemble(GridSpec::edge(2, 2, 0.1, landau(1.0))))), 1e-13);
}

TEST(Grid, GaugeCovariance) {
    const auto g = assemble(GridSpec::edge(1.5, 2, 0.1, landau(1.0)));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    std::vector<double> phase(std::size_t(g.dimension()));
    for (auto& p : phase) p = u(rng);
    const auto gc = gauge_conjugate(g, [&](const Point& x) { return phase[std::size_t(*g.site_at(x))]; });
    auto F = [](double E) { return fd(E, 2.0, 0.2); };
    const SpectralFunction Fa(std::make_shared<const EigenSystem>(eig_dense(g)), F);
    const SpectralFunction Fb(std::make_shared<const EigenSystem>(eig_dense(gc)), F);
    const auto ea = entries(Fa), eb = entries(Fb);
    const SpMat Ja = current_operator(g), Jb = current_operator(gc);
    double m = 0.0;
    for (int s = 0; s < g.dimension(); s += 7)
        m = std::max(m, std::abs(current_diagonal(g, Ja, ea, s) - current_diagonal(gc, Jb, eb, s)));
    EXPECT_LE(m, 1e-10);
}

TEST(Grid, FunctionOfOperator) {
    const auto g = assemble(GridSpec::edge(1, 1, 0.1, landau(1.0)));
    const Eigen::MatrixXcd H = function_of_operator_eig(g, [](double E) { return E; });
    EXPECT_LE((H - Eigen::MatrixXcd(g.H)).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::MatrixXcd Z = function_of_operator_eig(g, [](double E) { return fd(E, -50.0, 0.1); });
    EXPECT_LE(Z.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Grid, LandauDensityOfStates) {
    // local trace of F(H) over a central window counts b/(2 pi) states per level per unit area
    const double h = 0.2;
    const auto g = assemble(GridSpec::bulk(6, 6, h, landau(1.0)));
    const SpectralFunction F(std::make_shared<const EigenSystem>(eig_dense(g)), [](double E) { return fd(E, 2.0, 0.1); });
    const Eigen::MatrixXcd M = F.dense();
    double tr = 0.0;
    int n = 0;
    for (int s = 0; s < g.dimension(); ++s) {
        const Point x = g.sites[std::size_t(s)];
        if (x.x1 >= -2 - 1e-9 && x.x1 < 2 - 1e-9 && x.x2 >= -2 - 1e-9 && x.x2 < 2 - 1e-9) {
            tr += M(s, s).real();
            ++n;
        }
    }
    const double area = n * h * h;
    EXPECT_NEAR(tr / (area / (2 * std::numbers::pi)), 1.0, 0.02);
}

TEST(Grid, BulkCurrentVanishes) {
    const double h = 0.25;
    auto prof = [&](double L, Averaging av) {
        const auto g = assemble(GridSpec::bulk(L, L, h, landau(1.0)));
        const SpectralFunction F(std::make_shared<const EigenSystem>(eig_dense(g)), [](double E) { return fd(E, 2.0, 0.2); });
        const auto e = entries(F);
        return std::pair{current_density(g, e, {{0, 0}, {0, 0.5}, {0, 1.0}}, Averaging::x1_cell),
                         current_density(g, e, {{0, 0}, {0, 0.5}, {0, 1.0}, {0, 2.0}}, av)};
    };
    const auto [a, an] = prof(6.0, Averaging::none);
    const auto [b, bn] = prof(7.0, Averaging::none);
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        EXPECT_LE(std::abs(a.samples[k].value), 1e-3) << a.samples[k].x2;
        EXPECT_LE(std::abs(a.samples[k].value - b.samples[k].value), 1e-4);
        // Im of the cell average is a discrete x1-divergence fed by the side walls
        EXPECT_LE(b.samples[k].imag_residue, 0.1 * a.samples[k].imag_residue + 1e-12);
    }
    // on the mirror line x1 = 0 the diagonal is real
    for (const auto& p : {an, bn}) {
        for (const auto& smp : p.samples) EXPECT_LE(smp.imag_residue, 1e-10);
        EXPECT_FALSE(p.imag_flag);
    }
}

TEST(Grid, EdgeProfileDecays) {
    const auto g = assemble(GridSpec::edge(6, 14, 0.25, landau(1.0)));
    const SpectralFunction F(std::make_shared<const EigenSystem>(eig_dense(g)), [](double E) { return fd(E, 2.0, 0.2); });
    const auto p = current_density(g, entries(F), {{0, 2}, {0, 6}}, Averaging::x1_cell);
    EXPECT_GE(std::abs(p.samples[0].value), 1e3 * std::abs(p.samples[1].value));
}

TEST(Grid, ZeroFunctionZeroProfile) {
    const auto g = assemble(GridSpec::edge(1, 1, 0.1, landau(1.0)));
    const auto p = current_density(g, [](int, int) { return cplx(0.0); }, {{0, 0.5}, {0.2, 0.3}}, Averaging::none);
    for (const auto& s : p.samples) EXPECT_EQ(s.value, 0.0);
}

TEST(Grid, DisorderAverageBookkeeping) {
    CurrentDensityProfile a, b;
    a.samples = {{0, 1, 1.0, 0, 0}};
    b.samples = {{0, 1, 3.0, 0, 0}};
    const auto m = disorder_average({a, b}, {7, 8});
    EXPECT_DOUBLE_EQ(m.samples[0].value, 2.0);
    EXPECT_DOUBLE_EQ(m.samples[0].stderr_, 1.0);
    EXPECT_EQ(m.seeds, (std::vector<std::uint64_t>{7, 8}));
    EXPECT_EQ(m.averaging, Averaging::disorder);
}
