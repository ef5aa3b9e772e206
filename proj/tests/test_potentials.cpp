#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <magedge/potentials.hpp>

using namespace magedge;

namespace {

Point rnd(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    return {u(rng), u(rng)};
}

} // namespace

TEST(Potentials, VacuumIsZero) {
    PotentialConfig cfg;
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const Point x = rnd(rng);
        for (auto q : {PotentialQuantity::A, PotentialQuantity::divA, PotentialQuantity::gradA, PotentialQuantity::V})
            for (double v : eval_potential(cfg, x, q)) EXPECT_EQ(v, 0.0);
    }
    EXPECT_TRUE(cfg.trivial());
}

TEST(Potentials, Periodicity) {
    const auto cfg = smooth_background(0.3);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 200; ++k) {
        const Point x = rnd(rng);
        EXPECT_NEAR(cfg.scalar(x + Point{1, 0}), cfg.scalar(x), 1e-13);
        EXPECT_NEAR(cfg.scalar(x + Point{0, 1}), cfg.scalar(x), 1e-13);
        EXPECT_NEAR(cfg.A(x + Point{1, 0})[0], cfg.A(x)[0], 1e-13);
    }
}

TEST(Potentials, RealModes) {
    const auto cfg = smooth_background(0.3);
    EXPECT_TRUE(cfg.A1.is_real());
    EXPECT_TRUE(cfg.A2.is_real());
    EXPECT_TRUE(cfg.V.is_real());
    // closed forms of the background
    const Point x{0.17, 0.61};
    const double tp = 2 * std::numbers::pi;
    EXPECT_NEAR(cfg.A(x)[0], 0.3 * std::sin(tp * (x.x1 + x.x2)), 1e-14);
    EXPECT_NEAR(cfg.A(x)[1], 0.3 * std::sin(tp * x.x1), 1e-14);
    EXPECT_NEAR(cfg.scalar(x), 0.3 * std::cos(tp * x.x1) * std::cos(tp * x.x2), 1e-14);
}

TEST(Potentials, DivergenceMatchesFiniteDifferences) {
    const auto cfg = smooth_background(0.4);
    std::mt19937_64 rng(3);
    const double h = 1e-5;
    for (int k = 0; k < 100; ++k) {
        const Point x = rnd(rng);
        const double fd = (cfg.A(x + Point{h, 0})[0] - cfg.A(x - Point{h, 0})[0]) / (2 * h) +
                          (cfg.A(x + Point{0, h})[1] - cfg.A(x - Point{0, h})[1]) / (2 * h);
        EXPECT_NEAR(cfg.divA(x), fd, 1e-8);
        const auto g = eval_potential(cfg, x, PotentialQuantity::gradA);
        EXPECT_NEAR(g[1], (cfg.A(x + Point{0, h})[0] - cfg.A(x - Point{0, h})[0]) / (2 * h), 1e-8);
    }
}

TEST(Potentials, ZeroCouplingsGiveZeroPotential) {
    PotentialConfig cfg;
    auto d = sample_disorder(4, 5);
    std::fill(d.omega.begin(), d.omega.end(), 0.0);
    cfg.disorder = d;
    std::mt19937_64 rng(4);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(cfg.scalar(rnd(rng)), 0.0);
}

TEST(Potentials, SamplingIsDeterministic) {
    const auto a = sample_disorder(42, 6), b = sample_disorder(42, 6), c = sample_disorder(43, 6);
    EXPECT_EQ(a.omega, b.omega);
    EXPECT_NE(a.omega, c.omega);
}

TEST(Potentials, UniformLawMeanAndSupport) {
    const auto d = sample_disorder(7, 50);  // 101^2 > 1e4 sites
    ASSERT_GE(d.omega.size(), 10000u);
    double s = 0;
    for (double w : d.omega) {
        s += w;
        EXPECT_LE(std::abs(w), 1.0);
    }
    EXPECT_NEAR(s / double(d.omega.size()), 0.0, 0.02);
}

TEST(Potentials, TwoPointLaw) {
    const auto d = sample_disorder(8, 10, DisorderLaw::two_point);
    for (double w : d.omega) EXPECT_EQ(std::abs(w), 1.0);
}

TEST(Potentials, CompactInfluence) {
    const auto base = sample_disorder(9, 4, DisorderLaw::uniform, 0.4);
    auto moved = base;
    moved.at(1, 2) += 0.5;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-4.4, 4.4);
    for (int k = 0; k < 2000; ++k) {
        const Point x{u(rng), u(rng)};
        const double r = std::hypot(x.x1 - 1, x.x2 - 2);
        if (r >= 0.4) {
            EXPECT_EQ(base.value(x), moved.value(x)) << x.x1 << "," << x.x2;
        }
    }
    EXPECT_NE(base.value({1.0, 2.0}), moved.value({1.0, 2.0}));
}

TEST(Potentials, BadDisorderParameters) {
    EXPECT_THROW(sample_disorder(1, 0), magedge::domain_error);
    EXPECT_THROW(sample_disorder(1, 3, DisorderLaw::uniform, 0.6), magedge::domain_error);
}
