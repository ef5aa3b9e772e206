#include <gtest/gtest.h>

#include <cmath>

#include <magedge/decayfit.hpp>

using namespace magedge;

namespace {

std::vector<double> abscissae(double a, double b, int n) {
    std::vector<double> x;
    for (int k = 0; k < n; ++k) x.push_back(a + (b - a) * k / (n - 1));
    return x;
}

} // namespace

TEST(DecayFit, PowerLawFails) {
    const auto x = abscissae(1.0, 10.0, 40);
    std::vector<double> v;
    for (double t : x) v.push_back(std::pow(t, -3.0));
    const auto r = superpoly_check_values(x, v);
    EXPECT_EQ(r.verdict, Verdict::fail);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) EXPECT_NEAR(r.local_exponent[i], 3.0, 1e-9);
    EXPECT_NEAR(r.max_exponent, 3.0, 1e-9);
}

TEST(DecayFit, GaussianPasses) {
    const auto x = abscissae(0.5, 6.0, 45);
    std::vector<double> v;
    for (double t : x) v.push_back(std::exp(-t * t / 2));
    DecayOptions opt;
    opt.require_gaussian = true;
    const auto r = superpoly_check_values(x, v, opt);
    EXPECT_EQ(r.verdict, Verdict::pass) << r.reason;
    EXPECT_NEAR(r.gaussian_c, 0.5, 1e-9);
    EXPECT_GE(r.gaussian_r2, 0.999);
    // p(x2) ~ x2^2 with a centered log difference
    EXPECT_NEAR(r.local_exponent[20], x[20] * x[20], 0.05 * x[20] * x[20]);
}

TEST(DecayFit, FloorBeforeThreshold) {
    const auto x = abscissae(1.0, 10.0, 30);
    std::vector<double> v;
    for (double t : x) v.push_back(t < 3 ? std::pow(t, -2.0) * 1e-11 : 0.0);
    const auto r = superpoly_check_values(x, v);
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    EXPECT_TRUE(r.floor_reached);
}

TEST(DecayFit, ProfileVersion) {
    CurrentDensityProfile e, b;
    e.b = b.b = 1;
    for (double t : abscissae(0.5, 6.0, 23))
        for (double x1 : {0.0, 0.5}) {
            e.samples.push_back({x1, t, (x1 == 0 ? 1.0 : 0.5) * std::exp(-t * t / 2), 0, 0});
            b.samples.push_back({x1, t, 0.0, 0, 0});
        }
    const auto r = superpoly_check(e, b);
    EXPECT_EQ(r.verdict, Verdict::pass);
    EXPECT_EQ(r.abscissae.size(), 23u);
    EXPECT_DOUBLE_EQ(r.values[0], std::exp(-0.125));
    b.mu = 1;
    EXPECT_THROW(superpoly_check(e, b), magedge::domain_error);
}

TEST(DecayFit, BadInput) {
    EXPECT_THROW(superpoly_check_values({1, 2}, {1, 1}), magedge::domain_error);
    EXPECT_THROW(superpoly_check_values({1, 3, 2}, {1, 1, 1}), magedge::domain_error);
    EXPECT_THROW(superpoly_check_values({0, 1, 2}, {1, 1, 1}), magedge::domain_error);
}

TEST(DecayFit, SEnvelope) {
    const double lam = 1.0;
    const auto S = make_kernel(KernelKind::S, FieldParams{1.0}, {}, SpectralParam::from_lambda(lam));
    const auto f = envelope_fit(S, EnvelopeForm::log, envelope_samples(1e-3, 10.0 / S.decay_rate, 200, 1), std::sqrt(lam));
    EXPECT_GE(f.delta, 0.9 * std::sqrt(lam));
    EXPECT_EQ(f.violations, 0);
}

TEST(DecayFit, TEnvelope) {
    const double lam = 1.0;
    const auto T = make_kernel(KernelKind::T, FieldParams{1.0}, {}, SpectralParam::from_lambda(lam));
    const auto f = envelope_fit(T, EnvelopeForm::plain, envelope_samples(1e-3, 10.0 / T.decay_rate, 200, 2), std::sqrt(lam));
    EXPECT_GE(f.delta, 0.45 * std::sqrt(lam));
    EXPECT_EQ(f.violations, 0);
}

TEST(DecayFit, ZeroKernel) {
    const auto f = envelope_fit(zero_kernel(), EnvelopeForm::plain, envelope_samples(1e-3, 5.0, 50, 3), 1.0);
    EXPECT_EQ(f.C, 0.0);
    EXPECT_EQ(f.violations, 0);
}
