#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <magedge/specfun.hpp>

using namespace magedge;
using namespace magedge::specfun;

namespace {

std::vector<std::vector<double>> read_csv(const std::string& name) {
    std::ifstream f(std::string(MAGEDGE_TEST_DATA) + "/" + name);
    EXPECT_TRUE(f.good()) << name;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        std::vector<double> r;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) r.push_back(std::stod(c));
        rows.push_back(r);
    }
    return rows;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

} // namespace

// oracle values: 40-digit quadrature of the cosh representations (tests/oracles)
TEST(Specfun, K0AtOne) {
    const auto r = k0(1.0);
    EXPECT_LE(rel(r.value, 0.42102443824070833334), 1e-12);
    EXPECT_GT(r.abs_err_estimate, 0.0);
}

TEST(Specfun, K1AtOne) { EXPECT_LE(rel(k1(1.0).value, 0.60190723019723457474), 1e-12); }

TEST(Specfun, SmallArgumentLog) {
    EXPECT_NEAR(k0(1e-8).value / (-std::log(1e-8)), 1.0, 0.01);
    EXPECT_LE(rel(k0(1e-8).value, 18.536612259610778409), 1e-12);
}

TEST(Specfun, LargeArgumentAsymptotics) {
    const double x = 50.0;
    EXPECT_NEAR(k0(x).value / (std::sqrt(std::numbers::pi / (2 * x)) * std::exp(-x)), 1.0, 0.005);
    EXPECT_LE(rel(k0(x).value, 3.4101677497894955139e-23), 1e-12);
}

TEST(Specfun, K1SmallArgument) {
    EXPECT_NEAR(1e-6 * k1(1e-6).value, 1.0, 1e-5);
    EXPECT_LE(rel(1e-6 * k1(1e-6).value, 0.99999999999278427896), 1e-12);
}

TEST(Specfun, K0DerivativeIsMinusK1) {
    const double h = 1e-5;
    EXPECT_NEAR((k0(1 + h).value - k0(1 - h).value) / (2 * h), -k1(1.0).value, 1e-8);
}

TEST(Specfun, RealTableAgainstOracle) {
    const auto rows = read_csv("besselk_real.csv");
    ASSERT_GT(rows.size(), 50u);
    for (const auto& r : rows) {
        const auto a = k0(r[0]), b = k1(r[0]);
        EXPECT_LE(rel(a.value, r[1]), 1e-12) << "k0 x=" << r[0];
        EXPECT_LE(rel(b.value, r[2]), 1e-12) << "k1 x=" << r[0];
        // certified bound really bounds the error
        EXPECT_LE(std::abs(a.value - r[1]), a.abs_err_estimate + 4e-16 * std::abs(r[1])) << "x=" << r[0];
        EXPECT_LE(std::abs(b.value - r[2]), b.abs_err_estimate + 4e-16 * std::abs(r[2])) << "x=" << r[0];
    }
}

TEST(Specfun, ComplexTableAgainstOracle) {
    const auto rows = read_csv("besselk_complex.csv");
    ASSERT_GT(rows.size(), 100u);
    for (const auto& r : rows) {
        const cplx z{r[0], r[1]};
        if (!(z.real() > 0.0)) continue;
        const auto a = k0_complex(z), b = k1_complex(z);
        EXPECT_LE(rel(a.value, cplx(r[2], r[3])), 1e-11) << "k0 z=" << z;
        EXPECT_LE(rel(b.value, cplx(r[4], r[5])), 1e-11) << "k1 z=" << z;
        EXPECT_LE(std::abs(a.value - cplx(r[2], r[3])), a.abs_err_estimate + 4e-16 * std::hypot(r[2], r[3])) << z;
        EXPECT_LE(std::abs(b.value - cplx(r[4], r[5])), b.abs_err_estimate + 4e-16 * std::hypot(r[4], r[5])) << z;
    }
}

TEST(Specfun, ComplexRealAxisReduction) {
    EXPECT_LE(std::abs(k0_complex({2.0, 0.0}).value - k0(2.0).value), 1e-14);
}

TEST(Specfun, SchwarzReflection) {
    const cplx z{1.0, 0.7};
    EXPECT_LE(std::abs(k0_complex(std::conj(z)).value - std::conj(k0_complex(z).value)), 1e-13);
}

TEST(Specfun, ComplexOracleOnePlusI) {
    EXPECT_LE(rel(k0_complex({1.0, 1.0}).value, cplx(0.080197726946517818727, -0.35727745928533025061)), 1e-12);
    EXPECT_LE(rel(k1_complex({1.0, 1.0}).value, cplx(0.024568305523740348612, -0.45971947380118936478)), 1e-12);
}

TEST(Specfun, RecurrenceAgainstFiniteDifferences) {
    for (int k = 0; k < 100; ++k) {
        const double x = 1e-3 * std::pow(5e4, k / 99.0), d = 1e-5 * x;
        const double fd = (k1(x + d).value - k1(x - d).value) / (2 * d);
        EXPECT_LE(rel(fd, k1_prime(x)), 1e-6) << "x=" << x;
    }
}

TEST(Specfun, Monotone) {
    double p0 = INFINITY, p1 = INFINITY;
    for (int k = 0; k < 400; ++k) {
        const double x = 1e-4 * std::pow(1e6, k / 399.0);
        const double a = k0(x).value, b = k1(x).value;
        EXPECT_LT(a, p0) << x;
        EXPECT_LT(b, p1) << x;
        p0 = a;
        p1 = b;
    }
}

TEST(Specfun, AsymptoticSandwich) {
    for (double x = 10.0; x <= 200.0; x *= 1.1)
        EXPECT_LE(std::abs(k0(x).value * std::exp(x) * std::sqrt(2 * x / std::numbers::pi) - 1.0), 1.0 / (4 * x)) << x;
}

TEST(Specfun, DomainErrors) {
    EXPECT_THROW(k0(0.0), magedge::domain_error);
    EXPECT_THROW(k1(-1.0), magedge::domain_error);
    EXPECT_THROW(k0(NAN), magedge::domain_error);
    EXPECT_THROW(k0_complex({-1.0, 0.5}), magedge::domain_error);
    EXPECT_THROW(k0_complex({0.0, 2.0}), magedge::domain_error);
}

TEST(Specfun, PositiveOnRealAxis) {
    for (double x : {1e-6, 0.5, 2.0, 7.0, 31.0, 600.0}) {
        EXPECT_GE(k0(x).value, 0.0);
        EXPECT_GE(k1(x).value, 0.0);
    }
    EXPECT_TRUE(k0(800.0).underflow);
}
