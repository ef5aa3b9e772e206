#ifndef MAGEDGE_POTENTIALS_HPP
#define MAGEDGE_POTENTIALS_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "geometry.hpp"

namespace magedge {

struct FourierMode {
    int k1 = 0, k2 = 0;
    cplx c;
};

// real Z^2-periodic scalar: sum_k c_k exp(2 pi i k.x)
class PeriodicField {
public:
    PeriodicField() = default;

    // adds c e^{2pi i k.x} + conj(c) e^{-2pi i k.x}, i.e. 2 Re(c e^{...})
    // k = 0 contributes the constant Re(c)
    PeriodicField& add_real_mode(int k1, int k2, cplx c) {
        if (k1 == 0 && k2 == 0) {
            modes_.push_back({0, 0, cplx(c.real(), 0.0)});
        } else {
            modes_.push_back({k1, k2, c});
            modes_.push_back({-k1, -k2, std::conj(c)});
        }
        return *this;
    }

    const std::vector<FourierMode>& modes() const { return modes_; }
    bool empty() const { return modes_.empty(); }

    // conjugate symmetry c_{-k} = conj(c_k) summed over duplicates
    bool is_real(double tol = 1e-14) const {
        for (const auto& m : modes_) {
            cplx a = 0.0, b = 0.0;
            for (const auto& n : modes_) {
                if (n.k1 == m.k1 && n.k2 == m.k2) a += n.c;
                if (n.k1 == -m.k1 && n.k2 == -m.k2) b += n.c;
            }
            if (std::abs(a - std::conj(b)) > tol) return false;
        }
        return true;
    }

    double value(const Point& x) const {
        double v = 0.0;
        for (const auto& m : modes_) v += (m.c * phase(m, x)).real();
        return v;
    }

    // (d/dx1, d/dx2)
    std::array<double, 2> grad(const Point& x) const {
        std::array<double, 2> g{0.0, 0.0};
        for (const auto& m : modes_) {
            const cplx t = m.c * phase(m, x) * cplx(0.0, 2.0 * std::numbers::pi);
            g[0] += (t * double(m.k1)).real();
            g[1] += (t * double(m.k2)).real();
        }
        return g;
    }

private:
    static cplx phase(const FourierMode& m, const Point& x) {
        const double a = 2.0 * std::numbers::pi * (m.k1 * x.x1 + m.k2 * x.x2);
        return {std::cos(a), std::sin(a)};
    }
    std::vector<FourierMode> modes_;
};

enum class DisorderLaw { uniform, two_point };

// V_omega(x) = sum_gamma omega_gamma u(x - gamma) on [-L, L]^2
struct DisorderRealization {
    int L = 0;
    std::vector<double> omega;  // row-major over gamma1 then gamma2, size (2L+1)^2
    double bump_radius = 0.4;
    double bump_amplitude = 1.0;
    std::uint64_t seed = 0;
    DisorderLaw law = DisorderLaw::uniform;

    double& at(int g1, int g2) { return omega[std::size_t((g1 + L) * (2 * L + 1) + (g2 + L))]; }
    double at(int g1, int g2) const { return omega[std::size_t((g1 + L) * (2 * L + 1) + (g2 + L))]; }

    // u(x) = amplitude * e * exp(-1/(1-(r/rho)^2)), so u(0) = amplitude
    double bump(double r) const {
        const double s = r / bump_radius;
        if (s >= 1.0) return 0.0;
        return bump_amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
    }

    double value(const Point& x) const {
        // bump_radius < 1/2: at most the nearest site contributes
        const int g1 = int(std::lround(x.x1)), g2 = int(std::lround(x.x2));
        if (std::abs(g1) > L || std::abs(g2) > L) return 0.0;
        const double w = at(g1, g2);
        if (w == 0.0) return 0.0;
        return w * bump(std::hypot(x.x1 - g1, x.x2 - g2));
    }
};

inline DisorderRealization sample_disorder(std::uint64_t seed, int L, DisorderLaw law = DisorderLaw::uniform,
                                           double bump_radius = 0.4, double bump_amplitude = 1.0) {
    if (L < 1) throw domain_error("disorder window needs L >= 1");
    if (!(bump_radius > 0.0 && bump_radius < 0.5)) throw domain_error("bump radius must lie in (0, 1/2)");
    DisorderRealization d;
    d.L = L;
    d.seed = seed;
    d.law = law;
    d.bump_radius = bump_radius;
    d.bump_amplitude = bump_amplitude;
    d.omega.resize(std::size_t((2 * L + 1) * (2 * L + 1)));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (auto& w : d.omega) w = (law == DisorderLaw::uniform) ? uni(rng) : (coin(rng) ? 1.0 : -1.0);
    return d;
}

enum class PotentialQuantity { A, divA, gradA, V };

struct PotentialConfig {
    PeriodicField A1, A2;  // components of the smooth vector potential
    PeriodicField V;       // periodic scalar part
    std::optional<DisorderRealization> disorder;
    double b = 0.0;

    bool vector_free() const { return A1.empty() && A2.empty(); }
    bool scalar_free() const { return V.empty() && !disorder; }
    bool trivial() const { return vector_free() && scalar_free(); }

    std::array<double, 2> A(const Point& x) const { return {A1.value(x), A2.value(x)}; }
    double divA(const Point& x) const { return A1.grad(x)[0] + A2.grad(x)[1]; }
    // g[j][k] = d_k A_j
    std::array<std::array<double, 2>, 2> gradA(const Point& x) const { return {A1.grad(x), A2.grad(x)}; }
    double scalar(const Point& x) const {
        double v = V.value(x);
        if (disorder) v += disorder->value(x);
        return v;
    }
};

// A -> (A1, A2); divA -> (div); gradA -> (d1A1, d2A1, d1A2, d2A2); V -> (V incl. disorder)
inline std::vector<double> eval_potential(const PotentialConfig& cfg, const Point& x, PotentialQuantity what) {
    switch (what) {
    case PotentialQuantity::A: {
        const auto a = cfg.A(x);
        return {a[0], a[1]};
    }
    case PotentialQuantity::divA: return {cfg.divA(x)};
    case PotentialQuantity::gradA: {
        const auto g = cfg.gradA(x);
        return {g[0][0], g[0][1], g[1][0], g[1][1]};
    }
    case PotentialQuantity::V: return {cfg.scalar(x)};
    }
    return {};
}

// smooth periodic background with all amplitudes equal to a
inline PotentialConfig smooth_background(double a, double b = 0.0) {
    PotentialConfig cfg;
    cfg.b = b;
    cfg.A1.add_real_mode(1, 1, cplx(0.0, -0.5 * a));                     // a sin(2 pi (x1 + x2))
    cfg.A2.add_real_mode(1, 0, cplx(0.0, -0.5 * a));                     // a sin(2 pi x1)
    cfg.V.add_real_mode(1, 1, cplx(0.25 * a, 0.0)).add_real_mode(1, -1, cplx(0.25 * a, 0.0));  // a cos cos
    return cfg;
}

} // namespace magedge

#endif
