#ifndef MAGEDGE_GEOMETRY_HPP
#define MAGEDGE_GEOMETRY_HPP

#include <cmath>
#include <complex>

#include "errors.hpp"

namespace magedge {

using cplx = std::complex<double>;

// point of the plane; a half-plane point additionally has x2 > 0
struct Point {
    double x1 = 0.0, x2 = 0.0;
    Point operator+(const Point& o) const { return {x1 + o.x1, x2 + o.x2}; }
    Point operator-(const Point& o) const { return {x1 - o.x1, x2 - o.x2}; }
    Point operator*(double s) const { return {s * x1, s * x2}; }
    bool operator==(const Point& o) const = default;
};

inline double norm(const Point& p) { return std::hypot(p.x1, p.x2); }
inline double dot(const Point& a, const Point& b) { return a.x1 * b.x1 + a.x2 * b.x2; }

// reflection across the boundary x2 = 0
inline Point star(const Point& p) { return {p.x1, -p.x2}; }

inline Point half_plane_point(double x1, double x2) {
    if (!(x2 > 0.0)) throw domain_error("half-plane point needs x2 > 0");
    return {x1, x2};
}

// z and kappa = principal sqrt(-z), Re kappa > 0
struct SpectralParam {
    cplx z;
    cplx kappa;

    static SpectralParam from_lambda(double lambda) {
        if (!(lambda > 0.0)) throw domain_error("lambda must be > 0");
        return {cplx(-lambda, 0.0), cplx(std::sqrt(lambda), 0.0)};
    }
    static SpectralParam from_z(cplx z) {
        const cplx k = std::sqrt(-z);
        if (!(k.real() > 0.0)) throw domain_error("spectral parameter on the branch cut [0, inf)");
        return {z, k};
    }
    bool is_real() const { return kappa.imag() == 0.0; }
    double lambda() const { return -z.real(); }
};

struct FieldParams {
    double b = 0.0;
};

} // namespace magedge

#endif
