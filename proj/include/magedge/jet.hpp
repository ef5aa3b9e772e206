#ifndef MAGEDGE_JET_HPP
#define MAGEDGE_JET_HPP

// Truncated Taylor jets: c[k] = f^{(k)}(x0)/k!, k <= Order.

#include <array>
#include <cmath>

namespace magedge {

template <int Order>
struct Jet {
    std::array<double, Order + 1> c{};

    static Jet variable(double x0) {
        Jet j;
        j.c[0] = x0;
        if constexpr (Order >= 1) j.c[1] = 1.0;
        return j;
    }
    static Jet constant(double v) {
        Jet j;
        j.c[0] = v;
        return j;
    }

    double value() const { return c[0]; }
    // k-th derivative
    double derivative(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[std::size_t(k)] * f;
    }

    Jet& operator+=(const Jet& o) {
        for (int k = 0; k <= Order; ++k) c[k] += o.c[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int k = 0; k <= Order; ++k) c[k] -= o.c[k];
        return *this;
    }
    Jet& operator*=(double s) {
        for (auto& v : c) v *= s;
        return *this;
    }
};

template <int N> Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N> Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N> Jet<N> operator*(Jet<N> a, double s) { return a *= s; }
template <int N> Jet<N> operator*(double s, Jet<N> a) { return a *= s; }
template <int N> Jet<N> operator+(Jet<N> a, double s) { a.c[0] += s; return a; }
template <int N> Jet<N> operator+(double s, Jet<N> a) { a.c[0] += s; return a; }
template <int N> Jet<N> operator-(Jet<N> a, double s) { a.c[0] -= s; return a; }
template <int N> Jet<N> operator-(double s, const Jet<N>& a) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = -a.c[k];
    r.c[0] += s;
    return r;
}
template <int N> Jet<N> operator-(const Jet<N>& a) { return 0.0 - a; }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k)
        for (int i = 0; i <= k; ++i) r.c[k] += a.c[i] * b.c[k - i];
    return r;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
        r.c[k] = s / b.c[0];
    }
    return r;
}

template <int N> Jet<N> operator/(double s, const Jet<N>& b) { return Jet<N>::constant(s) / b; }
template <int N> Jet<N> operator/(Jet<N> a, double s) { return a *= (1.0 / s); }

// f = exp(a): k f_k = sum_{i=1}^k i a_i f_{k-i}
template <int N>
Jet<N> exp(const Jet<N>& a) {
    Jet<N> r;
    r.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += i * a.c[i] * r.c[k - i];
        r.c[k] = s / k;
    }
    return r;
}

inline double value_of(double x) { return x; }
template <int N> double value_of(const Jet<N>& j) { return j.c[0]; }

} // namespace magedge

#endif
