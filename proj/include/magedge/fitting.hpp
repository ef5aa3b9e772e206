#ifndef MAGEDGE_FITTING_HPP
#define MAGEDGE_FITTING_HPP

// small regression helpers shared by the decay checks

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace magedge {

struct LineFit {
    double intercept = 0, slope = 0, r2 = 0;
    int n = 0;
};

// ordinary least squares y ~ a + s t
inline LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw domain_error("fit_line: size mismatch");
    LineFit f;
    f.n = int(t.size());
    if (f.n < 2) throw domain_error("fit_line: need at least two points");
    double mt = 0, my = 0;
    for (int i = 0; i < f.n; ++i) {
        mt += t[std::size_t(i)];
        my += y[std::size_t(i)];
    }
    mt /= f.n;
    my /= f.n;
    double stt = 0, sty = 0, syy = 0;
    for (int i = 0; i < f.n; ++i) {
        const double a = t[std::size_t(i)] - mt, b = y[std::size_t(i)] - my;
        stt += a * a;
        sty += a * b;
        syy += b * b;
    }
    if (stt == 0.0) throw domain_error("fit_line: degenerate abscissae");
    f.slope = sty / stt;
    f.intercept = my - f.slope * mt;
    f.r2 = syy > 0.0 ? sty * sty / (stt * syy) : 1.0;
    return f;
}

struct EnvelopeFit {
    double C = 0;      // max-margin prefactor
    double delta = 0;  // decay rate
    int violations = 0;
    int used = 0;      // samples with v > 0
};

// v(t) <= C pre(t) exp(-delta t): delta from least squares on ln(v / pre), C lifted to cover every sample
inline EnvelopeFit fit_envelope(const std::vector<double>& t, const std::vector<double>& v, const std::vector<double>& pre) {
    if (t.size() != v.size() || t.size() != pre.size()) throw domain_error("fit_envelope: size mismatch");
    std::vector<double> tt, ly;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (v[i] > 0.0 && pre[i] > 0.0) {
            tt.push_back(t[i]);
            ly.push_back(std::log(v[i] / pre[i]));
        }
    EnvelopeFit e;
    e.used = int(tt.size());
    if (tt.size() < 2) return e;  // zero (or single-sample) input: C = 0
    const LineFit lf = fit_line(tt, ly);
    e.delta = -lf.slope;
    double lc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tt.size(); ++i) lc = std::max(lc, ly[i] + e.delta * tt[i]);
    e.C = std::exp(lc) * (1.0 + 1e-12);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (v[i] > 1.01 * e.C * pre[i] * std::exp(-e.delta * t[i])) ++e.violations;
    return e;
}

} // namespace magedge

#endif
