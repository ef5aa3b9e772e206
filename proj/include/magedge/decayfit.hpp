#ifndef MAGEDGE_DECAYFIT_HPP
#define MAGEDGE_DECAYFIT_HPP

// decay verdicts for edge-current profiles and kernel envelopes

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fitting.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "kernels.hpp"

namespace magedge {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

struct DecayOptions {
    double threshold = 6.0;          // local exponent to reach
    double noise_floor_abs = 1e-12;  // |v| below this is noise
    double noise_floor_rel = 1e-10;  // ... or below this times max |v|
    double gaussian_r2_min = 0.95;
    bool require_gaussian = false;   // pure Landau case
};

struct DecayReport {
    std::vector<double> abscissae;       // x2, strictly increasing
    std::vector<double> values;          // max over x1 of |v|
    std::vector<double> envelope;        // running max from the right
    std::vector<double> local_exponent;  // -d ln env / d ln x2, NaN where not computed
    double gaussian_c = 0, gaussian_r2 = 0;
    EnvelopeFit exp_envelope;            // C exp(-delta x2)
    double noise_floor = 0;
    double max_exponent = 0;
    double x2_threshold = std::numeric_limits<double>::quiet_NaN();  // first x2 with p >= threshold
    bool floor_reached = false;
    std::size_t tail_start = 0;          // index of max |v|; the exponent scan starts here
    std::size_t fit_start = 0;           // start of the final monotone run; the Gaussian fit starts here
    Verdict verdict = Verdict::fail;
    std::string reason;
};

// v(x2) >= 0 at strictly increasing x2 > 0
inline DecayReport superpoly_check_values(std::vector<double> x2, std::vector<double> v, const DecayOptions& opt = {}) {
    if (x2.size() != v.size()) throw domain_error("abscissae and values differ in length");
    if (x2.size() < 3) throw domain_error("need at least three abscissae");
    for (std::size_t i = 0; i < x2.size(); ++i) {
        if (!(x2[i] > 0.0)) throw domain_error("abscissae must be positive");
        if (i && !(x2[i] > x2[i - 1])) throw domain_error("abscissae must be strictly increasing");
        v[i] = std::abs(v[i]);
    }
    DecayReport r;
    const std::size_t n = x2.size();
    r.abscissae = x2;
    r.values = v;
    r.envelope.assign(n, 0.0);
    double run = 0.0;
    for (std::size_t i = n; i-- > 0;) r.envelope[i] = run = std::max(run, v[i]);
    const double vmax = *std::max_element(v.begin(), v.end());
    r.noise_floor = std::max(opt.noise_floor_abs, opt.noise_floor_rel * vmax);
    r.tail_start = std::size_t(std::max_element(v.begin(), v.end()) - v.begin());
    r.local_exponent.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (vmax <= r.noise_floor) {
        r.verdict = Verdict::inconclusive;
        r.floor_reached = true;
        r.reason = "profile is below the noise floor everywhere";
        return r;
    }

    // exponent in the tail, until the envelope hits the floor
    std::size_t last = n - 1;
    for (std::size_t i = r.tail_start; i < n; ++i)
        if (r.envelope[i] <= r.noise_floor) {
            last = i - 1;
            r.floor_reached = true;
            break;
        }
    for (std::size_t i = r.tail_start; i <= last; ++i) {
        const std::size_t a = i == r.tail_start ? i : i - 1, b = i == last ? i : i + 1;
        if (a == b) continue;
        const double p = -(std::log(r.envelope[b]) - std::log(r.envelope[a])) / (std::log(x2[b]) - std::log(x2[a]));
        r.local_exponent[i] = p;
        r.max_exponent = std::max(r.max_exponent, p);
        if (p >= opt.threshold && std::isnan(r.x2_threshold)) r.x2_threshold = x2[i];
    }

    // Gaussian and exponential fits over the final monotone run above the floor
    r.fit_start = last;
    while (r.fit_start > r.tail_start && v[r.fit_start - 1] > v[r.fit_start]) --r.fit_start;
    std::vector<double> t, t2, lv, ones;
    for (std::size_t i = r.fit_start; i <= last; ++i) {
        t.push_back(x2[i]);
        t2.push_back(x2[i] * x2[i]);
        lv.push_back(std::log(r.envelope[i]));
        ones.push_back(1.0);
    }
    if (t.size() >= 3) {
        const LineFit g = fit_line(t2, lv);
        r.gaussian_c = -g.slope;
        r.gaussian_r2 = g.r2;
        std::vector<double> ev;
        for (std::size_t i = r.fit_start; i <= last; ++i) ev.push_back(r.envelope[i]);
        r.exp_envelope = fit_envelope(t, ev, ones);
    }

    const bool crossed = !std::isnan(r.x2_threshold);
    const bool gauss_ok = !opt.require_gaussian || (r.gaussian_c > 0.0 && r.gaussian_r2 >= opt.gaussian_r2_min);
    if (crossed && gauss_ok) {
        r.verdict = Verdict::pass;
        r.reason = "local exponent crossed the threshold";
    } else if (crossed) {
        r.verdict = Verdict::fail;
        r.reason = "threshold crossed but Gaussian fit r2 below minimum";
    } else if (r.floor_reached) {
        r.verdict = Verdict::inconclusive;
        r.reason = "noise floor reached before the threshold";
    } else {
        r.verdict = Verdict::fail;
        r.reason = "local exponent stayed below the threshold";
    }
    return r;
}

// |edge - bulk| with the sup over sampled x1 at each x2
inline DecayReport superpoly_check(const CurrentDensityProfile& edge, const CurrentDensityProfile& bulk,
                                   const DecayOptions& opt = {}) {
    if (edge.b != bulk.b || edge.mu != bulk.mu || edge.T != bulk.T)
        throw domain_error("edge and bulk profiles have different (b, mu, T)");
    if (edge.samples.size() != bulk.samples.size()) throw domain_error("edge and bulk profiles differ in length");
    std::map<double, double> sup;
    for (std::size_t k = 0; k < edge.samples.size(); ++k) {
        const auto &e = edge.samples[k], &b = bulk.samples[k];
        if (std::abs(e.x1 - b.x1) > 1e-9 || std::abs(e.x2 - b.x2) > 1e-9)
            throw domain_error("edge and bulk profiles sampled at different points");
        double& s = sup[e.x2];
        s = std::max(s, std::abs(e.value - b.value));
    }
    std::vector<double> x2, v;
    for (const auto& [a, s] : sup) {
        x2.push_back(a);
        v.push_back(s);
    }
    return superpoly_check_values(std::move(x2), std::move(v), opt);
}

enum class EnvelopeForm { log, inverse, plain };

inline const char* to_string(EnvelopeForm f) {
    switch (f) {
    case EnvelopeForm::log: return "log";
    case EnvelopeForm::inverse: return "inverse";
    case EnvelopeForm::plain: return "plain";
    }
    return "?";
}

// |K(x,y)| <= C f(r) exp(-delta r); f = 1 + |ln(sqrt(lambda) r)|, 1/r or 1
inline EnvelopeFit envelope_fit(const Kernel& K, EnvelopeForm form, const std::vector<std::pair<Point, Point>>& samples,
                                double sqrt_lambda) {
    std::vector<double> t, v, pre;
    for (const auto& [x, y] : samples) {
        const double r = norm(x - y);
        if (!(r > 0.0)) throw domain_error("envelope sample on the diagonal");
        t.push_back(r);
        v.push_back(std::abs(K(x, y)));
        switch (form) {
        case EnvelopeForm::log: pre.push_back(1.0 + std::abs(std::log(sqrt_lambda * r))); break;
        case EnvelopeForm::inverse: pre.push_back(1.0 / r); break;
        case EnvelopeForm::plain: pre.push_back(1.0); break;
        }
    }
    return fit_envelope(t, v, pre);
}

// n pairs with r evenly spaced on [r_min, r_max], random directions, both points in the half-plane
inline std::vector<std::pair<Point, Point>> envelope_samples(double r_min, double r_max, int n, std::uint64_t seed) {
    if (!(r_min > 0.0 && r_max > r_min) || n < 2) throw domain_error("bad envelope sample range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<Point, Point>> out;
    for (int k = 0; k < n; ++k) {
        const double r = r_min + (r_max - r_min) * double(k) / (n - 1);
        Point x{0.0, 0.5 + 2.0 * u(rng)}, y;
        do {
            const double th = 2.0 * std::numbers::pi * u(rng);
            y = {x.x1 + r * std::cos(th), x.x2 + r * std::sin(th)};
        } while (!(y.x2 > 0.0));
        out.push_back({x, y});
    }
    return out;
}

} // namespace magedge

#endif
