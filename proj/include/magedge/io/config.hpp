#ifndef MAGEDGE_IO_CONFIG_HPP
#define MAGEDGE_IO_CONFIG_HPP

// JSON <-> run configs. One visit() per struct drives both directions.
// Missing keys keep their defaults, unknown keys are rejected.

#include <complex>
#include <cstdint>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "../errors.hpp"
#include "../pipeline.hpp"

namespace magedge::io {

using json = nlohmann::json;

// ---- enum names

template <class E>
struct EnumNames;

#define MAGEDGE_ENUM_NAMES(E, ...)                                                   \
    template <>                                                                      \
    struct EnumNames<E> {                                                            \
        static const std::vector<std::pair<E, const char*>>& get() {                \
            static const std::vector<std::pair<E, const char*>> v{__VA_ARGS__};     \
            return v;                                                                \
        }                                                                            \
    };

MAGEDGE_ENUM_NAMES(FMethod, {FMethod::eig, "eig"}, {FMethod::hs, "hs"})
MAGEDGE_ENUM_NAMES(DisorderLaw, {DisorderLaw::uniform, "uniform"}, {DisorderLaw::two_point, "two-point"})
#undef MAGEDGE_ENUM_NAMES

template <class E>
concept NamedEnum = requires { EnumNames<E>::get(); };

// ---- visitors

class Reader;
class Writer;

template <class T>
concept Visitable = requires(T& t, Writer& w) { visit(w, t); };

template <class T>
void read_value(const json& j, T& v, const std::string& key);
template <class T>
json write_value(const T& v);

class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw domain_error(where_ + ": expected an object");
    }
    template <class T>
    void operator()(const char* key, T& v) {
        seen_.insert(key);
        if (j_.contains(key)) read_value(j_.at(key), v, where_ + "." + key);
    }
    void finish() const {
        for (const auto& [k, _] : j_.items())
            if (!seen_.count(k)) throw domain_error(where_ + ": unknown key '" + k + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

class Writer {
public:
    explicit Writer(json& j) : j_(j) {}
    template <class T>
    void operator()(const char* key, const T& v) { j_[key] = write_value(v); }

private:
    json& j_;
};

template <class T>
void read_value(const json& j, T& v, const std::string& key) {
    auto bad = [&](const char* what) { throw domain_error(key + ": expected " + what); };
    if constexpr (std::is_same_v<T, bool>) {
        if (!j.is_boolean()) bad("a boolean");
        v = j.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!j.is_number_unsigned()) bad("a non-negative integer");
        v = j.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer()) bad("an integer");
        v = j.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!j.is_number()) bad("a number");
        v = j.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!j.is_string()) bad("a string");
        v = j.get<std::string>();
    } else if constexpr (std::is_same_v<T, cplx>) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad("[re, im]");
        v = {j[0].get<double>(), j[1].get<double>()};
    } else if constexpr (std::is_same_v<T, Point>) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad("[x1, x2]");
        v = {j[0].get<double>(), j[1].get<double>()};
    } else if constexpr (NamedEnum<T>) {
        if (!j.is_string()) bad("a string");
        const auto s = j.get<std::string>();
        for (const auto& [e, n] : EnumNames<T>::get())
            if (s == n) {
                v = e;
                return;
            }
        throw domain_error(key + ": unknown value '" + s + "'");
    } else if constexpr (Visitable<T>) {
        Reader r(j, key);
        visit(r, v);
        r.finish();
    } else {
        // vectors and pairs
        if (!j.is_array()) bad("an array");
        if constexpr (requires { v.first; v.second; }) {
            if (j.size() != 2) bad("a pair");
            read_value(j[0], v.first, key + "[0]");
            read_value(j[1], v.second, key + "[1]");
        } else {
            v.clear();
            for (std::size_t k = 0; k < j.size(); ++k) {
                typename T::value_type e{};
                read_value(j[k], e, key + "[" + std::to_string(k) + "]");
                v.push_back(std::move(e));
            }
        }
    }
}

template <class T>
json write_value(const T& v) {
    if constexpr (std::is_arithmetic_v<T> || std::is_same_v<T, std::string>) {
        return v;
    } else if constexpr (std::is_same_v<T, cplx>) {
        return json::array({v.real(), v.imag()});
    } else if constexpr (std::is_same_v<T, Point>) {
        return json::array({v.x1, v.x2});
    } else if constexpr (NamedEnum<T>) {
        for (const auto& [e, n] : EnumNames<T>::get())
            if (e == v) return n;
        return nullptr;
    } else if constexpr (Visitable<T>) {
        json j = json::object();
        Writer w(j);
        visit(w, const_cast<T&>(v));
        return j;
    } else if constexpr (requires { v.first; v.second; }) {
        return json::array({write_value(v.first), write_value(v.second)});
    } else {
        json j = json::array();
        for (const auto& e : v) j.push_back(write_value(e));
        return j;
    }
}

// ---- field tables

template <class V>
void visit(V& v, LandauConfig& c) {
    v("b", c.b); v("h", c.h); v("L", c.L); v("levels", c.levels); v("nev", c.nev); v("tol", c.tol);
}

template <class V>
void visit(V& v, ResolventCompareConfig& c) {
    v("b", c.b); v("lambda", c.lambda); v("h", c.h);
    v("box_L1", c.box_L1); v("box_L2", c.box_L2); v("background", c.background);
    v("order", c.order); v("target_abs_err", c.target_abs_err); v("tol", c.tol);
    v("refine", c.refine); v("pairs", c.pairs);
}

template <class V>
void visit(V& v, DecayOptions& c) {
    v("threshold", c.threshold); v("noise_floor_abs", c.noise_floor_abs); v("noise_floor_rel", c.noise_floor_rel);
    v("gaussian_r2_min", c.gaussian_r2_min); v("require_gaussian", c.require_gaussian);
}

template <class V>
void visit(V& v, DisorderSpec& c) {
    v("seeds", c.seeds); v("amplitude", c.amplitude); v("bump_radius", c.bump_radius); v("law", c.law);
}

template <class V>
void visit(V& v, EdgeCurrentConfig& c) {
    v("b", c.b); v("T", c.T); v("mu", c.mu); v("h", c.h);
    v("L1", c.L1); v("L2", c.L2); v("bulk_lo", c.bulk_lo); v("bulk_hi", c.bulk_hi);
    v("x2_max", c.x2_max); v("x1_samples", c.x1_samples); v("background", c.background);
    v("method", c.method); v("N", c.N); v("cutoff_width", c.cutoff_width);
    v("hs_z2_min", c.hs_z2_min); v("hs_panel_scale", c.hs_panel_scale);
    v("decay", c.decay); v("disorder", c.disorder); v("seed", c.seed);
}

template <class V>
void visit(V& v, ErgodicityConfig& c) {
    v("b", c.b); v("T", c.T); v("mu", c.mu); v("h", c.h); v("L1", c.L1); v("L2", c.L2);
    v("x1", c.x1); v("x2_probe", c.x2_probe); v("x2_max", c.x2_max); v("background", c.background);
    v("disorder", c.disorder); v("seed", c.seed); v("rel_se_max", c.rel_se_max); v("z_max", c.z_max);
}

template <class V>
void visit(V& v, GaugeCheckConfig& c) {
    v("b", c.b); v("T", c.T); v("mu", c.mu); v("h", c.h); v("L1", c.L1); v("L2", c.L2);
    v("background", c.background); v("seed", c.seed); v("tol", c.tol);
}

template <class V>
void visit(V& v, HsCheckConfig& c) {
    v("b", c.b); v("mu", c.mu); v("T", c.T); v("h", c.h); v("half_width", c.half_width);
    v("N_values", c.N_values); v("z2_min", c.z2_min); v("panel_scale", c.panel_scale);
    v("refine", c.refine); v("tol", c.tol); v("seed", c.seed);
}

template <class V>
void visit(V& v, GptCheckConfig& c) {
    v("b", c.b); v("ell", c.ell); v("z", c.z); v("hs", c.hs);
    v("L1", c.L1); v("L2", c.L2); v("bulk_lo", c.bulk_lo); v("background", c.background);
    v("min_order", c.min_order); v("seed", c.seed);
}

// ---- entry points

template <Visitable T>
T from_json(const json& j, const std::string& where = "config") {
    T c{};
    read_value(j, c, where);
    return c;
}

template <Visitable T>
json to_json(const T& c) {
    return write_value(c);
}

} // namespace magedge::io

#endif
