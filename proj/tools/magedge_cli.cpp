// magedge: experiment driver. One subcommand per check, CSV + JSON out.
// exit: 0 pass, 2 inconclusive, 1 error or failed check

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <magedge/io/config.hpp>
#include <magedge/io/hash.hpp>
#include <magedge/pipeline.hpp>

extern "C" void openblas_set_num_threads(int);

namespace fs = std::filesystem;
using magedge::io::json;
using namespace magedge;

namespace {

constexpr int schema_version = 1;

struct Common {
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    int threads = 1;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void add(std::vector<json> r) {
        if (r.size() != columns.size()) throw std::logic_error("table " + name + ": row width");
        rows.push_back(std::move(r));
    }
};

std::string cell(const json& v) {
    if (v.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_null()) return "nan";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        return s.find_first_of(",\"\n") == std::string::npos ? s : "\"" + s + "\"";
    }
    return v.dump();
}

// NaN and inf have no JSON form
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_body(const Table& t) {
    std::ostringstream os;
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
    os << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << cell(r[k]);
        os << "\n";
    }
    return os.str();
}

struct Outcome {
    std::vector<Table> tables;
    json summary = json::object();
    Verdict verdict = Verdict::fail;
};

int exit_code(Verdict v) {
    switch (v) {
    case Verdict::pass: return 0;
    case Verdict::inconclusive: return 2;
    case Verdict::fail: return 1;
    }
    return 1;
}

// every file carries the resolved config and a hash of config + table content
void emit(const std::string& command, const json& resolved, const Outcome& o, const std::string& dir) {
    fs::create_directories(dir);
    const std::string cfg = resolved.dump();
    std::string all = cfg + "\n";
    json jt = json::object();
    for (const auto& t : o.tables) {
        const std::string body = csv_body(t);
        const std::string h = io::sha256_hex(cfg + "\n" + body);
        all += t.name + "\n" + body;
        const std::string file = command + (t.name == "main" ? "" : "_" + t.name) + ".csv";
        std::ofstream f(fs::path(dir) / file, std::ios::binary);
        f << "# magedge " << command << " table=" << t.name << " schema=" << schema_version << "\n";
        f << "# config: " << cfg << "\n";
        f << "# content_sha256: " << h << "\n";
        f << body;
        if (!f) throw std::runtime_error("cannot write " + file);
        json rows = json::array();
        for (const auto& r : t.rows) {
            json row = json::object();
            for (std::size_t k = 0; k < r.size(); ++k) row[t.columns[k]] = r[k];
            rows.push_back(row);
        }
        jt[t.name] = {{"columns", t.columns}, {"rows", rows}, {"content_sha256", h}};
    }
    json out = {{"schema", schema_version}, {"command", command},       {"config", resolved},
                {"verdict", to_string(o.verdict)}, {"summary", o.summary}, {"tables", jt},
                {"content_sha256", io::sha256_hex(all)}};
    std::ofstream f(fs::path(dir) / (command + ".json"), std::ios::binary);
    f << out.dump(2) << "\n";
    if (!f) throw std::runtime_error("cannot write " + command + ".json");
}

json load(const Common& c) {
    if (c.config_path.empty()) return json::object();
    std::ifstream f(c.config_path);
    if (!f) throw domain_error("cannot open config " + c.config_path);
    return json::parse(f, nullptr, true, true);  // comments allowed
}

void ignored(const char* flag, const char* cmd) {
    std::fprintf(stderr, "note: %s has no effect on %s\n", flag, cmd);
}

Verdict verdict_of(bool pass) { return pass ? Verdict::pass : Verdict::fail; }

// ---- commands; each returns (resolved config, outcome)

std::pair<json, Outcome> cmd_landau(const Common& cm) {
    auto c = io::from_json<LandauConfig>(load(cm));
    if (cm.tol) c.tol = *cm.tol;
    if (cm.seed) ignored("--seed", "landau-levels");
    const auto r = run_landau_levels(c);
    Outcome o;
    Table t{"main", {"level", "k", "eigenvalue", "expected", "cluster_center", "rel_err"}, {}};
    for (const auto& row : r.rows)
        for (std::size_t k = 0; k < row.eigenvalues.size(); ++k)
            t.add({row.level, int(k), num(row.eigenvalues[k]), num(c.b == 0.0 ? NAN : row.expected),
                   num(c.b == 0.0 ? NAN : row.center), num(c.b == 0.0 ? NAN : row.rel_err)});
    o.tables.push_back(t);
    o.summary = {{"dimension", r.dimension}, {"dirichlet_max_dev", num(r.dirichlet_max_dev)}};
    o.verdict = verdict_of(r.pass);
    return {io::to_json(c), o};
}

std::pair<json, Outcome> cmd_resolvent(const Common& cm) {
    auto c = io::from_json<ResolventCompareConfig>(load(cm));
    if (cm.tol) c.tol = *cm.tol;
    if (cm.seed) ignored("--seed", "resolvent-compare");
    const auto r = run_resolvent_compare(c);
    Outcome o;
    Table t{"main",
            {"x1", "x2", "xp1", "xp2", "kernel_re", "kernel_im", "kernel_err", "grid_re", "grid_im", "grid_fine_re",
             "grid_fine_im", "richardson_re", "richardson_im", "dev", "dev_fine", "dev_richardson"},
            {}};
    for (const auto& w : r.rows)
        t.add({w.x.x1, w.x.x2, w.xp.x1, w.xp.x2, num(w.kernel.real()), num(w.kernel.imag()), num(w.kernel_err),
               num(w.grid.real()), num(w.grid.imag()), num(w.grid_fine.real()), num(w.grid_fine.imag()),
               num(w.richardson.real()), num(w.richardson.imag()), num(w.dev), num(w.dev_fine),
               num(w.dev_richardson)});
    o.tables.push_back(t);
    o.summary = {{"contraction_bound", num(r.contraction_bound)}, {"max_dev", num(r.max_dev)},
                 {"max_dev_fine", num(r.max_dev_fine)}, {"shrinks", r.shrinks}};
    o.verdict = verdict_of(r.pass && (!c.refine || r.shrinks));
    return {io::to_json(c), o};
}

std::pair<json, Outcome> cmd_edge(const Common& cm) {
    json j = load(cm);
    std::optional<ErgodicityConfig> ergo;
    std::optional<GaugeCheckConfig> gauge;
    if (j.contains("ergodicity")) {
        ergo = io::from_json<ErgodicityConfig>(j["ergodicity"], "config.ergodicity");
        j.erase("ergodicity");
    }
    if (j.contains("gauge")) {
        gauge = io::from_json<GaugeCheckConfig>(j["gauge"], "config.gauge");
        j.erase("gauge");
    }
    auto c = io::from_json<EdgeCurrentConfig>(j);
    if (cm.seed) {
        c.seed = *cm.seed;
        if (ergo) ergo->seed = *cm.seed;
        if (gauge) gauge->seed = *cm.seed;
    }
    if (cm.tol) {
        if (gauge) gauge->tol = *cm.tol;
        else ignored("--tol", "edge-current without a gauge block");
    }

    const auto r = run_edge_current(c);
    Outcome o;
    Table prof{"main", {"x1", "x2", "edge", "bulk", "diff", "edge_stderr"}, {}};
    for (const auto& w : r.rows) prof.add({w.x1, w.x2, num(w.edge), num(w.bulk), num(w.diff), num(w.edge_stderr)});
    o.tables.push_back(prof);
    const auto& d = r.decay;
    Table dec{"decay", {"x2", "sup_diff", "envelope", "local_exponent"}, {}};
    for (std::size_t k = 0; k < d.abscissae.size(); ++k)
        dec.add({d.abscissae[k], num(d.values[k]), num(d.envelope[k]), num(d.local_exponent[k])});
    o.tables.push_back(dec);
    if (!r.per_seed.empty()) {
        Table ps{"seeds", {"seed", "x1", "x2", "value"}, {}};
        for (std::size_t s = 0; s < r.per_seed.size(); ++s)
            for (const auto& smp : r.per_seed[s].samples) ps.add({c.seed + s, smp.x1, smp.x2, num(smp.value)});
        o.tables.push_back(ps);
    }
    o.summary = {{"decay_verdict", to_string(d.verdict)},
                 {"reason", d.reason},
                 {"max_exponent", num(d.max_exponent)},
                 {"x2_threshold", num(d.x2_threshold)},
                 {"gaussian_c", num(d.gaussian_c)},
                 {"gaussian_r2", num(d.gaussian_r2)},
                 {"exp_envelope", {{"C", num(d.exp_envelope.C)}, {"delta", num(d.exp_envelope.delta)}}},
                 {"noise_floor", num(d.noise_floor)},
                 {"floor_reached", d.floor_reached},
                 {"bulk_center_current", num(r.bulk_center_current)},
                 {"E0", num(r.E0)},
                 {"imag_flag", r.imag_flag}};
    Verdict v = d.verdict;
    auto demote = [&v](bool ok) {
        if (!ok) v = Verdict::fail;
    };
    if (ergo) {
        const auto e = run_disorder_ergodicity(*ergo);
        Table et{"ergodicity", {"x2", "mean_a", "se_a", "mean_b", "se_b", "paired_diff", "paired_se"}, {}};
        for (const auto& w : e.rows)
            et.add({w.x2, num(w.mean_a), num(w.se_a), num(w.mean_b), num(w.se_b), num(w.diff), num(w.se_diff)});
        o.tables.push_back(et);
        o.summary["ergodicity"] = {{"probe_mean", num(e.probe_mean)}, {"probe_se", num(e.probe_se)},
                                   {"probe_rel_se", num(e.probe_rel_se)}, {"max_z", num(e.max_z)},
                                   {"max_z_paired", num(e.max_z_paired)}, {"exceed", e.exceed},
                                   {"pass_se", e.pass_se}, {"pass_translation", e.pass_translation}};
        demote(e.pass);
    }
    if (gauge) {
        const auto g = run_gauge_check(*gauge);
        o.summary["gauge"] = {{"max_abs_diff", num(g.max_abs_diff)}, {"max_abs_value", num(g.max_abs_value)},
                              {"sites", g.sites}, {"pass", g.pass}};
        demote(g.pass);
    }
    o.verdict = v;
    json resolved = io::to_json(c);
    if (ergo) resolved["ergodicity"] = io::to_json(*ergo);
    if (gauge) resolved["gauge"] = io::to_json(*gauge);
    return {resolved, o};
}

std::pair<json, Outcome> cmd_hs(const Common& cm) {
    auto c = io::from_json<HsCheckConfig>(load(cm));
    if (cm.tol) c.tol = *cm.tol;
    if (cm.seed) c.seed = *cm.seed;
    const auto r = run_hs_check(c);
    Outcome o;
    Table t{"main", {"N", "panel_scale", "z2_min", "nodes", "rel_err", "truncation_bound", "C_N"}, {}};
    for (const auto& w : r.rows)
        t.add({w.N, w.panel_scale, w.z2_min, w.nodes, num(w.rel_err), num(w.truncation_bound), num(w.C_N)});
    o.tables.push_back(t);
    Table cn{"cn", {"N", "C_N", "ray_exponent"}, {}};
    for (std::size_t k = 0; k < r.C_N_fits.size(); ++k)
        cn.add({r.C_N_fits[k].first, num(r.C_N_fits[k].second),
                num(k < r.ray_exponents.size() ? r.ray_exponents[k].second : NAN)});
    o.tables.push_back(cn);
    o.summary = {{"dimension", r.dimension}, {"E0", num(r.E0)}};
    o.verdict = verdict_of(r.pass);
    return {io::to_json(c), o};
}

std::pair<json, Outcome> cmd_gpt(const Common& cm) {
    auto c = io::from_json<GptCheckConfig>(load(cm));
    if (cm.seed) c.seed = *cm.seed;
    if (cm.tol) ignored("--tol", "gpt-check (set min_order in the config)");
    const auto r = run_gpt_check(c);
    Outcome o;
    Table t{"main", {"h", "residual", "W_norm", "edge_sites", "bulk_sites"}, {}};
    for (const auto& w : r.rows) t.add({w.h, num(w.residual), num(w.W_norm), w.edge_sites, w.bulk_sites});
    o.tables.push_back(t);
    const auto& k = r.cutoffs;
    o.summary = {{"order", num(r.order)},
                 {"cutoffs",
                  {{"partition_residual", k.partition_residual}, {"tilde_residual", k.tilde_residual},
                   {"disjoint_product", k.disjoint_product}, {"support_violation", k.support_violation},
                   {"sup_d1_eta0", k.sup_d1_eta0}, {"sup_d2_eta0", k.sup_d2_eta0},
                   {"sup_d1_tilde", k.sup_d1_tilde}, {"sup_d2_tilde", k.sup_d2_tilde}}}};
    o.verdict = verdict_of(r.pass);
    return {io::to_json(c), o};
}

std::pair<json, Outcome> cmd_specfun(const Common& cm) {
    json j = load(cm);
    double tol = 1e-12;
    if (j.contains("tol")) {
        if (!j["tol"].is_number()) throw domain_error("config.tol: expected a number");
        tol = j["tol"].get<double>();
        j.erase("tol");
    }
    if (!j.empty()) throw domain_error("config: unknown key '" + j.begin().key() + "'");
    if (cm.tol) tol = *cm.tol;
    if (cm.seed) ignored("--seed", "specfun-selftest");
    const auto r = run_specfun_selftest(tol);
    Outcome o;
    Table t{"main", {"name", "value", "reference", "rel_err", "tol", "pass"}, {}};
    for (const auto& w : r.rows) t.add({w.name, num(w.value), num(w.reference), num(w.rel_err), num(w.tol), w.pass});
    o.tables.push_back(t);
    o.verdict = verdict_of(r.pass);
    return {json{{"tol", tol}}, o};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"magedge: magnetic edge-current numerics"};
    app.require_subcommand(1);
    Common cm;
    using Fn = std::pair<json, Outcome> (*)(const Common&);
    const std::vector<std::tuple<const char*, const char*, Fn>> cmds{
        {"landau-levels", "grid Landau level clusters", cmd_landau},
        {"resolvent-compare", "kernel engine vs grid resolvent", cmd_resolvent},
        {"edge-current", "edge current profile and decay verdict", cmd_edge},
        {"hs-check", "Helffer-Sjostrand vs eigendecomposition", cmd_hs},
        {"gpt-check", "gluing identity residual over an h ladder", cmd_gpt},
        {"specfun-selftest", "Bessel K oracle and recurrence checks", cmd_specfun},
    };
    std::string chosen;
    Fn run = nullptr;
    for (const auto& [name, help, fn] : cmds) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("--config", cm.config_path, "JSON config; flags override it")->check(CLI::ExistingFile);
        sc->add_option("--out", cm.out_dir, "output directory")->capture_default_str();
        sc->add_option("--seed", cm.seed, "RNG seed override");
        sc->add_option("--threads", cm.threads, "BLAS threads")->check(CLI::PositiveNumber)->capture_default_str();
        sc->add_option("--tol", cm.tol, "tolerance override");
        sc->callback([&chosen, &run, name = std::string(name), fn = fn] {
            chosen = name;
            run = fn;
        });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    try {
        openblas_set_num_threads(cm.threads);
        auto [resolved, outcome] = run(cm);
        json full = {{"command", chosen}, {"params", resolved}};
        emit(chosen, full, outcome, cm.out_dir);
        std::fprintf(stderr, "%s: %s (%s)\n", chosen.c_str(), to_string(outcome.verdict), cm.out_dir.c_str());
        return exit_code(outcome.verdict);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
