// tools/kepler_cz.cpp
// Command-line front end: catalog, index, moduli, bifurcation, ledger and
// verify commands with deterministic JSON or CSV output.
//
// Exit codes: 0 success, 1 usage, 2 domain precondition, 3 verification
// failure.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rkp/rkp.hpp"

using njson = nlohmann::ordered_json;
using namespace rkp;

namespace {

// ---------------------------------------------------------------------------
// Output plumbing

struct Report {
    std::string command;
    njson config = njson::object();
    std::vector<std::string> columns;
    std::vector<njson> rows;
    std::vector<std::string> diagnostics;
};

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_cell(const njson& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return csv_quote(v.get<std::string>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_float()) return fmt17(v.get<double>());
    if (v.is_array()) {
        std::string joined;
        for (const auto& e : v) {
            if (!joined.empty()) joined += "; ";
            joined += e.is_string() ? e.get<std::string>() : e.dump();
        }
        return csv_quote(joined);
    }
    return csv_quote(v.dump());
}

std::string render_json(const Report& r) {
    njson j;
    j["command"] = r.command;
    j["config"] = r.config;
    j["rows"] = njson::array();
    for (const njson& row : r.rows) j["rows"].push_back(row);
    j["diagnostics"] = r.diagnostics;
    return j.dump(2) + "\n";
}

std::string render_csv(const Report& r) {
    std::string out;
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(r.columns[i]);
    }
    out += '\n';
    for (const njson& row : r.rows) {
        for (std::size_t i = 0; i < r.columns.size(); ++i) {
            if (i) out += ',';
            out += csv_cell(row.contains(r.columns[i]) ? row[r.columns[i]] : njson());
        }
        out += '\n';
    }
    return out;
}

int emit(const Report& r, const std::string& format, const std::string& out_path) {
    const std::string text = format == "csv" ? render_csv(r) : render_json(r);
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "kepler-cz: cannot open output file '%s'\n", out_path.c_str());
        return 1;
    }
    f << text;
    return f.good() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Shared helpers

int thread_cap() {
    if (const char* env = std::getenv("KEPLER_CZ_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

/// Selector grammar: retrograde | direct | collision+ | collision- | family k,l.
struct Selector {
    OrbitKind kind = OrbitKind::Retrograde;
    std::optional<FamilyId> family;

    std::string str() const {
        if (family)
            return "family " + std::to_string(family->k) + "," + std::to_string(family->l);
        return orbit_kind_name(kind);
    }
};

bool parse_family_pair(const std::string& text, int& k, int& l) {
    char extra = 0;
    return std::sscanf(text.c_str(), "%d ,%d %c", &k, &l, &extra) == 2 && k >= 1 && l >= 1;
}

std::optional<Selector> parse_selector(const std::string& orbit, const std::string& family_arg) {
    Selector sel;
    if (!family_arg.empty()) {
        if (!orbit.empty()) return std::nullopt;  // both --orbit and --family given
        int k = 0, l = 0;
        if (!parse_family_pair(family_arg, k, l)) return std::nullopt;
        sel.kind = OrbitKind::Family;
        sel.family = FamilyId(k, l);
        return sel;
    }
    if (orbit == "retrograde") {
        sel.kind = OrbitKind::Retrograde;
    } else if (orbit == "direct") {
        sel.kind = OrbitKind::Direct;
    } else if (orbit == "collision+") {
        sel.kind = OrbitKind::CollisionPlus;
    } else if (orbit == "collision-") {
        sel.kind = OrbitKind::CollisionMinus;
    } else if (orbit.rfind("family", 0) == 0) {
        int k = 0, l = 0;
        if (!parse_family_pair(orbit.substr(6), k, l)) return std::nullopt;
        sel.kind = OrbitKind::Family;
        sel.family = FamilyId(k, l);
    } else {
        return std::nullopt;
    }
    return sel;
}

const char* endpoint_name(Crossing::Endpoint ep) {
    switch (ep) {
        case Crossing::Endpoint::Start: return "start";
        case Crossing::Endpoint::Interior: return "interior";
        case Crossing::Endpoint::End: return "end";
    }
    return "?";
}

void print_domain_error(const Error& e) {
    std::fprintf(stderr, "kepler-cz: %s\n", e.what());
    if (const auto* ng = dynamic_cast<const NonGenericError*>(&e)) {
        for (const auto& off : ng->offenders)
            std::fprintf(stderr, "  offender (%d,%d): %s energy %s\n", off.k, off.l,
                         off.kind.c_str(), fmt17(off.value).c_str());
    }
}

/// Apply a JSON config-file value to every option the command line left unset.
template <class T>
void cfg_override(const njson& j, const char* key, const CLI::Option* opt, T& var) {
    if (j.contains(key) && (!opt || opt->count() == 0)) var = j.at(key).get<T>();
}

njson load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw njson::parse_error::create(101, 0, "cannot open config file '" + path + "'", nullptr);
    return njson::parse(f);
}

// ---------------------------------------------------------------------------
// catalog

int cmd_catalog(double c, int covers, int kmax, const std::string& format,
                const std::string& out_path) {
    if (c >= -1.5)
        throw EnergyRangeError("catalog: Jacobi energy must lie below the critical value -3/2");
    const GenericityReport gen = is_generic(c, kmax);
    if (!gen.generic)
        throw NonGenericError("catalog: Jacobi energy fails genericity", gen.offenders);

    const std::vector<OrbitRecord> recs = catalog(c, covers, kmax);
    std::vector<njson> rows(recs.size());
    auto make_row = [&](const OrbitRecord& rec) {
        njson row;
        row["kind"] = orbit_kind_name(rec.kind);
        row["k"] = rec.family ? njson(rec.family->k) : njson();
        row["l"] = rec.family ? njson(rec.family->l) : njson();
        row["N"] = rec.N;
        row["E"] = rec.E;
        row["period"] = rec.N * rec.period;
        row["index"] = closed_form_index(rec).str();
        int l3_sign = 0;
        if (rec.kind == OrbitKind::Retrograde) l3_sign = 1;
        if (rec.kind == OrbitKind::Direct) l3_sign = -1;
        if (rec.kind == OrbitKind::Family) l3_sign = (c - rec.E > 0.0) ? 1 : -1;
        row["L3_sign"] = l3_sign;
        return row;
    };

    // Rows are independent; the cap comes from KEPLER_CZ_THREADS. Results
    // land in a pre-sized vector, so the output order is the catalog order
    // no matter how the work is split.
    const int n_threads = std::min<int>(thread_cap(), static_cast<int>(recs.size()));
    if (n_threads <= 1 || recs.size() < 32) {
        for (std::size_t i = 0; i < recs.size(); ++i) rows[i] = make_row(recs[i]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < recs.size();
                     i += static_cast<std::size_t>(n_threads))
                    rows[i] = make_row(recs[i]);
            });
        for (std::thread& th : pool) th.join();
    }

    Report rep;
    rep.command = "catalog";
    rep.config = {{"jacobi", c}, {"covers", covers}, {"kmax", kmax}};
    rep.columns = {"kind", "k", "l", "N", "E", "period", "index", "L3_sign"};
    rep.rows = std::move(rows);
    return emit(rep, format, out_path);
}

// ---------------------------------------------------------------------------
// index

int cmd_index(const Selector& sel, double c, int cover, bool numeric, double rtol, double atol,
              const std::string& format, const std::string& out_path) {
    OrbitRecord rec;
    rec.kind = sel.kind;
    rec.c = c;
    rec.N = cover;
    switch (sel.kind) {
        case OrbitKind::Retrograde:
            rec.E = circular_energies(c).retrograde();
            rec.period = circular_period(rec.E, +1);
            break;
        case OrbitKind::Direct:
            rec.E = circular_energies(c).direct();
            rec.period = circular_period(rec.E, -1);
            break;
        case OrbitKind::CollisionPlus:
        case OrbitKind::CollisionMinus:
            if (c >= 0.0) throw EnergyRangeError("index: collision orbits need c < 0");
            rec.E = c;
            rec.period = kepler_period(c);
            break;
        case OrbitKind::Family:
            rec.family = *sel.family;
            rec.E = resonance_energy(sel.family->k, sel.family->l);
            rec.period = 2.0 * M_PI * sel.family->l;
            rec.N = 1;
            break;
        default:
            throw InvalidOrbitError("index: unsupported orbit kind");
    }
    const HalfInteger closed = closed_form_index(rec);

    Report rep;
    rep.command = "index";
    rep.config = {{"jacobi", c},        {"orbit", sel.str()}, {"cover", rec.N},
                  {"numeric", numeric}, {"rtol", rtol},       {"atol", atol}};
    rep.columns = {"row",           "orbit",     "kind", "k",        "l",
                   "N",             "E",         "period", "index",  "numeric_index",
                   "agreement",     "part",      "t",    "signature", "endpoint",
                   "kernel_dim"};

    njson summary;
    summary["row"] = "summary";
    summary["orbit"] = sel.str();
    summary["kind"] = orbit_kind_name(rec.kind);
    summary["k"] = rec.family ? njson(rec.family->k) : njson();
    summary["l"] = rec.family ? njson(rec.family->l) : njson();
    summary["N"] = rec.N;
    summary["E"] = rec.E;
    summary["period"] = rec.N * rec.period;
    summary["index"] = closed.str();
    summary["numeric_index"] = njson();
    summary["agreement"] = njson();

    bool agree = true;
    std::vector<njson> crossing_rows;
    if (numeric) {
        IntegratorConfig icfg;
        icfg.rtol = rtol;
        icfg.atol = atol;
        const NumericCzResult res = numeric_cz(rec, icfg);
        summary["numeric_index"] = res.index.str();
        agree = res.index == closed;
        summary["agreement"] = agree;
        if (!agree)
            rep.diagnostics.push_back("numeric index " + res.index.str() +
                                      " disagrees with closed form " + closed.str());
        const bool split = res.parts.size() == 2;
        for (std::size_t pi = 0; pi < res.parts.size(); ++pi) {
            const std::string part = split ? (pi == 0 ? "Psi_KE" : "Psi_L") : "Psi_H";
            for (const Crossing& cr : res.parts[pi].crossings) {
                njson row;
                row["row"] = "crossing";
                row["part"] = part;
                row["t"] = cr.t;
                row["signature"] = cr.signature;
                row["endpoint"] = endpoint_name(cr.endpoint);
                row["kernel_dim"] = static_cast<int>(cr.kernel.cols());
                crossing_rows.push_back(std::move(row));
            }
            for (const std::string& note : res.parts[pi].notes)
                rep.diagnostics.push_back(part + ": " + note);
        }
    }
    rep.rows.push_back(std::move(summary));
    for (njson& row : crossing_rows) rep.rows.push_back(std::move(row));
    const int rc = emit(rep, format, out_path);
    if (rc != 0) return rc;
    return agree ? 0 : 3;
}

// ---------------------------------------------------------------------------
// moduli

int cmd_moduli(double energy, std::optional<double> level, int samples, std::uint64_t seed,
               const std::string& format, const std::string& out_path) {
    Report rep;
    rep.command = "moduli";
    if (level) {
        rep.config = {{"energy", energy},
                      {"mode", "level-set"},
                      {"level", *level},
                      {"samples", samples},
                      {"seed", seed}};
        rep.columns = {"x1", "x2", "x3", "y1", "y2", "y3", "l3", "a3"};
        for (const SpherePair& sp : level_set_sample(energy, *level, samples, seed)) {
            njson row;
            row["x1"] = sp.x.x();
            row["x2"] = sp.x.y();
            row["x3"] = sp.x.z();
            row["y1"] = sp.y.x();
            row["y2"] = sp.y.y();
            row["y3"] = sp.y.z();
            row["l3"] = l3_value(energy, sp);
            row["a3"] = a3_value(sp);
            rep.rows.push_back(std::move(row));
        }
    } else {
        rep.config = {{"energy", energy}, {"mode", "critical-points"}};
        rep.columns = {"function", "name", "morse_index", "value", "x1",
                       "x2",       "x3",   "y1",          "y2",    "y3"};
        for (const MorseData& md : {l3_morse_data(energy), a3_morse_data(energy)}) {
            for (const CriticalPoint& cp : md.points) {
                njson row;
                row["function"] = md.function;
                row["name"] = cp.name;
                row["morse_index"] = cp.morse_index;
                row["value"] = cp.value;
                row["x1"] = cp.sp.x.x();
                row["x2"] = cp.sp.x.y();
                row["x3"] = cp.sp.x.z();
                row["y1"] = cp.sp.y.x();
                row["y2"] = cp.sp.y.y();
                row["y3"] = cp.sp.y.z();
                rep.rows.push_back(std::move(row));
            }
        }
    }
    return emit(rep, format, out_path);
}

// ---------------------------------------------------------------------------
// bifurcation

int cmd_bifurcation(const FamilyId& id, const std::string& format, const std::string& out_path) {
    const BifurcationSchedule sched = bifurcation_schedule(id.k, id.l);
    auto cover_label = [](const char* base, int cover) {
        return cover == 1 ? std::string(base) : std::string(base) + "^" + std::to_string(cover);
    };
    Report rep;
    rep.command = "bifurcation";
    rep.config = {{"family", std::to_string(id.k) + "," + std::to_string(id.l)}};
    rep.columns = {"k", "l", "c_minus", "birth", "c_plus", "death"};
    njson row;
    row["k"] = id.k;
    row["l"] = id.l;
    row["c_minus"] = sched.c_minus;
    row["birth"] = cover_label("direct", sched.birth_cover);
    row["c_plus"] = sched.c_plus;
    row["death"] = cover_label("retrograde", sched.death_cover);
    rep.rows.push_back(std::move(row));
    return emit(rep, format, out_path);
}

// ---------------------------------------------------------------------------
// ledger

int cmd_ledger(double c, long long cap, int kmax, const std::string& format,
               const std::string& out_path) {
    const LedgerReport led = compare_with_reference(c, cap, 1024, kmax);
    Report rep;
    rep.command = "ledger";
    rep.config = {{"jacobi", c}, {"cap", cap}, {"kmax", kmax}};
    rep.columns = {"degree", "multiplicity", "reference", "status", "generators"};
    for (const DegreeLine& line : led.lines) {
        njson row;
        row["degree"] = line.degree;
        row["multiplicity"] = line.multiplicity;
        row["reference"] = line.reference;
        row["status"] = line.status;
        row["generators"] = line.generators;
        rep.rows.push_back(std::move(row));
    }
    rep.diagnostics.push_back("n_star = " + std::to_string(led.n_star));
    rep.diagnostics.push_back("trusted_cap = " + std::to_string(led.trusted_cap));
    rep.diagnostics.push_back(led.all_match ? "all trusted degrees match"
                                            : "mismatch among trusted degrees");
    const int rc = emit(rep, format, out_path);
    if (rc != 0) return rc;
    return led.all_match ? 0 : 3;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& format,
               const std::string& out_path) {
    const SuiteResult res = run_suite(suite, seed);
    Report rep;
    rep.command = "verify";
    rep.config = {{"suite", suite}, {"seed", seed}};
    rep.columns = {"suite", "property", "passed", "counterexample"};
    for (const PropertyResult& p : res.checks) {
        njson row;
        row["suite"] = res.name;
        row["property"] = p.property;
        row["passed"] = p.passed;
        row["counterexample"] = p.counterexample;
        rep.rows.push_back(std::move(row));
        if (!p.passed && rep.diagnostics.empty())
            rep.diagnostics.push_back("first counterexample: " + p.property + ": " +
                                      p.counterexample);
    }
    const int rc = emit(rep, format, out_path);
    if (rc != 0) return rc;
    return res.passed() ? 0 : 3;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"Periodic orbits of the spatial rotating Kepler problem: catalog, "
                 "Conley-Zehnder indices, moduli space, bifurcations, and the "
                 "symplectic-homology ledger"};
    app.require_subcommand(1);

    std::string format = "json";
    std::string out_path;
    std::string config_path;
    CLI::Option* o_format = app.add_option("--format", format, "Output format (json or csv)")
                                ->check(CLI::IsMember({"json", "csv"}));
    CLI::Option* o_out = app.add_option("--out", out_path, "Write output to a file");
    app.add_option("--config", config_path,
                   "JSON config file; keys mirror the emitted config block and "
                   "command-line flags take precedence");

    // catalog
    double cat_jacobi = -2.1;
    int cat_covers = 3, cat_kmax = 11;
    CLI::App* cat = app.add_subcommand(
        "catalog", "All periodic-orbit covers and families on one energy surface");
    cat->fallthrough();
    CLI::Option* o_cat_jacobi = cat->add_option("--jacobi", cat_jacobi, "Jacobi energy c < -3/2");
    CLI::Option* o_cat_covers = cat->add_option("--covers", cat_covers, "Maximum cover number")
                                    ->check(CLI::PositiveNumber);
    CLI::Option* o_cat_kmax =
        cat->add_option("--kmax", cat_kmax, "Maximum k of the (k,l) resonance families")
            ->check(CLI::PositiveNumber);

    // index
    std::string idx_orbit, idx_family;
    double idx_jacobi = -2.1, idx_rtol = 1e-10, idx_atol = 1e-10;
    int idx_cover = 1;
    bool idx_numeric = false;
    CLI::App* idx = app.add_subcommand(
        "index", "Conley-Zehnder or Robbin-Salamon index of one orbit cover");
    idx->fallthrough();
    CLI::Option* o_idx_jacobi = idx->add_option("--jacobi", idx_jacobi, "Jacobi energy c");
    CLI::Option* o_idx_orbit = idx->add_option(
        "--orbit", idx_orbit,
        "Orbit selector: retrograde | direct | collision+ | collision- | family k,l");
    CLI::Option* o_idx_family =
        idx->add_option("--family", idx_family, "Family selector shorthand: k,l");
    CLI::Option* o_idx_cover =
        idx->add_option("--cover", idx_cover, "Cover number N")->check(CLI::PositiveNumber);
    CLI::Option* o_idx_numeric = idx->add_flag(
        "--numeric", idx_numeric,
        "Recompute the index from the variational flow and emit the crossing audit trail");
    CLI::Option* o_idx_rtol =
        idx->add_option("--rtol", idx_rtol, "Integrator relative tolerance")
            ->check(CLI::PositiveNumber);
    CLI::Option* o_idx_atol =
        idx->add_option("--atol", idx_atol, "Integrator absolute tolerance")
            ->check(CLI::PositiveNumber);

    // moduli
    double mod_energy = -2.1;
    double mod_level = 0.0;
    int mod_samples = 64;
    std::uint64_t mod_seed = 12345;
    CLI::App* mod = app.add_subcommand(
        "moduli", "Critical points or level-set samples on the product of spheres");
    mod->fallthrough();
    CLI::Option* o_mod_energy =
        mod->add_option("--energy", mod_energy, "Kepler energy E < 0 of the moduli space");
    CLI::Option* o_mod_level =
        mod->add_option("--level", mod_level, "Sample the level set L3 = value");
    CLI::Option* o_mod_samples =
        mod->add_option("--samples", mod_samples, "Number of level-set samples")
            ->check(CLI::PositiveNumber);
    CLI::Option* o_mod_seed = mod->add_option("--seed", mod_seed, "Sampling seed");

    // bifurcation
    std::string bif_family;
    CLI::App* bif = app.add_subcommand(
        "bifurcation", "Birth and death schedule of one torus family");
    bif->fallthrough();
    CLI::Option* o_bif_family =
        bif->add_option("--family", bif_family, "Family selector: k,l")->required();

    // ledger
    double led_jacobi = -2.1;
    long long led_cap = 10;
    int led_kmax = 64;
    CLI::App* led = app.add_subcommand(
        "ledger", "Generator multiplicities against the reference homology ranks");
    led->fallthrough();
    CLI::Option* o_led_jacobi = led->add_option("--jacobi", led_jacobi, "Jacobi energy c < -3/2");
    CLI::Option* o_led_cap =
        led->add_option("--cap", led_cap, "Degree cap")->check(CLI::PositiveNumber);
    CLI::Option* o_led_kmax =
        led->add_option("--kmax", led_kmax, "Maximum family k")->check(CLI::PositiveNumber);

    // verify
    std::string ver_suite;
    std::uint64_t ver_seed = 12345;
    CLI::App* ver = app.add_subcommand("verify", "Run one named property suite");
    ver->fallthrough();
    CLI::Option* o_ver_suite =
        ver->add_option("--suite", ver_suite, "Property suite name")
            ->required()
            ->check(CLI::IsMember({"conservation", "poisson", "regularization",
                                   "index-agreement", "morse-bott", "ledger"}));
    CLI::Option* o_ver_seed = ver->add_option("--seed", ver_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (!config_path.empty()) {
            const njson j = load_config_file(config_path);
            cfg_override(j, "format", o_format, format);
            cfg_override(j, "out", o_out, out_path);
            cfg_override(j, "jacobi", o_cat_jacobi, cat_jacobi);
            cfg_override(j, "covers", o_cat_covers, cat_covers);
            cfg_override(j, "kmax", o_cat_kmax, cat_kmax);
            cfg_override(j, "jacobi", o_idx_jacobi, idx_jacobi);
            cfg_override(j, "orbit", o_idx_orbit, idx_orbit);
            cfg_override(j, "family", o_idx_family, idx_family);
            cfg_override(j, "cover", o_idx_cover, idx_cover);
            cfg_override(j, "numeric", o_idx_numeric, idx_numeric);
            cfg_override(j, "rtol", o_idx_rtol, idx_rtol);
            cfg_override(j, "atol", o_idx_atol, idx_atol);
            cfg_override(j, "energy", o_mod_energy, mod_energy);
            cfg_override(j, "level", o_mod_level, mod_level);
            cfg_override(j, "samples", o_mod_samples, mod_samples);
            cfg_override(j, "seed", o_mod_seed, mod_seed);
            cfg_override(j, "family", o_bif_family, bif_family);
            cfg_override(j, "jacobi", o_led_jacobi, led_jacobi);
            cfg_override(j, "cap", o_led_cap, led_cap);
            cfg_override(j, "kmax", o_led_kmax, led_kmax);
            cfg_override(j, "suite", o_ver_suite, ver_suite);
            cfg_override(j, "seed", o_ver_seed, ver_seed);
        }

        if (cat->parsed()) return cmd_catalog(cat_jacobi, cat_covers, cat_kmax, format, out_path);

        if (idx->parsed()) {
            const auto sel = parse_selector(idx_orbit, idx_family);
            if (!sel) {
                std::fprintf(stderr,
                             "kepler-cz: index needs exactly one of --orbit "
                             "(retrograde | direct | collision+ | collision- | family k,l) "
                             "or --family k,l\n");
                return 1;
            }
            if (idx_numeric && sel->kind == OrbitKind::Family) {
                std::fprintf(stderr,
                             "kepler-cz: --numeric applies to the four isolated orbits; "
                             "family indices are closed-form only\n");
                return 1;
            }
            return cmd_index(*sel, idx_jacobi, idx_cover, idx_numeric, idx_rtol, idx_atol,
                             format, out_path);
        }

        if (mod->parsed()) {
            std::optional<double> level;
            bool level_given = o_mod_level->count() > 0;
            if (!config_path.empty() && !level_given) {
                const njson j = load_config_file(config_path);
                level_given = j.contains("level");
            }
            if (level_given) level = mod_level;
            return cmd_moduli(mod_energy, level, mod_samples, mod_seed, format, out_path);
        }

        if (bif->parsed()) {
            int k = 0, l = 0;
            if (!parse_family_pair(bif_family, k, l)) {
                std::fprintf(stderr, "kepler-cz: --family expects 'k,l' with k, l >= 1\n");
                return 1;
            }
            return cmd_bifurcation(FamilyId(k, l), format, out_path);
        }

        if (led->parsed()) return cmd_ledger(led_jacobi, led_cap, led_kmax, format, out_path);

        if (ver->parsed()) return cmd_verify(ver_suite, ver_seed, format, out_path);

        std::fprintf(stderr, "kepler-cz: no command given\n");
        return 1;
    } catch (const njson::exception& e) {
        std::fprintf(stderr, "kepler-cz: config error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        print_domain_error(e);
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "kepler-cz: %s\n", e.what());
        return 1;
    }
}
