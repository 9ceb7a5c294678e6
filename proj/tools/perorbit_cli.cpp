// Command-line driver: runs periodic-orbit experiments described by a JSON
// config file and writes deterministic CSV/JSON outputs plus a run manifest.
//
// Subcommands: orbits, pressure, bowen, ldp, rate, oracle. Each takes
// --config PATH and a small set of targeted flag overrides. Exit codes:
//   0  success
//   2  invalid configuration (schema violation, unknown key, bad value);
//      no output files are created
//   3  enumeration budget exceeded
//   4  requested exact oracle unavailable for the configured system/potential
//   1  any other runtime failure

#include <CLI11.hpp>
#include <json.hpp>

#include <perorbit/perorbit.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace perorbit;
using systems::Potential;
using systems::SystemSpec;

static constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Config validation helpers (exit code 2 on any violation)
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

static void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

static void check_keys(const json& obj, const std::string& where,
                       const std::vector<std::string>& allowed) {
    require_object(obj, where);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed) ok = ok || (it.key() == k);
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

static double get_num(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + " is missing required key '" + key + "'");
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj[key].get<double>();
}

static double get_num_or(const json& obj, const std::string& key, const std::string& where,
                         double dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj[key].get<double>();
}

static std::size_t get_size(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + " is missing required key '" + key + "'");
    if (!obj[key].is_number_integer() && !obj[key].is_number_unsigned())
        throw ConfigError(where + "." + key + " must be a nonnegative integer");
    auto v = obj[key].get<long long>();
    if (v < 0) throw ConfigError(where + "." + key + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

static std::size_t get_size_or(const json& obj, const std::string& key, const std::string& where,
                               std::size_t dflt) {
    if (!obj.contains(key)) return dflt;
    return get_size(obj, key, where);
}

static unsigned long long get_ull_or(const json& obj, const std::string& key,
                                     const std::string& where, unsigned long long dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number_integer() && !obj[key].is_number_unsigned())
        throw ConfigError(where + "." + key + " must be a nonnegative integer");
    auto v = obj[key].get<long long>();
    if (v < 0) throw ConfigError(where + "." + key + " must be a nonnegative integer");
    return static_cast<unsigned long long>(v);
}

static std::string get_str(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + " is missing required key '" + key + "'");
    if (!obj[key].is_string()) throw ConfigError(where + "." + key + " must be a string");
    return obj[key].get<std::string>();
}

static std::string get_str_or(const json& obj, const std::string& key, const std::string& where,
                              const std::string& dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_string()) throw ConfigError(where + "." + key + " must be a string");
    return obj[key].get<std::string>();
}

static bool get_bool_or(const json& obj, const std::string& key, const std::string& where,
                        bool dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
    return obj[key].get<bool>();
}

static std::vector<double> get_num_list(const json& obj, const std::string& key,
                                        const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + " is missing required key '" + key + "'");
    if (!obj[key].is_array()) throw ConfigError(where + "." + key + " must be an array");
    std::vector<double> out;
    for (const auto& e : obj[key]) {
        if (!e.is_number())
            throw ConfigError(where + "." + key + " must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

static std::vector<unsigned long long> get_ull_list(const json& obj, const std::string& key,
                                                    const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + " is missing required key '" + key + "'");
    if (!obj[key].is_array()) throw ConfigError(where + "." + key + " must be an array");
    std::vector<unsigned long long> out;
    for (const auto& e : obj[key]) {
        if (!e.is_number_integer() && !e.is_number_unsigned())
            throw ConfigError(where + "." + key + " must contain only nonnegative integers");
        auto v = e.get<long long>();
        if (v < 0)
            throw ConfigError(where + "." + key + " must contain only nonnegative integers");
        out.push_back(static_cast<unsigned long long>(v));
    }
    return out;
}

static std::vector<std::size_t> get_size_list(const json& obj, const std::string& key,
                                              const std::string& where) {
    auto u = get_ull_list(obj, key, where);
    return std::vector<std::size_t>(u.begin(), u.end());
}

// ---------------------------------------------------------------------------
// System / potential / measure construction from config blocks
// ---------------------------------------------------------------------------

static SystemSpec build_system(const json& j) {
    require_object(j, "system");
    std::string kind = get_str(j, "kind", "system");
    if (kind == "doubling") {
        check_keys(j, "system", {"kind"});
        return SystemSpec::doubling();
    }
    if (kind == "tent") {
        check_keys(j, "system", {"kind", "slope"});
        return SystemSpec::tent(get_num(j, "slope", "system"));
    }
    if (kind == "manpo") {
        check_keys(j, "system", {"kind", "exponent"});
        return SystemSpec::manpo(get_num(j, "exponent", "system"));
    }
    if (kind == "golden_sft") {
        check_keys(j, "system", {"kind", "weights"});
        std::optional<std::vector<double>> w;
        if (j.contains("weights")) w = get_num_list(j, "weights", "system");
        return SystemSpec::golden_mean_sft(std::move(w));
    }
    if (kind == "sft") {
        check_keys(j, "system", {"kind", "transition", "weights"});
        if (!j.contains("transition") || !j["transition"].is_array())
            throw ConfigError("system.transition must be an array of 0/1 rows");
        std::size_t k = j["transition"].size();
        if (k == 0) throw ConfigError("system.transition must be nonempty");
        std::vector<uint8_t> entries;
        for (const auto& row : j["transition"]) {
            if (!row.is_array() || row.size() != k)
                throw ConfigError("system.transition must be a square 0/1 matrix");
            for (const auto& e : row) {
                if (!e.is_number_integer() && !e.is_number_unsigned())
                    throw ConfigError("system.transition entries must be 0 or 1");
                auto v = e.get<long long>();
                if (v != 0 && v != 1)
                    throw ConfigError("system.transition entries must be 0 or 1");
                entries.push_back(static_cast<uint8_t>(v));
            }
        }
        std::optional<std::vector<double>> w;
        if (j.contains("weights")) {
            w = get_num_list(j, "weights", "system");
            if (w->size() != k)
                throw ConfigError("system.weights must have one entry per symbol");
        }
        return SystemSpec::sft(Transition(k, entries), std::move(w));
    }
    throw ConfigError("system.kind must be one of doubling, tent, manpo, sft, golden_sft");
}

// Resolved (potential, label) pair; labels name the S_n columns in CSV output.
struct LabeledPotential {
    Potential phi;
    std::string label;
};

static LabeledPotential build_potential(const SystemSpec& sys, const json& j,
                                        const std::string& where,
                                        const std::string& default_label) {
    require_object(j, where);
    std::string kind = get_str(j, "kind", where);
    std::string label = get_str_or(j, "label", where, default_label);
    if (label.empty() || label.find(',') != std::string::npos ||
        label.find('"') != std::string::npos)
        throw ConfigError(where + ".label must be nonempty and contain no commas or quotes");
    if (kind == "const") {
        check_keys(j, where, {"kind", "value", "label"});
        return {Potential::constant(get_num_or(j, "value", where, 0.0)), label};
    }
    if (kind == "geom") {
        check_keys(j, where, {"kind", "t", "label"});
        return {Potential::geometric(get_num(j, "t", where)), label};
    }
    if (kind == "analytic") {
        check_keys(j, where, {"kind", "formula", "a", "b", "label"});
        return {Potential::analytic(get_str(j, "formula", where), get_num_or(j, "a", where, 1.0),
                                    get_num_or(j, "b", where, 0.0)),
                label};
    }
    if (kind == "cyl") {
        check_keys(j, where, {"kind", "depth", "table", "label"});
        std::size_t depth = get_size(j, "depth", where);
        if (depth == 0) throw ConfigError(where + ".depth must be >= 1");
        auto table = get_num_list(j, "table", where);
        const Transition& t = sys.transition();
        auto words = admissible_words(t, depth);
        if (sys.is_map()) {
            if (table.size() != words.size())
                throw ConfigError(where + ".table must have " + std::to_string(words.size()) +
                                  " entries for depth " + std::to_string(depth));
            return {Potential::cylinder(t.alphabet_size(), depth, table), label};
        }
        if (table.size() != words.size())
            throw ConfigError(where + ".table must have one entry per admissible depth-" +
                              std::to_string(depth) + " word (" + std::to_string(words.size()) +
                              ")");
        return {Potential::cylinder_on_admissible(t, depth, table), label};
    }
    throw ConfigError(where + ".kind must be one of const, cyl, geom, analytic");
}

// Writes fully-resolved potential fields back into the config echo.
static json resolve_potential_json(const json& j, const std::string& where,
                                   const std::string& default_label) {
    json out;
    std::string kind = get_str(j, "kind", where);
    out["kind"] = kind;
    if (kind == "const") out["value"] = get_num_or(j, "value", where, 0.0);
    if (kind == "geom") out["t"] = get_num(j, "t", where);
    if (kind == "analytic") {
        out["formula"] = get_str(j, "formula", where);
        out["a"] = get_num_or(j, "a", where, 1.0);
        out["b"] = get_num_or(j, "b", where, 0.0);
    }
    if (kind == "cyl") {
        out["depth"] = get_size(j, "depth", where);
        out["table"] = j["table"];
    }
    out["label"] = get_str_or(j, "label", where, default_label);
    return out;
}

static measures::ReferenceMeasure build_measure(const SystemSpec& sys, const json& j,
                                                const std::string& where) {
    require_object(j, where);
    std::string kind = get_str(j, "kind", where);
    if (kind == "lebesgue") {
        check_keys(j, where, {"kind"});
        return measures::ReferenceMeasure::lebesgue();
    }
    if (kind == "bernoulli") {
        check_keys(j, where, {"kind", "p"});
        return measures::ReferenceMeasure::bernoulli(get_num(j, "p", where));
    }
    if (kind == "gibbs") {
        check_keys(j, where, {"kind", "potential"});
        if (!j.contains("potential"))
            throw ConfigError(where + ".potential is required for a gibbs measure");
        auto lp = build_potential(sys, j["potential"], where + ".potential", "psi");
        return measures::ReferenceMeasure::gibbs(sys, lp.phi);
    }
    throw ConfigError(where + ".kind must be one of lebesgue, bernoulli, gibbs");
}

static json resolve_measure_json(const json& j, const std::string& where) {
    json out;
    std::string kind = get_str(j, "kind", where);
    out["kind"] = kind;
    if (kind == "bernoulli") out["p"] = get_num(j, "p", where);
    if (kind == "gibbs")
        out["potential"] = resolve_potential_json(j["potential"], where + ".potential", "psi");
    return out;
}

static json resolve_system_json(const json& j) {
    json out;
    std::string kind = get_str(j, "kind", "system");
    out["kind"] = kind;
    if (kind == "tent") out["slope"] = get_num(j, "slope", "system");
    if (kind == "manpo") out["exponent"] = get_num(j, "exponent", "system");
    if (kind == "sft") out["transition"] = j["transition"];
    if ((kind == "sft" || kind == "golden_sft") && j.contains("weights"))
        out["weights"] = j["weights"];
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic serialization: CSV cells and JSON with %.17g doubles
// ---------------------------------------------------------------------------

static std::string cell(double v) { return fmt17(v); }
static std::string cell(unsigned long long v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu", v);
    return buf;
}
static std::string cell(std::size_t v) { return cell(static_cast<unsigned long long>(v)); }

static void json_escape_into(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

// Custom dump keeping 17-significant-digit doubles; nonfinite values become
// the strings "inf"/"-inf"/"nan" so the output stays valid JSON.
static void dump17_into(std::string& out, const json& j, int indent) {
    const std::string pad(indent * 2, ' ');
    const std::string pad1((indent + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad1;
                json_escape_into(out, it.key());
                out += ": ";
                dump17_into(out, it.value(), indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad1;
                dump17_into(out, e, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::string:
            json_escape_into(out, j.get<std::string>());
            return;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case json::value_t::number_integer: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(j.get<int64_t>()));
            out += buf;
            return;
        }
        case json::value_t::number_unsigned: {
            out += cell(static_cast<unsigned long long>(j.get<uint64_t>()));
            return;
        }
        case json::value_t::number_float: {
            double v = j.get<double>();
            if (std::isnan(v)) {
                out += "\"nan\"";
            } else if (std::isinf(v)) {
                out += v > 0 ? "\"inf\"" : "\"-inf\"";
            } else {
                out += fmt17(v);
            }
            return;
        }
        default:
            out += "null";
            return;
    }
}

static std::string dump17(const json& j) {
    std::string out;
    dump17_into(out, j, 0);
    out += "\n";
    return out;
}

static json jnum(double v) { return json(v); }

// FNV-1a over the resolved config text: a stable parameter fingerprint.
static std::string config_hash(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

// ---------------------------------------------------------------------------
// Run context: compute everything in memory, write files only on success
// ---------------------------------------------------------------------------

struct RunOutput {
    json resolved;                                          // resolved_config.json
    json summary;                                           // summary.json
    std::vector<std::pair<std::string, std::string>> data;  // extra files (CSV)
};

struct CommonConfig {
    std::string task;
    SystemSpec sys;
    std::string output_dir;
    unsigned long long seed = 0;
    unsigned long long budget = orbits::kDefaultBudget;
};

static const std::vector<std::string> kCommonKeys = {"task",   "system", "output_dir",
                                                     "seed",   "budget"};

static std::vector<std::string> with_common(std::vector<std::string> extra) {
    for (const auto& k : kCommonKeys) extra.push_back(k);
    return extra;
}

static CommonConfig parse_common(const json& cfg, const std::string& task) {
    CommonConfig c{task, build_system(cfg.contains("system") ? cfg["system"] : json()),
                   get_str_or(cfg, "output_dir", "config", "perorbit_out"),
                   get_ull_or(cfg, "seed", "config", 0),
                   get_ull_or(cfg, "budget", "config", orbits::kDefaultBudget)};
    if (!cfg.contains("system")) throw ConfigError("config is missing required key 'system'");
    if (cfg.contains("task")) {
        std::string t = get_str(cfg, "task", "config");
        if (t != task)
            throw ConfigError("config.task is '" + t + "' but the subcommand is '" + task + "'");
    }
    if (c.budget == 0) throw ConfigError("config.budget must be >= 1");
    return c;
}

static void start_resolved(json& r, const CommonConfig& c, const json& cfg) {
    r["task"] = c.task;
    r["system"] = resolve_system_json(cfg["system"]);
}

static void finish_resolved(json& r, const CommonConfig& c) {
    r["output_dir"] = c.output_dir;
    r["seed"] = c.seed;
    r["budget"] = c.budget;
}

// ---------------------------------------------------------------------------
// Task: orbits
// ---------------------------------------------------------------------------

static RunOutput run_orbits(const json& cfg) {
    CommonConfig c = parse_common(cfg, "orbits");
    check_keys(cfg, "config",
               with_common({"potential", "potentials", "n", "alpha", "ell", "orbits_only"}));
    if (cfg.contains("potential") && cfg.contains("potentials"))
        throw ConfigError("config: give either 'potential' or 'potentials', not both");

    std::size_t n = get_size(cfg, "n", "config");
    if (n == 0) throw ConfigError("config.n must be >= 1");
    double alpha = get_num_or(cfg, "alpha", "config", 0.5);
    if (!(alpha > 0.0)) throw ConfigError("config.alpha must be positive");
    bool has_ell = cfg.contains("ell");
    unsigned long long ell = get_ull_or(cfg, "ell", "config", 0);
    if (has_ell && ell == 0) throw ConfigError("config.ell must be >= 1");
    bool orbits_only = get_bool_or(cfg, "orbits_only", "config", false);

    std::vector<LabeledPotential> pots;
    json pots_resolved = json::array();
    if (cfg.contains("potentials")) {
        if (!cfg["potentials"].is_array())
            throw ConfigError("config.potentials must be an array");
        std::size_t i = 0;
        for (const auto& pj : cfg["potentials"]) {
            std::string dflt = "phi" + std::to_string(i);
            pots.push_back(build_potential(c.sys, pj, "potentials[" + std::to_string(i) + "]",
                                           dflt));
            pots_resolved.push_back(
                resolve_potential_json(pj, "potentials[" + std::to_string(i) + "]", dflt));
            ++i;
        }
    } else {
        json pj = cfg.contains("potential") ? cfg["potential"]
                                            : json{{"kind", "const"}, {"value", 0.0}};
        pots.push_back(build_potential(c.sys, pj, "potential", "phi"));
        pots_resolved.push_back(resolve_potential_json(pj, "potential", "phi"));
    }
    for (std::size_t i = 0; i < pots.size(); ++i)
        for (std::size_t j = i + 1; j < pots.size(); ++j)
            if (pots[i].label == pots[j].label)
                throw ConfigError("duplicate potential label '" + pots[i].label + "'");

    RunOutput out;
    start_resolved(out.resolved, c, cfg);
    out.resolved["potentials"] = pots_resolved;
    out.resolved["n"] = n;
    out.resolved["alpha"] = alpha;
    if (has_ell)
        out.resolved["ell"] = ell;
    else
        out.resolved["ell"] = nullptr;
    out.resolved["orbits_only"] = orbits_only;
    finish_resolved(out.resolved, c);

    std::vector<Potential> plain;
    for (const auto& lp : pots) plain.push_back(lp.phi);

    std::string csv = "word,x,lyapunov,ell_min";
    for (const auto& lp : pots) csv += ",S_n_" + lp.label;
    csv += "\n";

    orbits::Certifier certifier;
    unsigned long long rows = 0, certified = 0;
    bool derivatives_available = true;
    orbits::visit_fixed(
        c.sys, n, plain,
        [&](const orbits::PeriodicPointRecord& rec) {
            std::string ell_min_cell = "na";
            if (derivatives_available && rec.log_deriv_per_step.empty())
                derivatives_available = false;
            if (derivatives_available) {
                auto cert = certifier.run(rec.log_deriv_per_step, alpha);
                if (cert.infinite()) {
                    if (has_ell) return true;
                    ell_min_cell = "inf";
                } else {
                    if (has_ell && cert.ell_min > ell) return true;
                    certified += 1;
                    ell_min_cell = cell(cert.ell_min);
                }
            } else if (has_ell) {
                throw DerivativeUnavailable(
                    "certified enumeration needs derivative data; the configured subshift "
                    "has no expansion weights");
            }
            rows += 1;
            csv += word_to_string(rec.word);
            csv += ',';
            csv += rec.x ? cell(*rec.x) : std::string();
            csv += ',';
            csv += cell(rec.lyapunov);
            csv += ',';
            csv += ell_min_cell;
            for (double s : rec.birkhoff) {
                csv += ',';
                csv += cell(s);
            }
            csv += '\n';
            return true;
        },
        c.budget, orbits_only);

    out.data.emplace_back("orbits.csv", csv);
    out.summary["task"] = "orbits";
    out.summary["system"] = c.sys.name();
    out.summary["n"] = n;
    out.summary["alpha"] = alpha;
    out.summary["ell"] = has_ell ? json(ell) : json(nullptr);
    out.summary["orbits_only"] = orbits_only;
    out.summary["candidate_words"] = orbits::candidate_count(c.sys, n, c.budget);
    out.summary["rows"] = rows;
    out.summary["certified_rows"] = derivatives_available ? json(certified) : json(nullptr);
    json ids = json::array();
    for (const auto& lp : pots) ids.push_back(lp.phi.id());
    out.summary["potential_ids"] = ids;
    return out;
}

// ---------------------------------------------------------------------------
// Task: pressure
// ---------------------------------------------------------------------------

static RunOutput run_pressure(const json& cfg) {
    CommonConfig c = parse_common(cfg, "pressure");
    check_keys(cfg, "config", with_common({"potential", "alpha", "ells", "n_max"}));

    json pj = cfg.contains("potential") ? cfg["potential"]
                                        : json{{"kind", "const"}, {"value", 0.0}};
    auto lp = build_potential(c.sys, pj, "potential", "phi");
    double alpha = get_num_or(cfg, "alpha", "config", 0.5);
    std::vector<unsigned long long> ells =
        cfg.contains("ells") ? get_ull_list(cfg, "ells", "config")
                             : std::vector<unsigned long long>{1, 4, 16};
    std::size_t n_max = get_size_or(cfg, "n_max", "config", 14);

    RunOutput out;
    start_resolved(out.resolved, c, cfg);
    out.resolved["potential"] = resolve_potential_json(pj, "potential", "phi");
    out.resolved["alpha"] = alpha;
    out.resolved["ells"] = ells;
    out.resolved["n_max"] = n_max;
    finish_resolved(out.resolved, c);

    auto rep = thermo::p_ep(c.sys, lp.phi, alpha, ells, n_max, c.budget);

    std::string csv = "n,ell,log_q,q,rate,fallback,count\n";
    for (const auto& r : rep.rows) {
        csv += cell(r.n);
        csv += ',';
        csv += cell(r.ell);
        csv += ',';
        csv += cell(r.log_q);
        csv += ',';
        csv += cell(r.q);
        csv += ',';
        csv += cell(r.rate);
        csv += ',';
        csv += r.fallback ? "1" : "0";
        csv += ',';
        csv += cell(r.count);
        csv += '\n';
    }
    out.data.emplace_back("pressure.csv", csv);

    out.summary["task"] = "pressure";
    out.summary["system"] = c.sys.name();
    out.summary["potential_id"] = lp.phi.id();
    out.summary["alpha"] = alpha;
    out.summary["n_max"] = n_max;
    out.summary["ells"] = rep.ells;
    out.summary["p_ep_per_ell"] = rep.p_ep_per_ell;
    out.summary["p_ep_limit"] = jnum(rep.p_ep_limit);
    out.summary["per_ell_monotone"] = rep.per_ell_monotone;
    out.summary["monotonicity_violations"] = rep.diagnostics.monotonicity_violations;
    out.summary["tail_length"] = rep.diagnostics.tail_length;
    out.summary["tail_slope"] = jnum(rep.diagnostics.tail_slope);
    json oracle_block;
    try {
        double p = oracle::oracle_pressure(c.sys, lp.phi);
        oracle_block["available"] = true;
        oracle_block["pressure"] = jnum(p);
        oracle_block["gap"] = jnum(rep.p_ep_limit - p);
    } catch (const OracleUnavailable&) {
        oracle_block["available"] = false;
    }
    out.summary["oracle"] = oracle_block;
    return out;
}

// ---------------------------------------------------------------------------
// Task: bowen
// ---------------------------------------------------------------------------

static RunOutput run_bowen(const json& cfg) {
    CommonConfig c = parse_common(cfg, "bowen");
    check_keys(cfg, "config",
               with_common({"potential", "alpha", "ell_schedule", "n_schedule", "reference",
                            "family_depth"}));

    json pj = cfg.contains("potential") ? cfg["potential"]
                                        : json{{"kind", "const"}, {"value", 0.0}};
    auto lp = build_potential(c.sys, pj, "potential", "phi");
    double alpha = get_num_or(cfg, "alpha", "config", 0.5);
    std::vector<unsigned long long> ell_schedule =
        cfg.contains("ell_schedule") ? get_ull_list(cfg, "ell_schedule", "config")
                                     : std::vector<unsigned long long>{1};
    std::vector<std::size_t> n_schedule =
        cfg.contains("n_schedule") ? get_size_list(cfg, "n_schedule", "config")
                                   : std::vector<std::size_t>{6, 9, 12};
    json rj = cfg.contains("reference") ? cfg["reference"] : json{{"kind", "lebesgue"}};
    auto reference = build_measure(c.sys, rj, "reference");
    std::size_t family_depth = get_size_or(cfg, "family_depth", "config", 4);
    if (family_depth == 0) throw ConfigError("config.family_depth must be >= 1");

    RunOutput out;
    start_resolved(out.resolved, c, cfg);
    out.resolved["potential"] = resolve_potential_json(pj, "potential", "phi");
    out.resolved["alpha"] = alpha;
    out.resolved["ell_schedule"] = ell_schedule;
    out.resolved["n_schedule"] = n_schedule;
    out.resolved["reference"] = resolve_measure_json(rj, "reference");
    out.resolved["family_depth"] = family_depth;
    finish_resolved(out.resolved, c);

    auto family = measures::TestFunctionFamily::standard(c.sys, family_depth);
    auto rep = measures::bowen_convergence_report(c.sys, lp.phi, alpha, ell_schedule, n_schedule,
                                                  reference, family, c.budget);

    std::string csv = "n,ell,empty,log_normalizer,distance";
    for (std::size_t i = 0; i < rep.family_labels.size(); ++i)
        csv += ",int_" + std::to_string(i);
    csv += "\n";
    for (const auto& r : rep.rows) {
        csv += cell(r.n);
        csv += ',';
        csv += cell(r.ell);
        csv += ',';
        csv += r.empty ? "1" : "0";
        csv += ',';
        csv += r.empty ? std::string() : cell(r.log_normalizer);
        csv += ',';
        csv += r.empty ? std::string() : cell(r.distance);
        for (std::size_t i = 0; i < rep.family_labels.size(); ++i) {
            csv += ',';
            if (!r.empty && i < r.integrals.size()) csv += cell(r.integrals[i]);
        }
        csv += '\n';
    }
    out.data.emplace_back("bowen.csv", csv);

    out.summary["task"] = "bowen";
    out.summary["system"] = c.sys.name();
    out.summary["potential_id"] = lp.phi.id();
    out.summary["alpha"] = alpha;
    out.summary["reference"] = resolve_measure_json(rj, "reference");
    out.summary["family_labels"] = rep.family_labels;
    out.summary["reference_integrals"] = rep.reference_integrals;
    out.summary["truncation_bound"] = jnum(rep.truncation_bound);
    out.summary["diagonal_decreasing"] = rep.diagonal_decreasing;
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json row;
        row["n"] = r.n;
        row["ell"] = r.ell;
        row["empty"] = r.empty;
        if (!r.empty) row["distance"] = jnum(r.distance);
        rows.push_back(row);
    }
    out.summary["rows"] = rows;
    return out;
}

// ---------------------------------------------------------------------------
// Task: ldp (deviation counts over n with the variational upper bound)
// ---------------------------------------------------------------------------

static RunOutput run_ldp(const json& cfg) {
    CommonConfig c = parse_common(cfg, "ldp");
    check_keys(cfg, "config",
               with_common({"potential", "v", "delta", "alpha", "ell", "n_min", "n_max", "depth",
                            "box"}));

    json pj = cfg.contains("potential") ? cfg["potential"]
                                        : json{{"kind", "const"}, {"value", 0.0}};
    auto lp = build_potential(c.sys, pj, "potential", "phi");
    double v = get_num(cfg, "v", "config");
    double delta = get_num(cfg, "delta", "config");
    if (!(delta >= 0.0)) throw ConfigError("config.delta must be nonnegative");
    double alpha = get_num_or(cfg, "alpha", "config", 0.5);
    if (!(alpha > 0.0)) throw ConfigError("config.alpha must be positive");
    unsigned long long ell = get_ull_or(cfg, "ell", "config", 1);
    if (ell == 0) throw ConfigError("config.ell must be >= 1");
    std::size_t n_min = get_size_or(cfg, "n_min", "config", 8);
    std::size_t n_max = get_size_or(cfg, "n_max", "config", 14);
    if (n_min == 0) throw ConfigError("config.n_min must be >= 1");
    if (n_max < n_min) throw ConfigError("config.n_max must be >= n_min");
    std::size_t depth = get_size_or(cfg, "depth", "config", 1);
    double box = get_num_or(cfg, "box", "config", 24.0);

    RunOutput out;
    start_resolved(out.resolved, c, cfg);
    out.resolved["potential"] = resolve_potential_json(pj, "potential", "phi");
    out.resolved["v"] = v;
    out.resolved["delta"] = delta;
    out.resolved["alpha"] = alpha;
    out.resolved["ell"] = ell;
    out.resolved["n_min"] = n_min;
    out.resolved["n_max"] = n_max;
    out.resolved["depth"] = depth;
    out.resolved["box"] = box;
    finish_resolved(out.resolved, c);

    deviations::DualSearchSpace space{depth, box};
    auto bound = deviations::ld_bound_detail(c.sys, lp.phi, v, delta, space);
    double bound_cell = bound.value;

    std::string csv = "n,count,efix_card,rate,bound\n";
    json rows = json::array();
    for (std::size_t n = n_min; n <= n_max; ++n) {
        auto lc = deviations::ld_count(c.sys, lp.phi, v, delta, alpha, ell, n, c.budget);
        csv += cell(n);
        csv += ',';
        csv += cell(lc.count);
        csv += ',';
        csv += cell(lc.efix_card);
        csv += ',';
        csv += cell(lc.rate);
        csv += ',';
        csv += cell(bound_cell);
        csv += '\n';
        json row;
        row["n"] = n;
        row["count"] = lc.count;
        row["efix_card"] = lc.efix_card;
        row["rate"] = jnum(lc.rate);
        rows.push_back(row);
    }
    out.data.emplace_back("ldp.csv", csv);

    out.summary["task"] = "ldp";
    out.summary["system"] = c.sys.name();
    out.summary["potential_id"] = lp.phi.id();
    out.summary["v"] = v;
    out.summary["delta"] = delta;
    out.summary["alpha"] = alpha;
    out.summary["ell"] = ell;
    out.summary["rows"] = rows;
    json b;
    b["value"] = jnum(bound.value);
    b["lo_side"] = jnum(bound.lo_side);
    b["hi_side"] = jnum(bound.hi_side);
    b["minus_infinity"] = bound.minus_infinity;
    b["m0"] = jnum(bound.m0);
    b["h_top"] = jnum(bound.h_top);
    b["achievable_min"] = jnum(bound.achievable_min);
    b["achievable_max"] = jnum(bound.achievable_max);
    out.summary["bound"] = b;
    return out;
}

// ---------------------------------------------------------------------------
// Task: rate (dual lower bound on the rate function / generalized entropy)
// ---------------------------------------------------------------------------

static json rate_report_json(const deviations::RateReport& rep) {
    json r;
    r["i_lower"] = jnum(rep.i_lower);
    r["p_phi"] = jnum(rep.p_phi);
    if (!std::isnan(rep.hhat)) r["hhat"] = jnum(rep.hhat);
    r["depth"] = rep.depth;
    r["box"] = jnum(rep.box);
    r["converged"] = rep.converged;
    r["iterations"] = rep.iterations;
    r["grad_norm"] = jnum(rep.grad_norm);
    json words = json::array();
    for (const auto& w : rep.words) words.push_back(word_to_string(w));
    r["words"] = words;
    r["psi_star"] = rep.psi_star;
    return r;
}

static RunOutput run_rate(const json& cfg) {
    CommonConfig c = parse_common(cfg, "rate");
    check_keys(cfg, "config",
               with_common({"potential", "measure", "depth", "box", "max_iters", "entropy"}));

    if (!cfg.contains("measure")) throw ConfigError("config is missing required key 'measure'");
    auto mu = build_measure(c.sys, cfg["measure"], "measure");
    bool entropy = get_bool_or(cfg, "entropy", "config", false);
    if (entropy && cfg.contains("potential"))
        throw ConfigError("config.entropy computes the zero-potential functional; "
                          "remove 'potential'");
    json pj = cfg.contains("potential") ? cfg["potential"]
                                        : json{{"kind", "const"}, {"value", 0.0}};
    auto lp = build_potential(c.sys, pj, "potential", "phi");
    std::size_t depth = get_size_or(cfg, "depth", "config", 1);
    double box = get_num_or(cfg, "box", "config", 24.0);
    std::size_t max_iters = get_size_or(cfg, "max_iters", "config", 20000);

    RunOutput out;
    start_resolved(out.resolved, c, cfg);
    out.resolved["potential"] = resolve_potential_json(pj, "potential", "phi");
    out.resolved["measure"] = resolve_measure_json(cfg["measure"], "measure");
    out.resolved["depth"] = depth;
    out.resolved["box"] = box;
    out.resolved["max_iters"] = max_iters;
    out.resolved["entropy"] = entropy;
    finish_resolved(out.resolved, c);

    deviations::DualSearchSpace space{depth, box};
    deviations::RateReport rep =
        entropy ? deviations::generalized_entropy(c.sys, mu, space, max_iters)
                : deviations::rate_function(c.sys, lp.phi, mu, space, max_iters);

    out.summary["task"] = "rate";
    out.summary["system"] = c.sys.name();
    out.summary["potential_id"] = lp.phi.id();
    out.summary["entropy"] = entropy;
    out.summary["report"] = rate_report_json(rep);
    return out;
}

// ---------------------------------------------------------------------------
// Task: oracle (exact reference computations with method metadata)
// ---------------------------------------------------------------------------

static RunOutput run_oracle(const json& cfg) {
    CommonConfig c = parse_common(cfg, "oracle");
    check_keys(cfg, "config",
               with_common({"operation", "potential", "observable", "depth", "n", "eps",
                            "grid_log2", "c", "v", "delta", "bins"}));
    std::string op = get_str(cfg, "operation", "config");

    auto potential_block = [&](const char* key) -> json {
        return cfg.contains(key) ? cfg[key] : json{{"kind", "const"}, {"value", 0.0}};
    };

    RunOutput out;
    start_resolved(out.resolved, c, cfg);
    out.resolved["operation"] = op;
    json result;
    result["operation"] = op;

    if (op == "pressure" || op == "gibbs" || op == "ulam" || op == "separated") {
        json pj = potential_block("potential");
        auto lp = build_potential(c.sys, pj, "potential", "phi");
        out.resolved["potential"] = resolve_potential_json(pj, "potential", "phi");
        if (op == "pressure") {
            finish_resolved(out.resolved, c);
            result["method"] = "transfer-matrix";
            result["exact"] = true;
            result["value"] = jnum(oracle::oracle_pressure(c.sys, lp.phi));
        } else if (op == "gibbs") {
            std::size_t depth = get_size_or(cfg, "depth", "config", 2);
            if (depth == 0) throw ConfigError("config.depth must be >= 1");
            out.resolved["depth"] = depth;
            finish_resolved(out.resolved, c);
            auto g = oracle::oracle_gibbs(c.sys, lp.phi);
            result["method"] = "transfer-matrix";
            result["pressure"] = jnum(g.pressure);
            result["entropy"] = jnum(g.entropy);
            result["log_lambda"] = jnum(g.log_lambda);
            json words = json::array(), masses = json::array();
            for (const auto& w : admissible_words(c.sys.transition(), depth)) {
                words.push_back(word_to_string(w));
                masses.push_back(jnum(g.cylinder_mass(w)));
            }
            result["depth"] = depth;
            result["cylinder_words"] = words;
            result["cylinder_masses"] = masses;
            json marg = json::array();
            for (std::size_t s = 0; s < c.sys.transition().alphabet_size(); ++s)
                marg.push_back(jnum(g.symbol_marginal(s)));
            result["symbol_marginals"] = marg;
        } else if (op == "ulam") {
            std::size_t bins = get_size_or(cfg, "bins", "config", 4096);
            out.resolved["bins"] = bins;
            finish_resolved(out.resolved, c);
            auto u = oracle::ulam_pressure(c.sys, lp.phi, bins);
            result["method"] = "ulam-discretization";
            result["exact"] = false;
            result["value"] = jnum(u.pressure);
            result["bins"] = u.bins;
            result["iterations"] = u.iterations;
            result["residual"] = jnum(u.residual);
            result["first_order_method"] = u.first_order_method;
        } else {  // separated
            std::size_t n = get_size_or(cfg, "n", "config", 10);
            if (n < 2) throw ConfigError("config.n must be >= 2 for separated sets");
            double eps = get_num_or(cfg, "eps", "config", 0.01);
            if (!(eps > 0.0)) throw ConfigError("config.eps must be positive");
            std::size_t grid_log2 = get_size_or(cfg, "grid_log2", "config", 20);
            out.resolved["n"] = n;
            out.resolved["eps"] = eps;
            out.resolved["grid_log2"] = grid_log2;
            finish_resolved(out.resolved, c);
            auto s = oracle::separated_set_detail(c.sys, lp.phi, n, eps, grid_log2);
            result["method"] = "greedy-separated-grid";
            result["exact"] = false;
            result["value"] = jnum(s.pressure);
            result["literal_rate"] = jnum(s.literal_rate);
            result["log_z_n"] = jnum(s.log_z_n);
            result["log_z_prev"] = jnum(s.log_z_prev);
            result["card_n"] = s.card_n;
            result["card_prev"] = s.card_prev;
            result["grid_log2_used"] = s.grid_log2_used;
        }
    } else if (op == "h_top") {
        finish_resolved(out.resolved, c);
        result["method"] = "transfer-matrix";
        result["exact"] = true;
        result["value"] = jnum(oracle::oracle_h_top(c.sys));
    } else if (op == "legendre" || op == "range") {
        if (!cfg.contains("observable"))
            throw ConfigError("config is missing required key 'observable'");
        json gj = cfg["observable"];
        auto g = build_potential(c.sys, gj, "observable", "g");
        out.resolved["observable"] = resolve_potential_json(gj, "observable", "g");
        if (op == "range") {
            finish_resolved(out.resolved, c);
            auto r = oracle::achievable_mean_range(c.sys.transition(), g.phi);
            result["method"] = "karp-cycle-mean";
            result["achievable_min"] = jnum(r.first);
            result["achievable_max"] = jnum(r.second);
        } else {
            json pj = potential_block("potential");
            auto lp = build_potential(c.sys, pj, "potential", "phi");
            out.resolved["potential"] = resolve_potential_json(pj, "potential", "phi");
            double target = get_num(cfg, "c", "config");
            out.resolved["c"] = target;
            finish_resolved(out.resolved, c);
            result["method"] = "legendre-dual-bisection";
            result["c"] = target;
            try {
                auto r = oracle::legendre_rate(c.sys.transition(), lp.phi, g.phi, target);
                result["achievable"] = true;
                result["value"] = jnum(r.value);
                result["t_star"] = jnum(r.t_star);
                result["achievable_min"] = jnum(r.achievable_min);
                result["achievable_max"] = jnum(r.achievable_max);
                result["boundary_capped"] = r.boundary_capped;
            } catch (const TargetUnachievable&) {
                result["achievable"] = false;
            }
        }
    } else if (op == "counts") {
        std::size_t n = get_size(cfg, "n", "config");
        if (n == 0) throw ConfigError("config.n must be >= 1");
        double v = get_num(cfg, "v", "config");
        double delta = get_num(cfg, "delta", "config");
        if (!(delta >= 0.0)) throw ConfigError("config.delta must be nonnegative");
        out.resolved["n"] = n;
        out.resolved["v"] = v;
        out.resolved["delta"] = delta;
        finish_resolved(out.resolved, c);
        result["method"] = "binomial-closed-form";
        result["exact"] = true;
        result["binomial_count"] = oracle::binomial_deviation_count(n, v, delta);
        result["doubling_count"] = oracle::doubling_deviation_count(n, v, delta);
    } else {
        throw ConfigError("config.operation must be one of pressure, h_top, gibbs, separated, "
                          "legendre, range, counts, ulam");
    }

    out.summary["task"] = "oracle";
    out.summary["system"] = c.sys.name();
    out.summary["result"] = result;
    return out;
}

// ---------------------------------------------------------------------------
// Output writing and the shared command driver
// ---------------------------------------------------------------------------

static int thread_cap_from_env() {
    const char* s = std::getenv("PERORBIT_THREADS");
    if (!s) return 1;
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 1) return 1;
    return static_cast<int>(v);
}

static void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + p.string());
    f << content;
    if (!f) throw std::runtime_error("write failed: " + p.string());
}

struct Overrides {
    std::optional<std::string> output_dir;
    std::optional<double> alpha, delta, v, eps, box, c_target;
    std::optional<long long> n, n_max, n_min, ell, depth, bins, seed, budget;
    std::optional<std::string> ells;  // comma-separated
    std::optional<std::string> operation;
};

static void apply_overrides(json& cfg, const Overrides& o, const std::string& task) {
    if (o.output_dir) cfg["output_dir"] = *o.output_dir;
    if (o.seed) cfg["seed"] = *o.seed;
    if (o.budget) cfg["budget"] = *o.budget;
    if (o.alpha) cfg["alpha"] = *o.alpha;
    if (o.delta) cfg["delta"] = *o.delta;
    if (o.v) cfg["v"] = *o.v;
    if (o.eps) cfg["eps"] = *o.eps;
    if (o.box) cfg["box"] = *o.box;
    if (o.c_target) cfg["c"] = *o.c_target;
    if (o.n) cfg["n"] = *o.n;
    if (o.n_min) cfg["n_min"] = *o.n_min;
    if (o.ell) cfg["ell"] = *o.ell;
    if (o.depth) cfg["depth"] = *o.depth;
    if (o.bins) cfg["bins"] = *o.bins;
    if (o.operation) cfg["operation"] = *o.operation;
    if (o.n_max) {
        // pressure and ldp share the flag; bowen has no single-n parameter
        cfg["n_max"] = *o.n_max;
    }
    if (o.ells) {
        json arr = json::array();
        std::string s = *o.ells;
        std::size_t pos = 0;
        while (pos < s.size()) {
            std::size_t comma = s.find(',', pos);
            std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
            if (tok.empty()) throw ConfigError("--ells must be a comma-separated integer list");
            char* end = nullptr;
            long long val = std::strtoll(tok.c_str(), &end, 10);
            if (end == tok.c_str() || *end != '\0' || val < 1)
                throw ConfigError("--ells must be a comma-separated list of integers >= 1");
            arr.push_back(val);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (arr.empty()) throw ConfigError("--ells must be a comma-separated integer list");
        if (task == "bowen")
            cfg["ell_schedule"] = arr;
        else
            cfg["ells"] = arr;
    }
}

static int run_task(const std::string& task, const std::string& config_path,
                    const Overrides& overrides) {
    try {
        json cfg;
        {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read config file: " + config_path);
            try {
                cfg = json::parse(f);
            } catch (const std::exception& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
        }
        require_object(cfg, "config");
        apply_overrides(cfg, overrides, task);

        auto t0 = std::chrono::steady_clock::now();
        RunOutput out;
        if (task == "orbits")
            out = run_orbits(cfg);
        else if (task == "pressure")
            out = run_pressure(cfg);
        else if (task == "bowen")
            out = run_bowen(cfg);
        else if (task == "ldp")
            out = run_ldp(cfg);
        else if (task == "rate")
            out = run_rate(cfg);
        else
            out = run_oracle(cfg);
        auto t1 = std::chrono::steady_clock::now();
        double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        std::string resolved_text = dump17(out.resolved);
        std::string out_dir = out.resolved["output_dir"].get<std::string>();

        json manifest;
        manifest["tool"] = "perorbit";
        manifest["version"] = kToolVersion;
        manifest["task"] = task;
        manifest["config_hash"] = config_hash(resolved_text);
        manifest["wall_ms"] = jnum(wall_ms);
        manifest["thread_cap"] = thread_cap_from_env();
        manifest["threads_used"] = 1;
        json files = json::array();
        files.push_back("resolved_config.json");
        for (const auto& d : out.data) files.push_back(d.first);
        files.push_back("summary.json");
        manifest["outputs"] = files;

        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "resolved_config.json", resolved_text);
        for (const auto& d : out.data) write_file(fs::path(out_dir) / d.first, d.second);
        write_file(fs::path(out_dir) / "summary.json", dump17(out.summary));
        write_file(fs::path(out_dir) / "manifest.json", dump17(manifest));
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const InvalidSpec& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const BudgetExceeded& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const OracleUnavailable& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int main(int argc, char** argv) {
    CLI::App app{"periodic-orbit experiments: certified enumeration, pressure, Bowen measures, "
                 "large deviations, and exact oracles"};
    app.require_subcommand(1);

    struct SubState {
        std::string config_path;
        Overrides ov;
    };
    std::vector<std::pair<std::string, std::shared_ptr<SubState>>> subs;

    auto add_sub = [&](const std::string& name, const std::string& desc) {
        auto st = std::make_shared<SubState>();
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--config", st->config_path, "path to the experiment config JSON")
            ->required();
        s->add_option("--output-dir", st->ov.output_dir, "override config.output_dir");
        s->add_option("--seed", st->ov.seed, "override config.seed");
        s->add_option("--budget", st->ov.budget, "override config.budget");
        s->add_option("--alpha", st->ov.alpha, "override config.alpha");
        s->add_option("--n", st->ov.n, "override config.n");
        s->add_option("--nmax", st->ov.n_max, "override config.n_max");
        s->add_option("--nmin", st->ov.n_min, "override config.n_min");
        s->add_option("--ell", st->ov.ell, "override config.ell");
        s->add_option("--ells", st->ov.ells, "override the ell list (comma-separated)");
        s->add_option("--delta", st->ov.delta, "override config.delta");
        s->add_option("--v", st->ov.v, "override config.v");
        s->add_option("--depth", st->ov.depth, "override config.depth");
        s->add_option("--box", st->ov.box, "override config.box");
        s->add_option("--bins", st->ov.bins, "override config.bins");
        s->add_option("--eps", st->ov.eps, "override config.eps");
        s->add_option("--c", st->ov.c_target, "override config.c");
        s->add_option("--operation", st->ov.operation, "override config.operation");
        subs.emplace_back(name, st);
        return s;
    };

    add_sub("orbits", "enumerate period-n points with expansion certificates");
    add_sub("pressure", "periodic-orbit pressure estimates over an ell ladder");
    add_sub("bowen", "weak-star convergence of orbit averages to a reference measure");
    add_sub("ldp", "certified deviation counts against the variational upper bound");
    add_sub("rate", "dual lower bound on the rate function / generalized entropy");
    add_sub("oracle", "exact reference computations (transfer matrix, Legendre, Ulam)");

    CLI11_PARSE(app, argc, argv);

    for (const auto& [name, st] : subs)
        if (app.got_subcommand(name)) return run_task(name, st->config_path, st->ov);
    return 1;
}
