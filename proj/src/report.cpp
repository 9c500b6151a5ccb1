#include "vcrisk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "vcrisk/csv.hpp"
#include "vcrisk/error.hpp"
#include "vcrisk/hashing.hpp"
#include "vcrisk/sigma_io.hpp"

namespace vcrisk::report {

namespace {

constexpr std::uint64_t kMaxPortfolioSize = 100000;

[[noreturn]] void fail(const std::string& message) { throw Error(Errc::ParseError, message); }

void check_size(std::uint64_t n, std::string_view where) {
    if (n < 1 || n > kMaxPortfolioSize) {
        throw Error(Errc::OutOfRange, std::string(where) + " must be between 1 and " +
                                          std::to_string(kMaxPortfolioSize));
    }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
    if (!j.is_object()) fail(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

double number(const json& j, std::string_view key, std::string_view where) {
    const json& v = j.at(std::string(key));
    if (!v.is_number()) fail(std::string(where) + "." + std::string(key) + " must be a number");
    return v.get<double>();
}

std::uint64_t count(const json& j, std::string_view key, std::string_view where) {
    const json& v = j.at(std::string(key));
    // Built documents hold signed integers, parsed ones unsigned.
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(std::string(where) + "." + std::string(key) + " must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string text(const json& j, std::string_view key, std::string_view where) {
    const json& v = j.at(std::string(key));
    if (!v.is_string()) fail(std::string(where) + "." + std::string(key) + " must be a string");
    return v.get<std::string>();
}

Mix mix_from_json(const json& j, std::string_view where) {
    if (!j.is_object()) fail(std::string(where) + " must map labels to fractions");
    Mix mix;
    for (const auto& [label, f] : j.items()) {
        if (!f.is_number()) fail(std::string(where) + "." + label + " must be a number");
        mix[label] = f.get<double>();
    }
    return mix;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Wraps nlohmann's type/out_of_range errors (missing keys etc.) as ParseError.
template <typename F>
auto guarded(std::string_view what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        fail(std::string(what) + ": " + e.what());
    }
}

std::vector<std::string> mode_names(const std::vector<ModelMode>& modes) {
    std::vector<std::string> out;
    for (const auto m : modes) out.emplace_back(to_string(m));
    return out;
}

json with_header(std::string_view kind, const RunManifest& manifest) {
    return json{{"schema_version", kSchemaVersion},
                {"report", kind},
                {"manifest", to_json(manifest)}};
}

std::size_t display_width(std::string_view s) {
    std::size_t w = 0;
    for (const unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++w;
    }
    return w;
}

std::string pad_left(std::string_view s, std::size_t width) {
    const std::size_t w = display_width(s);
    return std::string(width > w ? width - w : 0, ' ') + std::string(s);
}

std::string pad_right(std::string_view s, std::size_t width) {
    const std::size_t w = display_width(s);
    return std::string(s) + std::string(width > w ? width - w : 0, ' ');
}

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

// --- domain <-> JSON ---------------------------------------------------------

json to_json(const Composition& c) {
    return json{{"size", c.size},
                {"founder_mix", c.founder_mix},
                {"sector_mix", c.sector_mix},
                {"geography_mix", c.geography_mix}};
}

Composition composition_from_json(const json& j) {
    return guarded("composition", [&] {
        check_keys(j, {"size", "founder_mix", "sector_mix", "geography_mix"}, "composition");
        Composition c;
        c.size = count(j, "size", "composition");
        check_size(c.size, "composition.size");
        c.founder_mix = mix_from_json(j.at("founder_mix"), "composition.founder_mix");
        c.sector_mix = mix_from_json(j.at("sector_mix"), "composition.sector_mix");
        c.geography_mix = mix_from_json(j.at("geography_mix"), "composition.geography_mix");
        c.validate();
        return c;
    });
}

json to_json(const AssignmentRules& r) {
    json bands = json::object();
    for (const auto& [label, b] : r.bands) {
        bands[label] = {{"lo", b.lo}, {"hi", b.hi}, {"alpha", b.alpha}, {"beta", b.beta}};
    }
    return json{{"bands", bands},
                {"nudge", r.nudge},
                {"nudge_geographies", r.nudge_geographies},
                {"nudge_sectors", r.nudge_sectors},
                {"stack_nudges", r.stack_nudges}};
}

AssignmentRules rules_from_json(const json& j) {
    return guarded("rules", [&] {
        check_keys(j, {"bands", "nudge", "nudge_geographies", "nudge_sectors", "stack_nudges"},
                   "rules");
        AssignmentRules r = AssignmentRules::defaults();
        if (j.contains("bands")) {
            r.bands.clear();
            for (const auto& [label, b] : j.at("bands").items()) {
                const std::string where = "rules.bands." + label;
                check_keys(b, {"lo", "hi", "alpha", "beta"}, where);
                r.bands[label] = {number(b, "lo", where), number(b, "hi", where),
                                  b.contains("alpha") ? number(b, "alpha", where) : 1.0,
                                  b.contains("beta") ? number(b, "beta", where) : 1.0};
            }
        }
        if (j.contains("nudge")) r.nudge = number(j, "nudge", "rules");
        if (j.contains("nudge_geographies")) {
            r.nudge_geographies = j.at("nudge_geographies").get<std::set<std::string>>();
        }
        if (j.contains("nudge_sectors")) {
            r.nudge_sectors = j.at("nudge_sectors").get<std::set<std::string>>();
        }
        if (j.contains("stack_nudges")) r.stack_nudges = j.at("stack_nudges").get<bool>();
        r.validate();
        return r;
    });
}

json to_json(const KindWeights& w) {
    return json{{"sector", w.sector}, {"geography", w.geography}, {"founder", w.founder}};
}

json to_json(const Affiliation& a) {
    return json{{"sector", a.sector}, {"geography", a.geography}, {"founder", a.founder}};
}

Affiliation affiliation_from_json(const json& j) {
    return guarded("affiliation", [&] {
        return Affiliation{text(j, "sector", "affiliation"), text(j, "geography", "affiliation"),
                           text(j, "founder", "affiliation")};
    });
}

json to_json(const Deal& d) {
    json j = to_json(d.affiliation);
    j["id"] = d.id;
    j["p"] = d.p;
    return j;
}

Deal deal_from_json(const json& j) {
    return guarded("deal", [&] {
        check_keys(j, {"id", "p", "sector", "geography", "founder"}, "deal");
        const std::string id = j.contains("id") ? text(j, "id", "deal") : std::string();
        return Deal{id, number(j, "p", "deal"), affiliation_from_json(j)};
    });
}

json to_json(const OutcomeDistribution& d) {
    return json{{"counts", d.counts},
                {"M", d.iterations},
                {"N", d.portfolio_size},
                {"deal_successes", d.deal_successes}};
}

json to_json(const PortfolioStats& s) {
    return json{{"expected_u", s.expected_u},
                {"p_u_eq_0", s.p_u_eq_0},
                {"p_u_le_1", s.p_u_le_1},
                {"p_u_le_2", s.p_u_le_2},
                {"e_u_given_ge_1", optional_number(s.e_u_given_ge_1)},
                {"e_u_given_ge_2", optional_number(s.e_u_given_ge_2)},
                {"e_u_given_ge_3", optional_number(s.e_u_given_ge_3)}};
}

json to_json(const StatErrors& e) {
    return json{{"expected_u", e.expected_u},
                {"p_u_eq_0", e.p_u_eq_0},
                {"p_u_le_1", e.p_u_le_1},
                {"p_u_le_2", e.p_u_le_2}};
}

json to_json(const ModeResult& r) {
    return json{{"mode", to_string(r.mode)},
                {"w0", r.calibration.w0},
                {"rho_bar_prime", r.calibration.rho_bar_prime},
                {"distribution", to_json(r.distribution)},
                {"stats", to_json(r.stats)},
                {"std_errors", to_json(r.errors)}};
}

RunSettings settings_from_json(const json& j, const RunSettings& defaults) {
    return guarded("settings", [&] {
        RunSettings s = defaults;
        if (j.contains("seed")) s.seed = count(j, "seed", "settings");
        if (j.contains("iterations")) {
            s.iterations = count(j, "iterations", "settings");
            if (s.iterations < 1) {
                throw Error(Errc::InvalidConfig, "iterations must be at least 1");
            }
        }
        if (j.contains("kind_weights")) {
            const json& w = j.at("kind_weights");
            check_keys(w, {"sector", "geography", "founder"}, "kind_weights");
            s.weights = {number(w, "sector", "kind_weights"),
                         number(w, "geography", "kind_weights"),
                         number(w, "founder", "kind_weights")};
            s.weights.validate();
        }
        if (j.contains("calibration")) {
            const json& c = j.at("calibration");
            check_keys(c, {"source", "target_rho", "members", "w0"}, "calibration");
            if (c.contains("source")) {
                s.calibration.source = parse_calibration_source(text(c, "source", "calibration"));
            }
            if (c.contains("target_rho")) {
                s.calibration.target_rho = number(c, "target_rho", "calibration");
            }
            if (c.contains("members")) {
                s.calibration.members.clear();
                for (const auto& m : c.at("members")) {
                    s.calibration.members.push_back(affiliation_from_json(m));
                }
            }
            if (c.contains("w0")) {
                if (c.at("w0").is_null()) {
                    s.calibration.fixed_w0.reset();
                } else {
                    const double w0 = number(c, "w0", "calibration");
                    if (!(w0 >= 0.0 && w0 < 1.0)) {
                        throw Error(Errc::OutOfRange, "calibration.w0 must lie in [0, 1)");
                    }
                    s.calibration.fixed_w0 = w0;
                }
            }
            if (s.calibration.source == CalibrationSource::Explicit &&
                s.calibration.members.size() < 2) {
                throw Error(Errc::InvalidConfig,
                            "explicit calibration needs at least two members");
            }
        }
        if (j.contains("rules")) s.rules = rules_from_json(j.at("rules"));
        return s;
    });
}

json settings_to_json(const RunSettings& s) {
    json cal{{"source", to_string(s.calibration.source)},
             {"target_rho", s.calibration.target_rho},
             {"w0", optional_number(s.calibration.fixed_w0)}};
    if (s.calibration.source == CalibrationSource::Explicit) {
        json members = json::array();
        for (const auto& m : s.calibration.members) members.push_back(to_json(m));
        cal["members"] = members;
    }
    return json{{"seed", s.seed},
                {"iterations", s.iterations},
                {"kind_weights", to_json(s.weights)},
                {"calibration", cal},
                {"rules", to_json(s.rules)}};
}

PortfolioSpec portfolio_from_json(const json& j) {
    return guarded("portfolio", [&] {
        check_keys(j, {"label", "preset", "composition", "deals", "homogeneous", "homogeneous_p",
                       "rules"},
                   "portfolio");
        PortfolioSpec p;
        const int forms = static_cast<int>(j.contains("preset")) +
                          static_cast<int>(j.contains("composition")) +
                          static_cast<int>(j.contains("deals")) +
                          static_cast<int>(j.contains("homogeneous"));
        if (forms != 1) {
            fail("portfolio needs exactly one of 'preset', 'composition', 'deals', 'homogeneous'");
        }
        if (j.contains("preset")) {
            const std::string name = text(j, "preset", "portfolio");
            p.label = name;
            p.composition = preset_composition(name);
        } else if (j.contains("composition")) {
            p.composition = composition_from_json(j.at("composition"));
        } else if (j.contains("deals")) {
            for (const auto& d : j.at("deals")) {
                p.deals.push_back(deal_from_json(d));
                if (p.deals.back().id.empty()) {
                    p.deals.back().id = "deal-" + std::to_string(p.deals.size());
                }
            }
            if (p.deals.empty()) throw Error(Errc::InvalidConfig, "portfolio.deals is empty");
        } else {
            const json& h = j.at("homogeneous");
            check_keys(h, {"size", "p", "sector", "geography", "founder"}, "homogeneous");
            const std::uint64_t n = count(h, "size", "homogeneous");
            check_size(n, "homogeneous.size");
            const double prob = number(h, "p", "homogeneous");
            const Affiliation a = affiliation_from_json(h);
            for (std::uint64_t k = 0; k < n; ++k) {
                p.deals.push_back({"deal-" + std::to_string(k + 1), prob, a});
            }
        }
        if (j.contains("label")) p.label = text(j, "label", "portfolio");
        if (p.label.empty()) p.label = "portfolio";
        if (j.contains("homogeneous_p") && !j.at("homogeneous_p").is_null()) {
            p.homogeneous_p = number(j, "homogeneous_p", "portfolio");
        }
        if (j.contains("rules")) p.rules = rules_from_json(j.at("rules"));
        return p;
    });
}

json to_json(const PortfolioSpec& p) {
    json j{{"label", p.label}};
    if (p.composition) {
        j["composition"] = to_json(*p.composition);
    } else {
        json deals = json::array();
        for (const auto& d : p.deals) deals.push_back(to_json(d));
        j["deals"] = deals;
    }
    if (p.homogeneous_p) j["homogeneous_p"] = *p.homogeneous_p;
    if (p.rules) j["rules"] = to_json(*p.rules);
    return j;
}

ScenarioSpec scenario_from_json(const json& j, const RunSettings& defaults) {
    return guarded("scenario", [&] {
        check_keys(j, {"portfolio", "modes", "seed", "iterations", "kind_weights", "calibration",
                       "rules"},
                   "scenario");
        ScenarioSpec s;
        s.settings = settings_from_json(j, defaults);
        s.portfolio = portfolio_from_json(j.at("portfolio"));
        if (j.contains("modes")) {
            s.modes.clear();
            for (const auto& m : j.at("modes")) {
                if (!m.is_string()) fail("scenario.modes must be strings");
                s.modes.push_back(parse_model_mode(m.get<std::string>()));
            }
            if (s.modes.empty()) throw Error(Errc::InvalidConfig, "scenario.modes is empty");
        }
        return s;
    });
}

json to_json(const ScenarioSpec& s) {
    json j = settings_to_json(s.settings);
    j["portfolio"] = to_json(s.portfolio);
    j["modes"] = mode_names(s.modes);
    return j;
}

ScenarioSet scenario_set_from_json(const json& j, const RunSettings& defaults) {
    return guarded("scenario set", [&] {
        check_keys(j, {"portfolios", "seed", "iterations", "kind_weights", "calibration", "rules"},
                   "scenario set");
        ScenarioSet set;
        set.settings = settings_from_json(j, defaults);
        std::set<std::string> labels;
        for (const auto& p : j.at("portfolios")) {
            set.portfolios.push_back(portfolio_from_json(p));
            if (!labels.insert(set.portfolios.back().label).second) {
                throw Error(Errc::InvalidConfig,
                            "duplicate portfolio label '" + set.portfolios.back().label + "'");
            }
        }
        if (set.portfolios.empty()) {
            throw Error(Errc::InvalidConfig, "scenario set lists no portfolios");
        }
        return set;
    });
}

json to_json(const ScenarioSet& s) {
    json j = settings_to_json(s.settings);
    json ps = json::array();
    for (const auto& p : s.portfolios) ps.push_back(to_json(p));
    j["portfolios"] = ps;
    return j;
}

SweepSpec sweep_from_json(const json& j, const RunSettings& defaults) {
    return guarded("sweep", [&] {
        check_keys(j, {"type", "p_values", "size", "deal", "portfolios", "sizes", "replicates",
                       "seed", "iterations", "kind_weights", "calibration", "rules"},
                   "sweep");
        SweepSpec s;
        s.settings = settings_from_json(j, defaults);
        const std::string type = text(j, "type", "sweep");
        if (type == "probability") {
            s.type = SweepType::Probability;
            s.p_values = j.at("p_values").get<std::vector<double>>();
            if (s.p_values.empty()) throw Error(Errc::InvalidConfig, "sweep.p_values is empty");
            for (const double p : s.p_values) {
                if (!(p > 0.0 && p < 1.0)) {
                    throw Error(Errc::OutOfRange, "sweep.p_values must lie in (0, 1)");
                }
            }
            if (j.contains("size")) s.size = count(j, "size", "sweep");
            check_size(s.size, "sweep.size");
            if (j.contains("deal")) s.deal = affiliation_from_json(j.at("deal"));
        } else if (type == "size") {
            s.type = SweepType::Size;
            std::set<std::string> labels;
            for (const auto& p : j.at("portfolios")) {
                s.portfolios.push_back(portfolio_from_json(p));
                if (!s.portfolios.back().composition) {
                    throw Error(Errc::InvalidConfig, "size sweep portfolios need a composition");
                }
                if (!labels.insert(s.portfolios.back().label).second) {
                    throw Error(Errc::InvalidConfig, "duplicate portfolio label '" +
                                                         s.portfolios.back().label + "'");
                }
            }
            if (s.portfolios.empty()) {
                throw Error(Errc::InvalidConfig, "size sweep lists no portfolios");
            }
            if (j.contains("sizes")) {
                s.sizes.clear();
                for (const auto& n : j.at("sizes")) {
                    if (!n.is_number_unsigned()) fail("sweep.sizes must be positive integers");
                    check_size(n.get<std::uint64_t>(), "sweep.sizes entries");
                    s.sizes.push_back(n.get<std::size_t>());
                }
            }
            if (j.contains("replicates")) s.replicates = count(j, "replicates", "sweep");
            if (s.replicates < 1) throw Error(Errc::InvalidConfig, "replicates must be >= 1");
        } else {
            fail("sweep.type must be 'probability' or 'size'");
        }
        return s;
    });
}

json to_json(const SweepSpec& s) {
    json j = settings_to_json(s.settings);
    if (s.type == SweepType::Probability) {
        j["type"] = "probability";
        j["p_values"] = s.p_values;
        j["size"] = s.size;
        j["deal"] = to_json(s.deal);
    } else {
        j["type"] = "size";
        json ps = json::array();
        for (const auto& p : s.portfolios) ps.push_back(to_json(p));
        j["portfolios"] = ps;
        j["sizes"] = s.sizes;
        j["replicates"] = s.replicates;
    }
    return j;
}

json parse_document(std::string_view body, std::string_view what) {
    try {
        return json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        fail(std::string(what) + " is not valid JSON: " + e.what());
    }
}

json load_document(const std::filesystem::path& path) {
    return parse_document(csv::read_file(path), path.string());
}

// --- manifests and reports ---------------------------------------------------

std::string RunManifest::id() const {
    json hashed_inputs = json::array();
    for (const auto& in : inputs) {
        hashed_inputs.push_back({{"role", in.role}, {"sha256", in.sha256}});
    }
    const json basis{{"command", command}, {"inputs", hashed_inputs},
                     {"seed", seed},       {"iterations", iterations},
                     {"modes", modes},     {"engine_version", engine_version},
                     {"request", request}};
    return sha256_hex(basis.dump());
}

json to_json(const RunManifest& m) {
    json inputs = json::array();
    for (const auto& in : m.inputs) {
        inputs.push_back({{"role", in.role}, {"path", in.path}, {"sha256", in.sha256}});
    }
    return json{{"id", m.id()},
                {"command", m.command},
                {"inputs", inputs},
                {"seed", m.seed},
                {"iterations", m.iterations},
                {"modes", m.modes},
                {"outputs", m.outputs},
                {"engine_version", m.engine_version},
                {"request", m.request}};
}

RunManifest manifest_from_json(const json& j) {
    return guarded("manifest", [&] {
        RunManifest m;
        m.command = text(j, "command", "manifest");
        for (const auto& in : j.at("inputs")) {
            m.inputs.push_back({text(in, "role", "manifest.inputs"),
                                text(in, "path", "manifest.inputs"),
                                text(in, "sha256", "manifest.inputs")});
        }
        m.seed = count(j, "seed", "manifest");
        m.iterations = count(j, "iterations", "manifest");
        m.modes = j.at("modes").get<std::vector<std::string>>();
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.engine_version = text(j, "engine_version", "manifest");
        m.request = j.at("request");
        return m;
    });
}

UniverseContext load_context(const std::filesystem::path& sigma_csv) {
    FactorUniverse universe = load_universe(sigma_csv);
    const std::string bytes = csv::read_file(sigma_csv) + csv::read_file(kinds_sidecar_path(sigma_csv));
    return {std::move(universe), sigma_csv.string(), sha256_hex(bytes)};
}

RunManifest make_manifest(std::string_view command, const UniverseContext& ctx,
                          const json& request, const RunSettings& settings,
                          std::vector<std::string> modes) {
    RunManifest m;
    m.command = std::string(command);
    m.inputs.push_back({"sigma", ctx.source, ctx.sha256});
    m.inputs.push_back({"request", "", sha256_hex(request.dump())});
    m.seed = settings.seed;
    m.iterations = settings.iterations;
    m.modes = std::move(modes);
    m.request = request;
    return m;
}

json simulate_report(const ScenarioResult& result, const RunManifest& manifest) {
    json j = with_header("simulate", manifest);
    json deals = json::array();
    for (const auto& d : result.deals) deals.push_back(to_json(d));
    j["portfolio"] = {{"label", result.label}, {"deals", deals}};
    json modes = json::array();
    for (const auto& m : result.modes) modes.push_back(to_json(m));
    j["results"] = modes;
    return j;
}

json compare_report(const std::vector<ScenarioResult>& results, const RunManifest& manifest) {
    json j = with_header("compare", manifest);
    j["columns"] = {"p_u_eq_0",       "p_u_le_1",       "p_u_le_2",
                    "e_u_given_ge_1", "e_u_given_ge_2", "e_u_given_ge_3"};
    json rows = json::array();
    for (const auto& r : results) {
        json deals = json::array();
        for (const auto& d : r.deals) deals.push_back(to_json(d));
        json row = to_json(r.modes.at(0));
        row["label"] = r.label;
        row["deals"] = deals;
        rows.push_back(row);
    }
    j["rows"] = rows;
    j["table"] = compare_table_text(results);
    return j;
}

json sweep_report(const ProbabilitySweep& sweep, const RunManifest& manifest) {
    json j = with_header("sweep", manifest);
    j["sweep"] = "probability";
    j["size"] = sweep.size;
    j["deal"] = to_json(sweep.deal);
    json rows = json::array();
    for (const auto& r : sweep.rows) {
        rows.push_back({{"p", r.p},
                        {"mode", to_string(r.mode)},
                        {"stats", to_json(r.stats)},
                        {"std_errors", to_json(r.errors)}});
    }
    j["rows"] = rows;
    return j;
}

json sweep_report(const SizeSweep& sweep, const RunManifest& manifest) {
    json j = with_header("sweep", manifest);
    j["sweep"] = "size";
    j["replicates"] = sweep.replicates;
    json rows = json::array();
    for (const auto& r : sweep.rows) {
        rows.push_back({{"label", r.label},
                        {"mode", to_string(ModelMode::MultiFactor)},
                        {"size", r.size},
                        {"expected_u", r.expected_u},
                        {"expected_u_se", r.expected_u_se},
                        {"p_u_eq_0", r.p_u_eq_0},
                        {"p_u_eq_0_se", r.p_u_eq_0_se}});
    }
    j["rows"] = rows;
    return j;
}

std::string sweep_csv(const ProbabilitySweep& sweep) {
    std::ostringstream os;
    os << "label,mode,x,statistic,value,std_error\n";
    const std::string label = "homogeneous-" + std::to_string(sweep.size);
    for (const auto& r : sweep.rows) {
        const std::string prefix =
            label + "," + std::string(to_string(r.mode)) + "," + csv_number(r.p) + ",";
        const auto row = [&](std::string_view stat, double v, std::optional<double> se) {
            os << prefix << stat << ',' << csv_number(v) << ',' << (se ? csv_number(*se) : "")
               << '\n';
        };
        const auto cond = [&](std::string_view stat, const std::optional<double>& v) {
            if (v) row(stat, *v, std::nullopt);
            else os << prefix << stat << ",,\n";
        };
        row("expected_u", r.stats.expected_u, r.errors.expected_u);
        row("p_u_eq_0", r.stats.p_u_eq_0, r.errors.p_u_eq_0);
        row("p_u_le_1", r.stats.p_u_le_1, r.errors.p_u_le_1);
        row("p_u_le_2", r.stats.p_u_le_2, r.errors.p_u_le_2);
        cond("e_u_given_ge_1", r.stats.e_u_given_ge_1);
        cond("e_u_given_ge_2", r.stats.e_u_given_ge_2);
        cond("e_u_given_ge_3", r.stats.e_u_given_ge_3);
    }
    return os.str();
}

std::string sweep_csv(const SizeSweep& sweep) {
    std::ostringstream os;
    os << "label,mode,x,statistic,value,std_error\n";
    for (const auto& r : sweep.rows) {
        const std::string prefix = r.label + "," + std::string(to_string(ModelMode::MultiFactor)) +
                                   "," + std::to_string(r.size) + ",";
        os << prefix << "expected_u," << csv_number(r.expected_u) << ','
           << csv_number(r.expected_u_se) << '\n';
        os << prefix << "p_u_eq_0," << csv_number(r.p_u_eq_0) << ',' << csv_number(r.p_u_eq_0_se)
           << '\n';
    }
    return os.str();
}

std::string format_percent(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * p);
    return buf;
}

std::string format_mean(const std::optional<double>& v) {
    if (!v) return "—";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

std::string compare_table_text(const std::vector<ScenarioResult>& results) {
    const std::vector<std::string> header = {"Portfolio", "P(U=0)",    "P(U<=1)",  "P(U<=2)",
                                             "E[U|U>=1]", "E[U|U>=2]", "E[U|U>=3]"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results) {
        const PortfolioStats& s = r.modes.at(0).stats;
        rows.push_back({r.label, format_percent(s.p_u_eq_0), format_percent(s.p_u_le_1),
                        format_percent(s.p_u_le_2), format_mean(s.e_u_given_ge_1),
                        format_mean(s.e_u_given_ge_2), format_mean(s.e_u_given_ge_3)});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = display_width(header[c]);
        for (const auto& row : rows) width[c] = std::max(width[c], display_width(row[c]));
    }
    std::ostringstream os;
    const auto emit = [&](const std::vector<std::string>& row) {
        os << pad_right(row[0], width[0]);
        for (std::size_t c = 1; c < row.size(); ++c) os << "  " << pad_left(row[c], width[c]);
        os << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return os.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json error_body(std::string_view code, std::string_view message) {
    return json{{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace vcrisk::report
