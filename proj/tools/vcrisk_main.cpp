#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vcrisk/commands.hpp"
#include "vcrisk/csv.hpp"
#include "vcrisk/error.hpp"
#include "vcrisk/report.hpp"
#include "vcrisk/service.hpp"
#include "vcrisk/sigma_io.hpp"

namespace fs = std::filesystem;
using namespace vcrisk;
using report::json;

namespace {

constexpr int kExitValidation = 2;

fs::path config_dir() {
    if (const char* env = std::getenv("VCRISK_CONFIG_DIR"); env && *env) return env;
    return VCRISK_DEFAULT_DATA_DIR;
}

// Built-in settings, with the config directory's rules file when present.
RunSettings base_settings(const std::string& rules_path) {
    RunSettings s;
    fs::path rules = rules_path;
    if (rules.empty() && fs::exists(config_dir() / "rules_default.json")) {
        rules = config_dir() / "rules_default.json";
    }
    if (!rules.empty()) s.rules = report::rules_from_json(report::load_document(rules));
    return s;
}

std::string default_sigma() { return (config_dir() / "fixture_sigma.csv").string(); }

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
    } else {
        csv::write_file(path, text);
    }
}

std::vector<std::string> outputs_of(std::initializer_list<std::string> paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) {
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

struct RunFlags {
    std::string input;
    std::string sigma;
    std::string rules;
    std::optional<std::uint64_t> iters;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out;

    commands::Options options() const {
        commands::Options o;
        o.iterations = iters;
        o.seed = seed;
        o.threads = threads;
        return o;
    }
};

void add_run_flags(CLI::App* cmd, RunFlags& f, const char* input_help) {
    cmd->add_option("input", f.input, input_help)->required()->check(CLI::ExistingFile);
    cmd->add_option("--sigma", f.sigma, "correlation CSV (default: config dir fixture)");
    cmd->add_option("--rules", f.rules, "probability rules JSON used for absent 'rules' keys");
    cmd->add_option("--iters", f.iters, "Monte Carlo iterations M");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    cmd->add_option("--out", f.out, "write the JSON report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlated venture portfolio outcome simulator"};
    app.require_subcommand(1);

    // estimate-corr
    std::string prices, baskets, sigma_out, estimate_report;
    double eps = 1e-10;
    auto* est = app.add_subcommand("estimate-corr", "estimate the factor correlation matrix");
    est->add_option("prices", prices, "price CSV with a 'date' column")->required();
    est->add_option("baskets", baskets, "basket manifest JSON")->required();
    est->add_option("--out", sigma_out, "output correlation CSV (kinds sidecar alongside)")
        ->required();
    est->add_option("--eps", eps, "minimum eigenvalue after PSD repair");
    est->add_option("--report", estimate_report, "write the repair report here");

    RunFlags sim_flags;
    std::vector<std::string> mode_names;
    auto* sim = app.add_subcommand("simulate", "simulate one scenario");
    add_run_flags(sim, sim_flags, "scenario JSON");
    sim->add_option("--mode", mode_names,
                    "uncorrelated | single_factor_sector | multi_factor (repeatable)");

    RunFlags cmp_flags;
    bool cmp_json = false;
    auto* cmp = app.add_subcommand("compare", "compare a set of portfolios");
    add_run_flags(cmp, cmp_flags, "scenario set JSON");
    cmp->add_flag("--json", cmp_json, "print the JSON report instead of the text table");

    RunFlags sweep_flags;
    std::string sweep_csv;
    auto* swp = app.add_subcommand("sweep", "probability or portfolio-size sweep");
    add_run_flags(swp, sweep_flags, "sweep JSON");
    swp->add_option("--csv", sweep_csv, "write the plotting CSV here");

    std::string host = "127.0.0.1", serve_sigma, serve_rules;
    int port = 8080;
    ServiceConfig service_config;
    auto* srv = app.add_subcommand("serve", "run the HTTP/JSON service");
    srv->add_option("--host", host);
    srv->add_option("--port", port);
    srv->add_option("--sigma", serve_sigma);
    srv->add_option("--rules", serve_rules);
    srv->add_option("--max-iters", service_config.max_iterations, "reject requests above this M");
    srv->add_option("--max-inflight", service_config.max_in_flight,
                    "concurrent simulations before 429");
    srv->add_option("--threads", service_config.threads);

    std::string cal_sigma, cal_scenario, cal_mode = "multi_factor", cal_source = "cross_product";
    double cal_target = 0.12;
    auto* cal = app.add_subcommand("calibrate", "print w0 for a mode and calibration universe");
    cal->add_option("--sigma", cal_sigma);
    cal->add_option("--mode", cal_mode);
    cal->add_option("--source", cal_source, "cross_product | portfolio");
    cal->add_option("--scenario", cal_scenario, "scenario JSON (needed for --source portfolio)");
    cal->add_option("--target", cal_target, "target mean pairwise correlation");

    std::string asg_preset, asg_composition, asg_rules, asg_sigma;
    std::uint64_t asg_seed = 42;
    auto* asg = app.add_subcommand("assign", "realize a composition and draw probabilities");
    auto* preset_opt = asg->add_option("--preset", asg_preset, "A..G");
    asg->add_option("--composition", asg_composition, "composition JSON")->excludes(preset_opt);
    asg->add_option("--rules", asg_rules);
    asg->add_option("--seed", asg_seed);
    asg->add_option("--sigma", asg_sigma);

    std::string replay_in, replay_out;
    unsigned replay_threads = 0;
    bool replay_check = false;
    auto* rep = app.add_subcommand("replay", "re-run a report's manifest");
    rep->add_option("report", replay_in, "report or manifest JSON")->required();
    rep->add_option("--out", replay_out);
    rep->add_option("--threads", replay_threads);
    rep->add_flag("--check", replay_check, "exit 1 unless the output matches the input bytes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*est) {
            const fs::path sidecar = kinds_sidecar_path(sigma_out);
            auto out = commands::estimate_corr(
                prices, baskets, eps, outputs_of({sigma_out, sidecar.string(), estimate_report}));
            csv::write_file(sigma_out, out.sigma_csv);
            csv::write_file(sidecar, out.kinds_csv);
            emit(report::dump(out.report), estimate_report);
            if (out.report.at("repaired").get<bool>()) {
                std::cerr << "note: correlation matrix was not PSD and has been repaired\n";
            }
        } else if (*sim || *cmp || *swp) {
            RunFlags& f = *sim ? sim_flags : *cmp ? cmp_flags : sweep_flags;
            const UniverseContext ctx =
                report::load_context(f.sigma.empty() ? default_sigma() : f.sigma);
            const RunSettings defaults = base_settings(f.rules);
            const json doc = report::load_document(f.input);
            commands::Options o = f.options();
            if (*sim) {
                for (const auto& m : mode_names) o.modes.push_back(parse_model_mode(m));
                o.outputs = outputs_of({f.out});
                emit(report::dump(commands::simulate(doc, ctx, defaults, o)), f.out);
            } else if (*cmp) {
                o.outputs = outputs_of({f.out});
                const json r = commands::compare(doc, ctx, defaults, o);
                if (!f.out.empty()) csv::write_file(f.out, report::dump(r));
                std::cout << (cmp_json ? report::dump(r) : r.at("table").get<std::string>());
            } else {
                o.outputs = outputs_of({f.out, sweep_csv});
                const auto r = commands::sweep(doc, ctx, defaults, o);
                if (!sweep_csv.empty()) csv::write_file(sweep_csv, r.csv);
                emit(report::dump(r.report), f.out);
            }
        } else if (*srv) {
            service_config.defaults = base_settings(serve_rules);
            Service service(report::load_context(serve_sigma.empty() ? default_sigma()
                                                                      : serve_sigma),
                            service_config);
            HttpServer server(service);
            const int bound = server.bind(host, port);
            if (bound < 0) {
                std::cerr << "error: cannot bind " << host << ":" << port << "\n";
                return 1;
            }
            std::cerr << "listening on http://" << host << ":" << bound << "\n";
            return server.listen() ? 0 : 1;
        } else if (*cal) {
            const UniverseContext ctx =
                report::load_context(cal_sigma.empty() ? default_sigma() : cal_sigma);
            RunSettings s = base_settings("");
            s.calibration.source = parse_calibration_source(cal_source);
            s.calibration.target_rho = cal_target;
            const ModelMode mode = parse_model_mode(cal_mode);
            Portfolio portfolio;
            if (s.calibration.source == CalibrationSource::Portfolio) {
                if (cal_scenario.empty()) {
                    throw Error(Errc::InvalidConfig, "--source portfolio needs --scenario");
                }
                const ScenarioSpec spec =
                    report::scenario_from_json(report::load_document(cal_scenario), s);
                s = spec.settings;
                s.calibration.source = CalibrationSource::Portfolio;
                s.calibration.target_rho = cal_target;
                portfolio = build_portfolio(spec.portfolio, s, ctx.universe);
            } else if (s.calibration.source == CalibrationSource::Explicit) {
                throw Error(Errc::InvalidConfig, "explicit calibration is set in a scenario file");
            }
            const Calibration c = calibrate_for_mode(portfolio, mode, s, ctx.universe);
            std::cout << report::dump({{"mode", to_string(mode)},
                                       {"source", to_string(s.calibration.source)},
                                       {"target_rho", cal_target},
                                       {"w0", c.w0},
                                       {"rho_bar_prime", c.rho_bar_prime}});
        } else if (*asg) {
            const UniverseContext ctx =
                report::load_context(asg_sigma.empty() ? default_sigma() : asg_sigma);
            RunSettings s = base_settings(asg_rules);
            s.seed = asg_seed;
            PortfolioSpec spec;
            if (!asg_preset.empty()) {
                spec.label = asg_preset;
                spec.composition = preset_composition(asg_preset);
            } else if (!asg_composition.empty()) {
                spec.label = fs::path(asg_composition).stem().string();
                spec.composition =
                    report::composition_from_json(report::load_document(asg_composition));
            } else {
                throw Error(Errc::InvalidConfig, "assign needs --preset or --composition");
            }
            const Portfolio p = build_portfolio(spec, s, ctx.universe);
            json deals = json::array();
            double total = 0.0;
            for (const auto& d : p.deals) {
                deals.push_back(report::to_json(d));
                total += d.p;
            }
            std::cout << report::dump({{"label", p.label},
                                       {"seed", s.seed},
                                       {"expected_u", total},
                                       {"deals", deals}});
        } else if (*rep) {
            const std::string original = csv::read_file(replay_in);
            const json doc = report::parse_document(original, replay_in);
            const std::string regenerated = report::dump(commands::replay(doc, replay_threads));
            emit(regenerated, replay_out);
            if (replay_check && regenerated != original) {
                std::cerr << "replay differs from " << replay_in << "\n";
                return 1;
            }
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
