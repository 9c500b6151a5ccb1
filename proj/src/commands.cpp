#include "vcrisk/commands.hpp"

#include "vcrisk/corr_estimator.hpp"
#include "vcrisk/csv.hpp"
#include "vcrisk/error.hpp"
#include "vcrisk/hashing.hpp"
#include "vcrisk/sigma_io.hpp"

namespace vcrisk::commands {

namespace {

void apply(RunSettings& s, const Options& o) {
    if (o.iterations) s.iterations = *o.iterations;
    if (o.seed) s.seed = *o.seed;
    if (s.iterations < 1) throw Error(Errc::InvalidConfig, "iterations must be at least 1");
    if (s.iterations > o.max_iterations) {
        throw Error(Errc::InvalidConfig, "iterations " + std::to_string(s.iterations) +
                                             " exceed the ceiling of " +
                                             std::to_string(o.max_iterations));
    }
    s.threads = o.threads;
}

report::RunManifest finish(report::RunManifest m, const Options& o) {
    m.outputs = o.outputs;
    return m;
}

std::string sigma_path_of(const report::RunManifest& m) {
    for (const auto& in : m.inputs) {
        if (in.role == "sigma") return in.path;
    }
    throw Error(Errc::InvalidConfig, "manifest records no sigma input");
}

const report::InputRef& input(const report::RunManifest& m, std::string_view role) {
    for (const auto& in : m.inputs) {
        if (in.role == role) return in;
    }
    throw Error(Errc::InvalidConfig, "manifest records no '" + std::string(role) + "' input");
}

}  // namespace

json simulate(const json& doc, const UniverseContext& ctx, const RunSettings& defaults,
              const Options& options) {
    ScenarioSpec spec = report::scenario_from_json(doc, defaults);
    if (!options.modes.empty()) spec.modes = options.modes;
    apply(spec.settings, options);
    std::vector<std::string> modes;
    for (const auto m : spec.modes) modes.emplace_back(to_string(m));
    const auto manifest = finish(
        report::make_manifest("simulate", ctx, report::to_json(spec), spec.settings, modes),
        options);
    return report::simulate_report(run_scenario(spec, ctx), manifest);
}

json compare(const json& doc, const UniverseContext& ctx, const RunSettings& defaults,
             const Options& options) {
    report::ScenarioSet set = report::scenario_set_from_json(doc, defaults);
    apply(set.settings, options);
    const auto manifest = finish(report::make_manifest("compare", ctx, report::to_json(set),
                                                       set.settings, {"multi_factor"}),
                                 options);
    return report::compare_report(run_baseline_comparison(set.portfolios, set.settings, ctx),
                                  manifest);
}

SweepOutput sweep(const json& doc, const UniverseContext& ctx, const RunSettings& defaults,
                  const Options& options) {
    report::SweepSpec spec = report::sweep_from_json(doc, defaults);
    apply(spec.settings, options);
    if (spec.type == report::SweepType::Probability) {
        const auto manifest =
            finish(report::make_manifest("sweep", ctx, report::to_json(spec), spec.settings,
                                         {"uncorrelated", "multi_factor"}),
                   options);
        const ProbabilitySweep s =
            run_probability_sweep(spec.p_values, spec.size, spec.deal, spec.settings, ctx);
        return {report::sweep_report(s, manifest), report::sweep_csv(s)};
    }
    const auto manifest = finish(
        report::make_manifest("sweep", ctx, report::to_json(spec), spec.settings, {"multi_factor"}),
        options);
    const SizeSweep s =
        run_size_sweep(spec.portfolios, spec.sizes, spec.settings, ctx, spec.replicates);
    return {report::sweep_report(s, manifest), report::sweep_csv(s)};
}

EstimateOutput estimate_corr(const std::filesystem::path& prices,
                             const std::filesystem::path& baskets, double eps,
                             std::vector<std::string> outputs) {
    const std::string price_bytes = csv::read_file(prices);
    const std::string basket_bytes = csv::read_file(baskets);
    const CorrelationEstimate est =
        estimate_universe(parse_prices(price_bytes), parse_baskets(basket_bytes), eps);

    std::vector<std::string> labels;
    for (const auto& g : est.universe.groups()) labels.push_back(g.label);
    EstimateOutput out;
    out.sigma_csv = format_sigma_csv(labels, est.universe.sigma());
    out.kinds_csv = format_kinds_csv(est.universe.groups());

    report::RunManifest m;
    m.command = "estimate-corr";
    m.inputs = {{"prices", prices.string(), sha256_hex(price_bytes)},
                {"baskets", baskets.string(), sha256_hex(basket_bytes)}};
    m.outputs = std::move(outputs);
    m.request = {{"eps", eps}};

    out.report = {{"schema_version", report::kSchemaVersion},
                  {"report", "estimate-corr"},
                  {"manifest", report::to_json(m)},
                  {"labels", labels},
                  {"observations", est.observations},
                  {"repaired", est.repair.repaired},
                  {"min_eigenvalue_before", est.repair.min_eigenvalue_before},
                  {"max_abs_change", est.repair.max_abs_change},
                  {"sigma_sha256", sha256_hex(out.sigma_csv)}};
    return out;
}

json replay(const json& report_or_manifest, unsigned threads) {
    const json& mj = report_or_manifest.contains("manifest") ? report_or_manifest.at("manifest")
                                                             : report_or_manifest;
    const report::RunManifest m = report::manifest_from_json(mj);
    if (m.engine_version != report::kEngineVersion) {
        throw Error(Errc::InvalidConfig, "manifest was written by engine " + m.engine_version +
                                             ", this is " + std::string(report::kEngineVersion));
    }
    if (m.command == "estimate-corr") {
        const auto& prices = input(m, "prices");
        const auto& baskets = input(m, "baskets");
        for (const auto* in : {&prices, &baskets}) {
            if (sha256_file(in->path) != in->sha256) {
                throw Error(Errc::InvalidConfig, "input '" + in->path + "' changed since the run");
            }
        }
        return estimate_corr(prices.path, baskets.path, m.request.at("eps").get<double>(),
                             m.outputs)
            .report;
    }

    const UniverseContext ctx = report::load_context(sigma_path_of(m));
    if (ctx.sha256 != input(m, "sigma").sha256) {
        throw Error(Errc::InvalidConfig, "sigma '" + ctx.source + "' changed since the run");
    }
    Options o;
    o.threads = threads;
    o.outputs = m.outputs;
    for (const auto& mode : m.modes) o.modes.push_back(parse_model_mode(mode));
    const RunSettings defaults;
    if (m.command == "simulate") return simulate(m.request, ctx, defaults, o);
    o.modes.clear();
    if (m.command == "compare") return compare(m.request, ctx, defaults, o);
    if (m.command == "sweep") return sweep(m.request, ctx, defaults, o).report;
    throw Error(Errc::InvalidConfig, "command '" + m.command + "' cannot be replayed");
}

}  // namespace vcrisk::commands
