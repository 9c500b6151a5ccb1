#include "vcrisk/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "vcrisk/error.hpp"

namespace vcrisk {

namespace {

constexpr double kMixTolerance = 1e-9;

void validate_mix(const Mix& mix, std::string_view name) {
    if (mix.empty()) {
        throw Error(Errc::InvalidComposition, std::string(name) + " is empty");
    }
    double sum = 0.0;
    for (const auto& [label, f] : mix) {
        if (!(f >= 0.0) || !std::isfinite(f)) {
            throw Error(Errc::InvalidComposition,
                        std::string(name) + " fraction for '" + label + "' must be >= 0");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > kMixTolerance) {
        std::ostringstream os;
        os << name << " must sum to 1, got " << sum;
        throw Error(Errc::InvalidComposition, os.str());
    }
}

std::vector<std::string> layout(const Mix& mix, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (const auto& [label, count] : largest_remainder(mix, n)) {
        out.insert(out.end(), count, label);
    }
    return out;
}

double replicate_standard_error(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

void Composition::validate() const {
    if (size < 1) {
        throw Error(Errc::InvalidComposition, "portfolio size must be at least 1");
    }
    validate_mix(founder_mix, "founder_mix");
    validate_mix(sector_mix, "sector_mix");
    validate_mix(geography_mix, "geography_mix");
}

Composition Composition::resized(std::size_t n) const {
    Composition c = *this;
    c.size = n;
    return c;
}

std::vector<std::pair<std::string, std::size_t>> largest_remainder(const Mix& mix, std::size_t n) {
    struct Slot {
        std::string label;
        std::size_t count;
        double remainder;
        std::size_t order;
    };
    std::vector<Slot> slots;
    std::size_t assigned = 0;
    for (const auto& [label, f] : mix) {
        const double quota = f * static_cast<double>(n);
        // Guard against 0.3 * 40 landing a hair under 12.
        const double whole = std::floor(quota + 1e-9);
        slots.push_back({label, static_cast<std::size_t>(whole), std::max(0.0, quota - whole),
                         slots.size()});
        assigned += slots.back().count;
    }
    std::vector<Slot*> by_remainder;
    for (auto& s : slots) by_remainder.push_back(&s);
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [](const Slot* a, const Slot* b) { return a->remainder > b->remainder; });
    for (std::size_t i = 0; assigned < n && !by_remainder.empty(); ++i) {
        ++by_remainder[i % by_remainder.size()]->count;
        ++assigned;
    }
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& s : slots) out.emplace_back(s.label, s.count);
    return out;
}

std::vector<Affiliation> realize_portfolio(const Composition& comp, const RandomStream& stream) {
    comp.validate();
    auto founders = layout(comp.founder_mix, comp.size);
    auto sectors = layout(comp.sector_mix, comp.size);
    auto geos = layout(comp.geography_mix, comp.size);
    RandomStream fs = stream.substream(0);
    RandomStream ss = stream.substream(1);
    RandomStream gs = stream.substream(2);
    shuffle(std::span<std::string>(founders), fs);
    shuffle(std::span<std::string>(sectors), ss);
    shuffle(std::span<std::string>(geos), gs);
    std::vector<Affiliation> out;
    out.reserve(comp.size);
    for (std::size_t i = 0; i < comp.size; ++i) {
        out.push_back({sectors[i], geos[i], founders[i]});
    }
    return out;
}

Composition preset_composition(std::string_view name) {
    Composition c;
    c.size = 40;
    const Mix d_founders = {{"Repeat", 1.0}};
    const Mix d_geos = {{"CA", 0.5}, {"NY", 0.5}};
    if (name == "A") {
        c.founder_mix = {{"Repeat", 0.3}, {"FirstTime", 0.7}};
        c.sector_mix = {{"AI", 0.3}, {"FinTech", 0.15}, {"Healthcare", 0.15},
                        {"Consumer", 0.15}, {"SaaS", 0.25}};
        c.geography_mix = {{"CA", 0.4}, {"NY", 0.2}, {"MA", 0.1}, {"OtherUS", 0.3}};
    } else if (name == "B") {
        c.founder_mix = {{"Repeat", 1.0}};
        c.sector_mix = {{"AI", 1.0}};
        c.geography_mix = {{"CA", 1.0}};
    } else if (name == "C") {
        c.founder_mix = {{"Repeat", 0.5}, {"FirstTime", 0.5}};
        c.sector_mix = {{"AI", 0.2}, {"FinTech", 0.2}, {"Healthcare", 0.2},
                        {"Consumer", 0.2}, {"SaaS", 0.2}};
        c.geography_mix = {{"CA", 0.25}, {"NY", 0.25}, {"MA", 0.25}, {"OtherUS", 0.25}};
    } else if (name == "D") {
        c.founder_mix = d_founders;
        c.sector_mix = {{"AI", 0.35}, {"FinTech", 0.325}, {"SaaS", 0.325}};
        c.geography_mix = d_geos;
    } else if (name == "E") {
        c.founder_mix = d_founders;
        c.sector_mix = {{"AI", 0.25}, {"FinTech", 0.25}, {"Healthcare", 0.25}, {"SaaS", 0.25}};
        c.geography_mix = d_geos;
    } else if (name == "F") {
        c.founder_mix = d_founders;
        c.sector_mix = {{"AI", 0.4}, {"FinTech", 0.2}, {"Healthcare", 0.2}, {"SaaS", 0.2}};
        c.geography_mix = d_geos;
    } else if (name == "G") {
        c.founder_mix = d_founders;
        c.sector_mix = {{"AI", 0.2}, {"FinTech", 0.2}, {"Healthcare", 0.4}, {"SaaS", 0.2}};
        c.geography_mix = d_geos;
    } else {
        throw Error(Errc::InvalidConfig, "unknown preset portfolio '" + std::string(name) + "'");
    }
    return c;
}

std::vector<std::string> preset_names() { return {"A", "B", "C", "D", "E", "F", "G"}; }

std::string_view to_string(CalibrationSource source) noexcept {
    switch (source) {
        case CalibrationSource::CrossProduct: return "cross_product";
        case CalibrationSource::Portfolio: return "portfolio";
        case CalibrationSource::Explicit: return "explicit";
    }
    return "unknown";
}

CalibrationSource parse_calibration_source(std::string_view text) {
    if (text == "cross_product") return CalibrationSource::CrossProduct;
    if (text == "portfolio") return CalibrationSource::Portfolio;
    if (text == "explicit") return CalibrationSource::Explicit;
    throw Error(Errc::InvalidConfig, "unknown calibration source '" + std::string(text) +
                                         "' (expected cross_product, portfolio or explicit)");
}

const ModeResult& ScenarioResult::mode(ModelMode m) const {
    for (const auto& r : modes) {
        if (r.mode == m) return r;
    }
    throw Error(Errc::InvalidConfig, "scenario '" + label + "' has no " +
                                         std::string(to_string(m)) + " result");
}

Portfolio build_portfolio(const PortfolioSpec& spec, const RunSettings& settings,
                          const FactorUniverse& universe) {
    Portfolio portfolio{spec.label, {}};
    if (!spec.deals.empty()) {
        portfolio.deals = spec.deals;
        if (spec.homogeneous_p) {
            for (auto& d : portfolio.deals) d.p = *spec.homogeneous_p;
        }
    } else if (spec.composition) {
        const auto affiliations = realize_portfolio(
            *spec.composition, RandomStream(derive_key(settings.seed, "realize"), 0));
        if (spec.homogeneous_p) {
            for (std::size_t k = 0; k < affiliations.size(); ++k) {
                portfolio.deals.push_back(
                    {"deal-" + std::to_string(k + 1), *spec.homogeneous_p, affiliations[k]});
            }
        } else {
            const AssignmentRules& rules = spec.rules ? *spec.rules : settings.rules;
            portfolio.deals = assign_probabilities(
                affiliations, rules, RandomStream(derive_key(settings.seed, "assign"), 0));
        }
    } else {
        throw Error(Errc::InvalidConfig,
                    "portfolio '" + spec.label + "' needs either deals or a composition");
    }
    validate_portfolio(portfolio, universe);
    return portfolio;
}

Calibration calibrate_for_mode(const Portfolio& portfolio, ModelMode mode,
                               const RunSettings& settings, const FactorUniverse& universe) {
    if (mode == ModelMode::Uncorrelated) {
        return {0.0, 0.0};
    }
    const CalibrationSpec& spec = settings.calibration;
    if (spec.fixed_w0) {
        return {*spec.fixed_w0, 0.0};
    }
    const KindWeights weights = weights_for(mode, settings.weights);
    switch (spec.source) {
        case CalibrationSource::CrossProduct:
            return calibrate_w0(universe, weights, cross_product_universe(universe),
                                spec.target_rho);
        case CalibrationSource::Portfolio:
            return calibrate_w0(universe, weights, portfolio.affiliations(), spec.target_rho);
        case CalibrationSource::Explicit:
            return calibrate_w0(universe, weights, spec.members, spec.target_rho);
    }
    throw Error(Errc::InvalidConfig, "unhandled calibration source");
}

ModeResult run_mode(const Portfolio& portfolio, ModelMode mode, const RunSettings& settings,
                    const FactorUniverse& universe) {
    ModeResult result;
    result.mode = mode;
    result.calibration = calibrate_for_mode(portfolio, mode, settings, universe);
    const KindWeights weights = weights_for(mode, settings.weights);
    const LoadingSet loadings =
        mode == ModelMode::Uncorrelated
            ? LoadingSet({}, result.calibration, weights)
            : LoadingSet::build(portfolio.affiliations(), weights, universe, result.calibration);
    result.distribution =
        simulate(portfolio, loadings, universe,
                 SimConfig{settings.iterations, settings.seed, mode, settings.threads});
    result.stats = distribution_stats(result.distribution);
    result.errors = standard_errors(result.distribution);
    return result;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const UniverseContext& ctx) {
    if (spec.modes.empty()) {
        throw Error(Errc::InvalidConfig, "scenario lists no model modes");
    }
    const Portfolio portfolio = build_portfolio(spec.portfolio, spec.settings, ctx.universe);
    ScenarioResult result;
    result.label = spec.portfolio.label;
    result.deals = portfolio.deals;
    for (const ModelMode m : spec.modes) {
        result.modes.push_back(run_mode(portfolio, m, spec.settings, ctx.universe));
    }
    result.provenance = {spec.settings.seed, spec.settings.iterations, ctx.source, ctx.sha256};
    return result;
}

std::vector<ScenarioResult> run_baseline_comparison(std::span<const PortfolioSpec> portfolios,
                                                    const RunSettings& settings,
                                                    const UniverseContext& ctx) {
    std::set<std::string> labels;
    for (const auto& p : portfolios) {
        if (!labels.insert(p.label).second) {
            throw Error(Errc::InvalidConfig, "duplicate portfolio label '" + p.label + "'");
        }
    }
    std::vector<ScenarioResult> out;
    for (const auto& p : portfolios) {
        out.push_back(run_scenario({p, {ModelMode::MultiFactor}, settings}, ctx));
    }
    return out;
}

ProbabilitySweep run_probability_sweep(std::span<const double> p_values, std::size_t n,
                                       const Affiliation& deal, const RunSettings& settings,
                                       const UniverseContext& ctx) {
    if (n < 1) {
        throw Error(Errc::InvalidConfig, "sweep portfolio size must be at least 1");
    }
    ProbabilitySweep sweep{n, deal, {}};
    for (const double p : p_values) {
        PortfolioSpec spec;
        spec.label = "homogeneous";
        for (std::size_t k = 0; k < n; ++k) {
            spec.deals.push_back({"deal-" + std::to_string(k + 1), p, deal});
        }
        const Portfolio portfolio = build_portfolio(spec, settings, ctx.universe);
        for (const ModelMode m : {ModelMode::Uncorrelated, ModelMode::MultiFactor}) {
            const ModeResult r = run_mode(portfolio, m, settings, ctx.universe);
            sweep.rows.push_back({p, m, r.stats, r.errors});
        }
    }
    return sweep;
}

SizeSweep run_size_sweep(std::span<const PortfolioSpec> compositions,
                         std::span<const std::size_t> sizes, const RunSettings& settings,
                         const UniverseContext& ctx, std::size_t replicates) {
    if (replicates < 1) {
        throw Error(Errc::InvalidConfig, "replicates must be at least 1");
    }
    SizeSweep sweep{replicates, {}};
    const std::uint64_t per_replicate = (settings.iterations + replicates - 1) / replicates;
    for (const auto& spec : compositions) {
        if (!spec.composition) {
            throw Error(Errc::InvalidConfig,
                        "size sweep entry '" + spec.label + "' needs a composition");
        }
        for (const std::size_t n : sizes) {
            PortfolioSpec sized = spec;
            sized.composition = spec.composition->resized(n);
            OutcomeDistribution pooled{std::vector<std::uint64_t>(n + 1, 0), 0, n, {}};
            std::vector<double> rep_mean;
            std::vector<double> rep_p0;
            for (std::size_t r = 0; r < replicates; ++r) {
                RunSettings rs = settings;
                rs.iterations = per_replicate;
                if (r > 0) {
                    rs.seed = derive_key(settings.seed, "replicate-" + std::to_string(r));
                }
                const Portfolio portfolio = build_portfolio(sized, rs, ctx.universe);
                const ModeResult m = run_mode(portfolio, ModelMode::MultiFactor, rs, ctx.universe);
                for (std::size_t u = 0; u <= n; ++u) pooled.counts[u] += m.distribution.counts[u];
                pooled.iterations += m.distribution.iterations;
                rep_mean.push_back(m.stats.expected_u);
                rep_p0.push_back(m.stats.p_u_eq_0);
            }
            const PortfolioStats s = distribution_stats(pooled);
            StatErrors e = standard_errors(pooled);
            if (replicates > 1) {
                // Between-replicate spread carries both the Monte Carlo noise
                // and the variation of the probability draws.
                e.expected_u = replicate_standard_error(rep_mean);
                e.p_u_eq_0 = replicate_standard_error(rep_p0);
            }
            sweep.rows.push_back({spec.label, n, s.expected_u, e.expected_u, s.p_u_eq_0, e.p_u_eq_0});
        }
    }
    return sweep;
}

DiversificationLimit run_diversification_limit(const RunSettings& settings,
                                               const UniverseContext& ctx) {
    RunSettings rs = settings;
    rs.rules = AssignmentRules::healthcare_high_growth();
    std::vector<PortfolioSpec> specs;
    for (const char* name : {"E", "F", "G"}) {
        PortfolioSpec p;
        p.label = name;
        p.composition = preset_composition(name);
        specs.push_back(std::move(p));
    }
    DiversificationLimit out;
    out.results = run_baseline_comparison(specs, rs, ctx);
    const double e = out.results[0].modes[0].stats.p_u_eq_0;
    const double f = out.results[1].modes[0].stats.p_u_eq_0;
    const double g = out.results[2].modes[0].stats.p_u_eq_0;
    out.ordering_holds = g < e && e < f;
    return out;
}

}  // namespace vcrisk
