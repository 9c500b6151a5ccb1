#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vcrisk/factor_model.hpp"
#include "vcrisk/mc_engine.hpp"
#include "vcrisk/prob_assigner.hpp"
#include "vcrisk/random.hpp"

namespace vcrisk {

using Mix = std::map<std::string, double>;

struct Composition {
    std::size_t size = 0;
    Mix founder_mix;
    Mix sector_mix;
    Mix geography_mix;

    /// Each mix nonnegative and summing to 1 within 1e-9; size >= 1.
    /// Throws InvalidComposition naming the offending mix.
    void validate() const;

    Composition resized(std::size_t n) const;
};

/// Apportions n slots across a mix: floor of n * fraction, then the leftover
/// slots go to the largest remainders (ties broken by label order). Counts
/// always sum to n.
std::vector<std::pair<std::string, std::size_t>> largest_remainder(const Mix& mix, std::size_t n);

/// Turns fractions into per-deal affiliations. Each attribute kind is laid out
/// by largest-remainder counts and then shuffled independently (substreams 0,
/// 1, 2 of `stream` for founder, sector, geography).
std::vector<Affiliation> realize_portfolio(const Composition& comp, const RandomStream& stream);

/// Preset compositions at N = 40: "A".."D" baseline portfolios and "E".."G"
/// sector variants on D's founder/geography base.
Composition preset_composition(std::string_view name);
std::vector<std::string> preset_names();

enum class CalibrationSource { CrossProduct, Portfolio, Explicit };

std::string_view to_string(CalibrationSource source) noexcept;
CalibrationSource parse_calibration_source(std::string_view text);

struct CalibrationSpec {
    CalibrationSource source = CalibrationSource::CrossProduct;
    std::vector<Affiliation> members;  // used when source == Explicit
    double target_rho = 0.12;
    std::optional<double> fixed_w0;    // bypasses calibration entirely
};

struct RunSettings {
    std::uint64_t seed = 42;
    std::uint64_t iterations = 1'000'000;
    unsigned threads = 0;
    KindWeights weights = KindWeights::multi_factor();
    CalibrationSpec calibration;
    AssignmentRules rules = AssignmentRules::defaults();
};

// How a portfolio is obtained: explicit deals, or a composition realized with
// seeded shuffles and either rule-assigned or homogeneous probabilities.
struct PortfolioSpec {
    std::string label;
    std::optional<Composition> composition;
    std::vector<Deal> deals;
    std::optional<double> homogeneous_p;
    std::optional<AssignmentRules> rules;  // per-portfolio override
};

struct ScenarioSpec {
    PortfolioSpec portfolio;
    std::vector<ModelMode> modes = {ModelMode::MultiFactor};
    RunSettings settings;
};

struct UniverseContext {
    FactorUniverse universe;
    std::string source;  // where sigma came from (path or "builtin")
    std::string sha256;  // of the sigma CSV bytes
};

struct Provenance {
    std::uint64_t seed = 0;
    std::uint64_t iterations = 0;
    std::string sigma_source;
    std::string sigma_sha256;
};

struct ModeResult {
    ModelMode mode = ModelMode::MultiFactor;
    Calibration calibration;
    OutcomeDistribution distribution;
    PortfolioStats stats;
    StatErrors errors;
};

struct ScenarioResult {
    std::string label;
    std::vector<Deal> deals;
    std::vector<ModeResult> modes;
    Provenance provenance;

    const ModeResult& mode(ModelMode m) const;
};

/// Realizes and prices the portfolio. Shuffles use derive_key(seed,
/// "realize"), probability draws derive_key(seed, "assign").
Portfolio build_portfolio(const PortfolioSpec& spec, const RunSettings& settings,
                          const FactorUniverse& universe);

/// w0 for one mode, honoring fixed_w0 and the calibration source.
Calibration calibrate_for_mode(const Portfolio& portfolio, ModelMode mode,
                               const RunSettings& settings, const FactorUniverse& universe);

ModeResult run_mode(const Portfolio& portfolio, ModelMode mode, const RunSettings& settings,
                    const FactorUniverse& universe);

ScenarioResult run_scenario(const ScenarioSpec& spec, const UniverseContext& ctx);

/// Multi-factor run of every portfolio; labels must be unique.
std::vector<ScenarioResult> run_baseline_comparison(std::span<const PortfolioSpec> portfolios,
                                                    const RunSettings& settings,
                                                    const UniverseContext& ctx);

struct ProbabilitySweepRow {
    double p = 0.0;
    ModelMode mode = ModelMode::Uncorrelated;
    PortfolioStats stats;
    StatErrors errors;
};

struct ProbabilitySweep {
    std::size_t size = 0;
    Affiliation deal;
    std::vector<ProbabilitySweepRow> rows;
};

/// n identical deals with affiliation `deal` at each p, run in Uncorrelated
/// and MultiFactor modes.
ProbabilitySweep run_probability_sweep(std::span<const double> p_values, std::size_t n,
                                       const Affiliation& deal, const RunSettings& settings,
                                       const UniverseContext& ctx);

struct SizeSweepRow {
    std::string label;
    std::size_t size = 0;
    double expected_u = 0.0;
    double expected_u_se = 0.0;
    double p_u_eq_0 = 0.0;
    double p_u_eq_0_se = 0.0;
};

struct SizeSweep {
    std::size_t replicates = 1;
    std::vector<SizeSweepRow> rows;
};

inline const std::vector<std::size_t> kDefaultSweepSizes = {5, 10, 15, 20, 25, 30, 35, 40};

/// For each composition and size: rescale, realize, assign, simulate in
/// MultiFactor mode. With replicates > 1 the statistic is pooled over that
/// many independent realizations/assignments (iterations split evenly), i.e.
/// averaged over the synthetic-probability draw, and the standard errors are
/// the between-replicate ones.
SizeSweep run_size_sweep(std::span<const PortfolioSpec> compositions,
                         std::span<const std::size_t> sizes, const RunSettings& settings,
                         const UniverseContext& ctx, std::size_t replicates = 1);

struct DiversificationLimit {
    std::vector<ScenarioResult> results;  // E, F, G
    bool ordering_holds = false;          // P(U=0): G < E < F
};

/// Portfolios E/F/G with healthcare treated as high-growth.
DiversificationLimit run_diversification_limit(const RunSettings& settings,
                                               const UniverseContext& ctx);

}  // namespace vcrisk
