#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vcrisk/scenario.hpp"

// JSON documents shared by the CLI, the service and the UI. Layouts are
// described in docs/schemas.md. Objects are std::map-backed, so dumps have
// sorted keys and are byte-stable.
namespace vcrisk::report {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kEngineVersion = "1.0.0";

// --- domain <-> JSON ---------------------------------------------------------

json to_json(const Composition& c);
Composition composition_from_json(const json& j);

json to_json(const AssignmentRules& r);
AssignmentRules rules_from_json(const json& j);

json to_json(const KindWeights& w);
json to_json(const Affiliation& a);
Affiliation affiliation_from_json(const json& j);
json to_json(const Deal& d);
/// "id" is optional; portfolios number unnamed deals deal-1, deal-2, ...
Deal deal_from_json(const json& j);

json to_json(const OutcomeDistribution& d);
json to_json(const PortfolioStats& s);
json to_json(const StatErrors& e);
json to_json(const ModeResult& r);

/// Settings keys at the top level of a request document: "seed",
/// "iterations", "kind_weights", "calibration", "rules". Absent keys keep the
/// values in `defaults`. Thread count is never part of a document.
RunSettings settings_from_json(const json& j, const RunSettings& defaults);
json settings_to_json(const RunSettings& s);

/// {"label", one of "preset" | "composition" | "deals" | "homogeneous",
///  optional "homogeneous_p", optional "rules"}
PortfolioSpec portfolio_from_json(const json& j);
json to_json(const PortfolioSpec& p);

/// {"portfolio": {...}, "modes": [...], settings...}
ScenarioSpec scenario_from_json(const json& j, const RunSettings& defaults);
json to_json(const ScenarioSpec& s);

struct ScenarioSet {
    std::vector<PortfolioSpec> portfolios;
    RunSettings settings;
};

/// {"portfolios": [...], settings...}; labels must be unique.
ScenarioSet scenario_set_from_json(const json& j, const RunSettings& defaults);
json to_json(const ScenarioSet& s);

enum class SweepType { Probability, Size };

struct SweepSpec {
    SweepType type = SweepType::Probability;
    RunSettings settings;
    std::vector<double> p_values;            // probability sweep
    std::size_t size = 40;                   // probability sweep
    Affiliation deal{"AI", "CA", "Repeat"};  // probability sweep
    std::vector<PortfolioSpec> portfolios;   // size sweep
    std::vector<std::size_t> sizes = kDefaultSweepSizes;
    std::size_t replicates = 1;
};

SweepSpec sweep_from_json(const json& j, const RunSettings& defaults);
json to_json(const SweepSpec& s);

/// Parses text, turning JSON syntax errors into Error(ParseError).
json parse_document(std::string_view text, std::string_view what);
json load_document(const std::filesystem::path& path);

// --- manifests and reports ---------------------------------------------------

struct InputRef {
    std::string role;  // "sigma", "request", "prices", ...
    std::string path;  // where it was read from; empty for request bodies
    std::string sha256;
};

struct RunManifest {
    std::string command;  // "simulate", "compare", "sweep", ...
    std::vector<InputRef> inputs;
    std::uint64_t seed = 0;
    std::uint64_t iterations = 0;
    std::vector<std::string> modes;
    std::vector<std::string> outputs;
    std::string engine_version{kEngineVersion};
    json request;  // effective request document after overrides

    /// SHA-256 over command, input hashes, seed, M, modes, engine version and
    /// request. Paths and outputs are left out: they do not affect results.
    std::string id() const;
};

json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);

/// Σ loaded from disk together with its provenance.
UniverseContext load_context(const std::filesystem::path& sigma_csv);

/// Manifest skeleton: command, the Σ input, the request hash and document.
RunManifest make_manifest(std::string_view command, const UniverseContext& ctx,
                          const json& request, const RunSettings& settings,
                          std::vector<std::string> modes);

json simulate_report(const ScenarioResult& result, const RunManifest& manifest);
json compare_report(const std::vector<ScenarioResult>& results, const RunManifest& manifest);
json sweep_report(const ProbabilitySweep& sweep, const RunManifest& manifest);
json sweep_report(const SizeSweep& sweep, const RunManifest& manifest);

/// label,mode,x,statistic,value,std_error rows for external plotting.
std::string sweep_csv(const ProbabilitySweep& sweep);
std::string sweep_csv(const SizeSweep& sweep);

/// One row per portfolio with the six tail/upside statistics: probabilities
/// as one-decimal percents, conditional means to two decimals, undefined
/// values as an em dash. Uses the first mode of each result.
std::string compare_table_text(const std::vector<ScenarioResult>& results);

std::string format_percent(double p);
std::string format_mean(const std::optional<double>& v);

/// Two-space indent plus trailing newline.
std::string dump(const json& j);

/// {"error": {"code": ..., "message": ...}}
json error_body(std::string_view code, std::string_view message);

}  // namespace vcrisk::report
