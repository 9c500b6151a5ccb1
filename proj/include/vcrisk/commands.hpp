#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vcrisk/report.hpp"
#include "vcrisk/scenario.hpp"

// The pipeline behind each CLI subcommand, shared with the HTTP service so
// both emit the same bytes for the same request.
namespace vcrisk::commands {

using report::json;

struct Options {
    std::optional<std::uint64_t> iterations;  // flag overrides of the document
    std::optional<std::uint64_t> seed;
    std::vector<ModelMode> modes;             // simulate only
    unsigned threads = 0;
    std::uint64_t max_iterations = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::string> outputs;         // recorded in the manifest
};

json simulate(const json& doc, const UniverseContext& ctx, const RunSettings& defaults,
              const Options& options);

json compare(const json& doc, const UniverseContext& ctx, const RunSettings& defaults,
             const Options& options);

struct SweepOutput {
    json report;
    std::string csv;
};

SweepOutput sweep(const json& doc, const UniverseContext& ctx, const RunSettings& defaults,
                  const Options& options);

struct EstimateOutput {
    json report;  // repair summary plus manifest
    std::string sigma_csv;
    std::string kinds_csv;
};

EstimateOutput estimate_corr(const std::filesystem::path& prices,
                             const std::filesystem::path& baskets, double eps,
                             std::vector<std::string> outputs);

/// Re-runs the command recorded in a manifest (or in a report's "manifest")
/// and returns the regenerated report. Input files are re-read from the
/// recorded paths and must still match their recorded hashes.
json replay(const json& report_or_manifest, unsigned threads);

}  // namespace vcrisk::commands
