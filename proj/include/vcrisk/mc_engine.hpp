#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vcrisk/factor_model.hpp"
#include "vcrisk/random.hpp"

namespace vcrisk {

namespace tolerance {
inline constexpr double kNotPsdPivot = -1e-10;     // cholesky pivot below this => NotPSD
inline constexpr double kZeroPivot = 1e-12;        // pivots at or below this give a zero column
inline constexpr double kIdiosyncraticClamp = 1e-12;
}  // namespace tolerance

struct CholeskyFactor {
    Eigen::MatrixXd lower;
};

/// Lower-triangular L with L L' = sigma. Singular PSD input is handled by
/// zeroing columns whose pivot is numerically zero. Throws NotPSD when a pivot
/// drops below -1e-10.
CholeskyFactor cholesky(const Eigen::MatrixXd& sigma);

/// Z = L X, X drawn i.i.d. standard normal from `stream`.
Eigen::VectorXd sample_factors(const CholeskyFactor& factor, RandomStream& stream);

enum class ModelMode { Uncorrelated, SingleFactorSector, MultiFactor };

std::string_view to_string(ModelMode mode) noexcept;
ModelMode parse_model_mode(std::string_view text);

/// Kind weights a mode builds its loadings with: sector-only for
/// SingleFactorSector, `multi` otherwise.
KindWeights weights_for(ModelMode mode, const KindWeights& multi);

struct SimConfig {
    std::uint64_t iterations = 1'000'000;
    std::uint64_t seed = 42;
    ModelMode mode = ModelMode::MultiFactor;
    // Worker threads; 0 picks hardware concurrency. Never affects results.
    unsigned threads = 0;
};

struct OutcomeDistribution {
    std::vector<std::uint64_t> counts;          // counts[u] = iterations with U == u
    std::uint64_t iterations = 0;
    std::size_t portfolio_size = 0;
    std::vector<std::uint64_t> deal_successes;  // per-deal success tallies
};

struct PortfolioStats {
    double expected_u = 0.0;
    double p_u_eq_0 = 0.0;
    double p_u_le_1 = 0.0;
    double p_u_le_2 = 0.0;
    // nullopt when no iteration reached the conditioning threshold.
    std::optional<double> e_u_given_ge_1;
    std::optional<double> e_u_given_ge_2;
    std::optional<double> e_u_given_ge_3;
};

/// Monte Carlo standard errors of the headline statistics.
struct StatErrors {
    double expected_u = 0.0;
    double p_u_eq_0 = 0.0;
    double p_u_le_1 = 0.0;
    double p_u_le_2 = 0.0;
};

/// Runs config.iterations draws of the latent-factor model. Iteration i takes
/// its randomness from RandomStream(derive_key(seed, "simulate"), i): factor
/// normals first, then one normal per deal (one uniform per deal in
/// Uncorrelated mode). The histogram is therefore identical for any thread
/// count. `loadings` is ignored in Uncorrelated mode.
OutcomeDistribution simulate(const Portfolio& portfolio, const LoadingSet& loadings,
                             const FactorUniverse& universe, const SimConfig& config);

PortfolioStats distribution_stats(const OutcomeDistribution& dist);
StatErrors standard_errors(const OutcomeDistribution& dist);

/// Empirical CDF P(U <= k) for k = 0..N.
std::vector<double> empirical_cdf(const OutcomeDistribution& dist);

}  // namespace vcrisk
