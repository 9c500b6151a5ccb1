#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vcrisk {

namespace tolerance {
inline constexpr double kWeightSum = 1e-12;     // S + G + F == 1
inline constexpr double kSymmetry = 1e-12;      // sigma(i, j) == sigma(j, i), unit diagonal
inline constexpr double kNormalization = 1e-9;  // b' Sigma b == 1
inline constexpr double kDegenerate = 1e-12;    // r' Sigma r must exceed this
}  // namespace tolerance

enum class GroupKind { Sector, Geography, FounderType };

std::string_view to_string(GroupKind kind) noexcept;
GroupKind parse_group_kind(std::string_view text);

struct FactorGroup {
    std::string label;
    GroupKind kind;
};

// Ordered factor groups plus their correlation matrix. Symmetry, unit
// diagonal and the [-1, 1] range are checked on construction; positive
// semidefiniteness is left to cholesky()/ensure_psd().
class FactorUniverse {
public:
    FactorUniverse(std::vector<FactorGroup> groups, Eigen::MatrixXd sigma);

    std::size_t size() const noexcept { return groups_.size(); }
    const std::vector<FactorGroup>& groups() const noexcept { return groups_; }
    const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }

    std::optional<std::size_t> find(std::string_view label) const noexcept;

    /// Index of `label`, which must name a group of `kind`.
    /// Throws UnknownGroup / KindMismatch.
    std::size_t resolve(std::string_view label, GroupKind kind) const;

    std::vector<std::string> labels_of(GroupKind kind) const;

private:
    std::vector<FactorGroup> groups_;
    Eigen::MatrixXd sigma_;
};

struct KindWeights {
    double sector = 0.6;
    double geography = 0.3;
    double founder = 0.1;

    void validate() const;

    static KindWeights multi_factor() { return {0.6, 0.3, 0.1}; }
    static KindWeights sector_only() { return {1.0, 0.0, 0.0}; }

    friend bool operator==(const KindWeights&, const KindWeights&) = default;
};

/// One label per group kind.
struct Affiliation {
    std::string sector;
    std::string geography;
    std::string founder;

    friend bool operator==(const Affiliation&, const Affiliation&) = default;
};

struct Deal {
    std::string id;
    double p = 0.0;  // standalone success probability, in (0, 1)
    Affiliation affiliation;
};

struct Portfolio {
    std::string label;
    std::vector<Deal> deals;

    std::vector<Affiliation> affiliations() const;
    std::vector<double> probabilities() const;
};

/// Checks 0 < p < 1 for every deal and that each affiliation resolves.
void validate_portfolio(const Portfolio& portfolio, const FactorUniverse& universe);

/// Affiliation vector r: sqrt(S), sqrt(G), sqrt(F) at the deal's sector,
/// geography and founder-type indices, zero elsewhere.
Eigen::VectorXd build_affiliation(const Affiliation& deal, const KindWeights& weights,
                                  const FactorUniverse& universe);

/// b = r / sqrt(r' Sigma r). Throws DegenerateLoading when r' Sigma r <= 1e-12.
Eigen::VectorXd normalize_loading(const Eigen::VectorXd& r, const Eigen::MatrixXd& sigma);

/// rho_ij = w0^2 * b_i' Sigma b_j.
double pairwise_correlation(const Eigen::VectorXd& b_i, const Eigen::VectorXd& b_j, double w0,
                            const Eigen::MatrixXd& sigma);

struct Calibration {
    double w0 = 0.0;
    double rho_bar_prime = 0.0;  // mean b_i' Sigma b_j over distinct pairs
};

/// Mean of b_i' Sigma b_j over unordered distinct pairs of the universe.
double mean_pairwise_rho_prime(std::span<const Affiliation> calibration_universe,
                               const KindWeights& weights, const FactorUniverse& universe);

/// Chooses w0 so that the average pairwise deal correlation over
/// `calibration_universe` equals `target_rho`: w0 = sqrt(target / rho_bar').
/// Throws NonPositiveRhoBar, CalibrationInfeasible (w0^2 >= 1), OutOfRange.
Calibration calibrate_w0(const FactorUniverse& universe, const KindWeights& weights,
                         std::span<const Affiliation> calibration_universe, double target_rho);

/// One synthetic deal per (sector, geography, founder type) combination.
std::vector<Affiliation> cross_product_universe(const FactorUniverse& universe);

/// Phi^-1(1 - p); strictly decreasing in p. Throws OutOfRange outside (0, 1).
double exceedance_threshold(double p);

// Normalized loadings for one portfolio plus the global scale. Final loadings
// are w_i = w0 * b_i and are never stored.
class LoadingSet {
public:
    LoadingSet(std::vector<Eigen::VectorXd> normalized, Calibration calibration,
               KindWeights weights);

    static LoadingSet build(std::span<const Affiliation> deals, const KindWeights& weights,
                            const FactorUniverse& universe, const Calibration& calibration);

    std::size_t size() const noexcept { return normalized_.size(); }
    const Eigen::VectorXd& normalized(std::size_t i) const { return normalized_.at(i); }
    Eigen::VectorXd loading(std::size_t i) const { return calibration_.w0 * normalized_.at(i); }
    double w0() const noexcept { return calibration_.w0; }
    double rho_bar_prime() const noexcept { return calibration_.rho_bar_prime; }
    const KindWeights& weights() const noexcept { return weights_; }

private:
    std::vector<Eigen::VectorXd> normalized_;
    Calibration calibration_;
    KindWeights weights_;
};

}  // namespace vcrisk
