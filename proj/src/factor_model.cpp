#include "vcrisk/factor_model.hpp"

#include <cmath>
#include <sstream>

#include "vcrisk/error.hpp"
#include "vcrisk/normal.hpp"

namespace vcrisk {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::UnknownGroup: return "UnknownGroup";
        case Errc::KindMismatch: return "KindMismatch";
        case Errc::DegenerateLoading: return "DegenerateLoading";
        case Errc::CalibrationInfeasible: return "CalibrationInfeasible";
        case Errc::NonPositiveRhoBar: return "NonPositiveRhoBar";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::NotPSD: return "NotPSD";
        case Errc::InvalidLoading: return "InvalidLoading";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::ParseError: return "ParseError";
        case Errc::NonPositivePrice: return "NonPositivePrice";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::MissingTicker: return "MissingTicker";
        case Errc::ZeroVariance: return "ZeroVariance";
        case Errc::InvalidComposition: return "InvalidComposition";
        case Errc::InvalidRules: return "InvalidRules";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

std::string_view to_string(GroupKind kind) noexcept {
    switch (kind) {
        case GroupKind::Sector: return "sector";
        case GroupKind::Geography: return "geography";
        case GroupKind::FounderType: return "founder";
    }
    return "unknown";
}

GroupKind parse_group_kind(std::string_view text) {
    if (text == "sector") return GroupKind::Sector;
    if (text == "geography") return GroupKind::Geography;
    if (text == "founder") return GroupKind::FounderType;
    throw Error(Errc::ParseError, "unknown group kind '" + std::string(text) +
                                      "' (expected sector, geography or founder)");
}

FactorUniverse::FactorUniverse(std::vector<FactorGroup> groups, Eigen::MatrixXd sigma)
    : groups_(std::move(groups)), sigma_(std::move(sigma)) {
    const auto n = static_cast<Eigen::Index>(groups_.size());
    if (sigma_.rows() != n || sigma_.cols() != n) {
        throw Error(Errc::DimensionMismatch, "correlation matrix is " +
                                                 std::to_string(sigma_.rows()) + "x" +
                                                 std::to_string(sigma_.cols()) + " but " +
                                                 std::to_string(n) + " groups were given");
    }
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (groups_[i].label == groups_[j].label) {
                throw Error(Errc::InvalidConfig, "duplicate group label '" + groups_[i].label + "'");
            }
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(sigma_(i, i) - 1.0) > tolerance::kSymmetry) {
            throw Error(Errc::InvalidConfig, "correlation diagonal for '" + groups_[i].label +
                                                 "' is not 1");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = sigma_(i, j);
            if (!std::isfinite(v) || v < -1.0 - tolerance::kSymmetry ||
                v > 1.0 + tolerance::kSymmetry) {
                throw Error(Errc::InvalidConfig, "correlation entry out of [-1, 1]");
            }
            if (std::abs(v - sigma_(j, i)) > tolerance::kSymmetry) {
                throw Error(Errc::InvalidConfig, "correlation matrix is not symmetric");
            }
        }
    }
}

std::optional<std::size_t> FactorUniverse::find(std::string_view label) const noexcept {
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        if (groups_[i].label == label) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t FactorUniverse::resolve(std::string_view label, GroupKind kind) const {
    const auto idx = find(label);
    if (!idx) {
        throw Error(Errc::UnknownGroup, "unknown " + std::string(to_string(kind)) + " group '" +
                                            std::string(label) + "'");
    }
    if (groups_[*idx].kind != kind) {
        throw Error(Errc::KindMismatch, "group '" + std::string(label) + "' is a " +
                                            std::string(to_string(groups_[*idx].kind)) +
                                            " group, expected " + std::string(to_string(kind)));
    }
    return *idx;
}

std::vector<std::string> FactorUniverse::labels_of(GroupKind kind) const {
    std::vector<std::string> out;
    for (const auto& g : groups_) {
        if (g.kind == kind) {
            out.push_back(g.label);
        }
    }
    return out;
}

void KindWeights::validate() const {
    if (sector < 0.0 || geography < 0.0 || founder < 0.0) {
        throw Error(Errc::InvalidConfig, "kind weights must be nonnegative");
    }
    if (std::abs(sector + geography + founder - 1.0) > tolerance::kWeightSum) {
        std::ostringstream os;
        os << "kind weights must sum to 1, got " << sector + geography + founder;
        throw Error(Errc::InvalidConfig, os.str());
    }
}

std::vector<Affiliation> Portfolio::affiliations() const {
    std::vector<Affiliation> out;
    out.reserve(deals.size());
    for (const auto& d : deals) {
        out.push_back(d.affiliation);
    }
    return out;
}

std::vector<double> Portfolio::probabilities() const {
    std::vector<double> out;
    out.reserve(deals.size());
    for (const auto& d : deals) {
        out.push_back(d.p);
    }
    return out;
}

void validate_portfolio(const Portfolio& portfolio, const FactorUniverse& universe) {
    if (portfolio.deals.empty()) {
        throw Error(Errc::InvalidConfig, "portfolio '" + portfolio.label + "' has no deals");
    }
    const bool has_geo = !universe.labels_of(GroupKind::Geography).empty();
    const bool has_founder = !universe.labels_of(GroupKind::FounderType).empty();
    for (const auto& d : portfolio.deals) {
        if (!(d.p > 0.0 && d.p < 1.0)) {
            throw Error(Errc::OutOfRange, "deal '" + d.id + "' probability must lie in (0, 1)");
        }
        universe.resolve(d.affiliation.sector, GroupKind::Sector);
        if (has_geo) universe.resolve(d.affiliation.geography, GroupKind::Geography);
        if (has_founder) universe.resolve(d.affiliation.founder, GroupKind::FounderType);
    }
}

Eigen::VectorXd build_affiliation(const Affiliation& deal, const KindWeights& weights,
                                  const FactorUniverse& universe) {
    weights.validate();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(universe.size()));
    // Kinds with zero weight contribute nothing, so the universe need not carry them.
    const auto place = [&](const std::string& label, GroupKind kind, double weight) {
        if (weight > 0.0) {
            r(static_cast<Eigen::Index>(universe.resolve(label, kind))) = std::sqrt(weight);
        }
    };
    place(deal.sector, GroupKind::Sector, weights.sector);
    place(deal.geography, GroupKind::Geography, weights.geography);
    place(deal.founder, GroupKind::FounderType, weights.founder);
    return r;
}

Eigen::VectorXd normalize_loading(const Eigen::VectorXd& r, const Eigen::MatrixXd& sigma) {
    if (r.size() != sigma.rows() || sigma.rows() != sigma.cols()) {
        throw Error(Errc::DimensionMismatch, "affiliation vector does not match correlation matrix");
    }
    const double q = r.dot(sigma * r);
    if (!(q > tolerance::kDegenerate)) {
        throw Error(Errc::DegenerateLoading,
                    "affiliation vector has no variance under the correlation matrix");
    }
    return r / std::sqrt(q);
}

double pairwise_correlation(const Eigen::VectorXd& b_i, const Eigen::VectorXd& b_j, double w0,
                            const Eigen::MatrixXd& sigma) {
    if (b_i.size() != sigma.rows() || b_j.size() != sigma.rows()) {
        throw Error(Errc::DimensionMismatch, "loading vector does not match correlation matrix");
    }
    // Evaluate symmetrically so rho(i, j) == rho(j, i) bit for bit.
    const double a = b_i.dot(sigma * b_j);
    const double b = b_j.dot(sigma * b_i);
    return w0 * w0 * 0.5 * (a + b);
}

double mean_pairwise_rho_prime(std::span<const Affiliation> calibration_universe,
                               const KindWeights& weights, const FactorUniverse& universe) {
    const std::size_t n = calibration_universe.size();
    if (n < 2) {
        throw Error(Errc::InvalidConfig, "calibration universe needs at least two members");
    }
    const Eigen::MatrixXd& sigma = universe.sigma();
    std::vector<Eigen::VectorXd> sb;  // Sigma * b_i
    std::vector<Eigen::VectorXd> b;
    sb.reserve(n);
    b.reserve(n);
    for (const auto& a : calibration_universe) {
        b.push_back(normalize_loading(build_affiliation(a, weights, universe), sigma));
        sb.push_back(sigma * b.back());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sum += b[i].dot(sb[j]);
        }
    }
    return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

Calibration calibrate_w0(const FactorUniverse& universe, const KindWeights& weights,
                         std::span<const Affiliation> calibration_universe, double target_rho) {
    if (!(target_rho >= 0.0 && target_rho < 1.0)) {
        throw Error(Errc::OutOfRange, "target correlation must lie in [0, 1)");
    }
    const double rho_bar = mean_pairwise_rho_prime(calibration_universe, weights, universe);
    if (!(rho_bar > 0.0)) {
        std::ostringstream os;
        os << "mean normalized pair correlation is " << rho_bar << "; cannot calibrate w0";
        throw Error(Errc::NonPositiveRhoBar, os.str());
    }
    const double w0_sq = target_rho / rho_bar;
    if (!(w0_sq < 1.0)) {
        std::ostringstream os;
        os << "target correlation " << target_rho << " needs w0^2 = " << w0_sq
           << " >= 1 (mean normalized pair correlation " << rho_bar << ")";
        throw Error(Errc::CalibrationInfeasible, os.str());
    }
    return {std::sqrt(w0_sq), rho_bar};
}

std::vector<Affiliation> cross_product_universe(const FactorUniverse& universe) {
    const auto sectors = universe.labels_of(GroupKind::Sector);
    auto geos = universe.labels_of(GroupKind::Geography);
    auto founders = universe.labels_of(GroupKind::FounderType);
    if (geos.empty()) geos.emplace_back();
    if (founders.empty()) founders.emplace_back();
    std::vector<Affiliation> out;
    out.reserve(sectors.size() * geos.size() * founders.size());
    for (const auto& s : sectors) {
        for (const auto& g : geos) {
            for (const auto& f : founders) {
                out.push_back({s, g, f});
            }
        }
    }
    return out;
}

double exceedance_threshold(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(Errc::OutOfRange, "success probability must lie in (0, 1), got " +
                                          std::to_string(p));
    }
    // Phi^-1(1 - p) == -Phi^-1(p), without rounding 1 - p for small p.
    return -normal_quantile(p);
}

LoadingSet::LoadingSet(std::vector<Eigen::VectorXd> normalized, Calibration calibration,
                       KindWeights weights)
    : normalized_(std::move(normalized)), calibration_(calibration), weights_(weights) {
    if (!(calibration_.w0 >= 0.0) || !(calibration_.w0 * calibration_.w0 < 1.0)) {
        throw Error(Errc::CalibrationInfeasible, "loading scale must satisfy 0 <= w0 and w0^2 < 1");
    }
}

LoadingSet LoadingSet::build(std::span<const Affiliation> deals, const KindWeights& weights,
                             const FactorUniverse& universe, const Calibration& calibration) {
    std::vector<Eigen::VectorXd> b;
    b.reserve(deals.size());
    for (const auto& a : deals) {
        b.push_back(normalize_loading(build_affiliation(a, weights, universe), universe.sigma()));
    }
    return LoadingSet(std::move(b), calibration, weights);
}

}  // namespace vcrisk
