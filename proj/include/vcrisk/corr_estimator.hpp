#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vcrisk/factor_model.hpp"

namespace vcrisk {

// Month-end prices. Missing cells are stored as NaN and removed later by
// complete-case alignment; every present price is strictly positive.
struct PriceTable {
    std::vector<std::string> dates;  // ISO-8601, strictly increasing
    std::vector<std::string> tickers;
    std::map<std::string, std::vector<double>> series;
};

/// Log returns per ticker; returns[t] covers (dates[t], dates[t + 1]].
struct TickerReturns {
    std::vector<std::string> dates;  // period-end dates
    std::map<std::string, std::vector<double>> series;
};

struct BasketSpec {
    std::string label;
    GroupKind kind = GroupKind::Sector;
    std::vector<std::string> tickers;
};

struct ReturnsTable {
    std::vector<std::string> dates;
    std::vector<FactorGroup> groups;
    Eigen::MatrixXd returns;  // rows: periods, cols: groups
};

PriceTable parse_prices(std::string_view csv_text);
PriceTable load_prices(const std::filesystem::path& path);

/// r_t = ln(P_t / P_{t-1}). Throws InsufficientData with fewer than 2 dates.
TickerReturns log_returns(const PriceTable& prices);

/// Basket manifest JSON: {"AI": {"kind": "sector", "tickers": ["XYZ"]}, ...},
/// optionally wrapped in {"groups": {...}}. Groups keep file order; keys
/// starting with '_' are skipped.
std::vector<BasketSpec> parse_baskets(std::string_view json_text);
std::vector<BasketSpec> load_baskets(const std::filesystem::path& path);
void validate_baskets(const std::vector<BasketSpec>& baskets);

/// Equal-weight mean of member log returns per period; periods where any
/// member is missing are dropped. Throws MissingTicker.
ReturnsTable aggregate_baskets(const TickerReturns& returns, const std::vector<BasketSpec>& baskets);

/// Sample Pearson correlation; exact unit diagonal and symmetry.
/// Throws InsufficientData (< 3 rows) and ZeroVariance naming the group.
Eigen::MatrixXd estimate_correlation(const ReturnsTable& table);

struct PsdRepair {
    Eigen::MatrixXd matrix;
    bool repaired = false;
    double min_eigenvalue_before = 0.0;
    double max_abs_change = 0.0;
};

/// Leaves the matrix untouched when its smallest eigenvalue is >= eps;
/// otherwise clips eigenvalues at eps, reassembles, and rescales to unit
/// diagonal.
PsdRepair ensure_psd(const Eigen::MatrixXd& sigma, double eps = 1e-10);

struct CorrelationEstimate {
    FactorUniverse universe;
    PsdRepair repair;
    std::size_t observations = 0;
};

/// load -> returns -> aggregate -> estimate -> ensure_psd.
CorrelationEstimate estimate_universe(const PriceTable& prices,
                                      const std::vector<BasketSpec>& baskets, double eps = 1e-10);

}  // namespace vcrisk
