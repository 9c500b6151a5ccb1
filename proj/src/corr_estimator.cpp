#include "vcrisk/corr_estimator.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "vcrisk/csv.hpp"
#include "vcrisk/error.hpp"

namespace vcrisk {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == 4 || i == 7) continue;
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool is_missing_cell(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

std::string where(std::size_t row, const std::string& column) {
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace

PriceTable parse_prices(std::string_view csv_text) {
    const auto rows = csv::lines(csv_text);
    if (rows.empty()) {
        throw Error(Errc::ParseError, "price file is empty: missing required 'date' column");
    }
    const auto header = csv::split_line(rows[0]);
    const auto date_it = std::find(header.begin(), header.end(), "date");
    if (date_it == header.end()) {
        throw Error(Errc::ParseError, "price file header lacks the required 'date' column");
    }
    const auto date_col = static_cast<std::size_t>(date_it - header.begin());

    PriceTable table;
    std::set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == date_col) continue;
        if (header[c].empty() || !seen.insert(header[c]).second) {
            throw Error(Errc::ParseError, "price header has an empty or duplicate ticker '" +
                                              header[c] + "'");
        }
        table.tickers.push_back(header[c]);
    }

    struct Row {
        std::string date;
        std::vector<double> values;
    };
    std::vector<Row> parsed;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].empty()) continue;
        const auto cells = csv::split_line(rows[r]);
        const std::size_t line = r + 1;
        if (cells.size() != header.size()) {
            throw Error(Errc::ParseError, "row " + std::to_string(line) + " has " +
                                              std::to_string(cells.size()) + " cells, expected " +
                                              std::to_string(header.size()));
        }
        Row row;
        row.date = cells[date_col];
        if (!is_iso_date(row.date)) {
            throw Error(Errc::ParseError,
                        where(line, "date") + ": '" + row.date + "' is not an ISO-8601 date");
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == date_col) continue;
            const std::string& cell = cells[c];
            if (is_missing_cell(cell)) {
                row.values.push_back(kMissing);
                continue;
            }
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
                throw Error(Errc::ParseError,
                            where(line, header[c]) + ": '" + cell + "' is not a number");
            }
            if (!(v > 0.0)) {
                throw Error(Errc::NonPositivePrice,
                            where(line, header[c]) + ": price " + cell + " is not positive");
            }
            row.values.push_back(v);
        }
        parsed.push_back(std::move(row));
    }
    std::stable_sort(parsed.begin(), parsed.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < parsed.size(); ++i) {
        if (parsed[i].date == parsed[i - 1].date) {
            throw Error(Errc::ParseError, "duplicate date " + parsed[i].date);
        }
    }
    for (const auto& t : table.tickers) {
        table.series[t].reserve(parsed.size());
    }
    for (const auto& row : parsed) {
        table.dates.push_back(row.date);
        for (std::size_t c = 0; c < table.tickers.size(); ++c) {
            table.series[table.tickers[c]].push_back(row.values[c]);
        }
    }
    return table;
}

PriceTable load_prices(const std::filesystem::path& path) {
    return parse_prices(csv::read_file(path));
}

TickerReturns log_returns(const PriceTable& prices) {
    if (prices.dates.size() < 2) {
        throw Error(Errc::InsufficientData, "need at least two dates to form a return");
    }
    TickerReturns out;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    for (const auto& [ticker, p] : prices.series) {
        std::vector<double> r;
        r.reserve(p.size() - 1);
        for (std::size_t t = 1; t < p.size(); ++t) {
            // NaN endpoints propagate as missing.
            r.push_back(std::log(p[t] / p[t - 1]));
        }
        out.series.emplace(ticker, std::move(r));
    }
    return out;
}

void validate_baskets(const std::vector<BasketSpec>& baskets) {
    std::set<std::string> labels;
    for (const auto& b : baskets) {
        if (!labels.insert(b.label).second) {
            throw Error(Errc::InvalidConfig, "duplicate basket label '" + b.label + "'");
        }
        if (b.tickers.empty()) {
            throw Error(Errc::InvalidConfig, "basket '" + b.label + "' has no tickers");
        }
        if (b.kind == GroupKind::Sector && b.tickers.size() != 1) {
            throw Error(Errc::InvalidConfig,
                        "sector group '" + b.label + "' must map to exactly one ETF ticker");
        }
    }
}

std::vector<BasketSpec> parse_baskets(std::string_view json_text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::ParseError, std::string("basket manifest: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(Errc::ParseError, "basket manifest must be a JSON object");
    }
    const nlohmann::ordered_json* groups = &doc;
    if (doc.contains("groups")) {
        groups = &doc.at("groups");
    }
    std::vector<BasketSpec> out;
    try {
        for (const auto& [label, spec] : groups->items()) {
            if (label.starts_with('_')) continue;  // comments
            BasketSpec b;
            b.label = label;
            b.kind = parse_group_kind(spec.at("kind").get<std::string>());
            b.tickers = spec.at("tickers").get<std::vector<std::string>>();
            out.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("basket manifest: ") + e.what());
    }
    validate_baskets(out);
    return out;
}

std::vector<BasketSpec> load_baskets(const std::filesystem::path& path) {
    return parse_baskets(csv::read_file(path));
}

ReturnsTable aggregate_baskets(const TickerReturns& returns,
                               const std::vector<BasketSpec>& baskets) {
    validate_baskets(baskets);
    for (const auto& b : baskets) {
        for (const auto& t : b.tickers) {
            if (!returns.series.contains(t)) {
                throw Error(Errc::MissingTicker,
                            "basket '" + b.label + "' references absent ticker '" + t + "'");
            }
        }
    }
    const std::size_t periods = returns.dates.size();
    std::vector<std::size_t> keep;
    for (std::size_t t = 0; t < periods; ++t) {
        bool complete = true;
        for (const auto& b : baskets) {
            for (const auto& tk : b.tickers) {
                complete = complete && std::isfinite(returns.series.at(tk)[t]);
            }
        }
        if (complete) keep.push_back(t);
    }
    ReturnsTable table;
    table.returns.resize(static_cast<Eigen::Index>(keep.size()),
                         static_cast<Eigen::Index>(baskets.size()));
    for (std::size_t row = 0; row < keep.size(); ++row) {
        table.dates.push_back(returns.dates[keep[row]]);
    }
    for (std::size_t g = 0; g < baskets.size(); ++g) {
        table.groups.push_back({baskets[g].label, baskets[g].kind});
        for (std::size_t row = 0; row < keep.size(); ++row) {
            double sum = 0.0;
            for (const auto& tk : baskets[g].tickers) {
                sum += returns.series.at(tk)[keep[row]];
            }
            table.returns(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(g)) =
                sum / static_cast<double>(baskets[g].tickers.size());
        }
    }
    return table;
}

Eigen::MatrixXd estimate_correlation(const ReturnsTable& table) {
    const Eigen::Index t = table.returns.rows();
    const Eigen::Index k = table.returns.cols();
    if (t < 3) {
        throw Error(Errc::InsufficientData, "need at least 3 aligned observations, have " +
                                                std::to_string(t));
    }
    const Eigen::MatrixXd centered = table.returns.rowwise() - table.returns.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    Eigen::VectorXd sd(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double scale = std::max(1.0, table.returns.col(j).cwiseAbs().maxCoeff());
        if (!(cov(j, j) > 1e-24 * scale * scale * static_cast<double>(t))) {
            throw Error(Errc::ZeroVariance,
                        "group '" + table.groups[static_cast<std::size_t>(j)].label +
                            "' has zero return variance");
        }
        sd(j) = std::sqrt(cov(j, j));
    }
    Eigen::MatrixXd corr(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        corr(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = std::clamp(cov(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
            corr(i, j) = v;
            corr(j, i) = v;
        }
    }
    return corr;
}

PsdRepair ensure_psd(const Eigen::MatrixXd& sigma, double eps) {
    PsdRepair out;
    out.matrix = sigma;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
    out.min_eigenvalue_before = solver.eigenvalues().minCoeff();
    if (out.min_eigenvalue_before >= eps) {
        return out;
    }
    out.repaired = true;
    // Clip-and-rescale; rescaling to unit diagonal can pull the smallest
    // eigenvalue back under eps, so repeat until it holds.
    Eigen::MatrixXd m = sigma;
    for (int pass = 0; pass < 100; ++pass) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        if (pass > 0 && es.eigenvalues().minCoeff() >= eps) break;
        const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(eps * 1.01);
        m = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        const Eigen::VectorXd inv_sd = m.diagonal().cwiseSqrt().cwiseInverse();
        m = inv_sd.asDiagonal() * m * inv_sd.asDiagonal();
        m = 0.5 * (m + m.transpose()).eval();
        m.diagonal().setOnes();
    }
    out.matrix = m;
    out.max_abs_change = (m - sigma).cwiseAbs().maxCoeff();
    return out;
}

CorrelationEstimate estimate_universe(const PriceTable& prices,
                                      const std::vector<BasketSpec>& baskets, double eps) {
    const ReturnsTable table = aggregate_baskets(log_returns(prices), baskets);
    PsdRepair repair = ensure_psd(estimate_correlation(table), eps);
    FactorUniverse universe(table.groups, repair.matrix);
    return {std::move(universe), std::move(repair), static_cast<std::size_t>(table.returns.rows())};
}

}  // namespace vcrisk
