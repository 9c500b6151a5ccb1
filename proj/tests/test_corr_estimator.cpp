#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vcrisk/corr_estimator.hpp"
#include "vcrisk/error.hpp"
#include "vcrisk/random.hpp"

using namespace vcrisk;

namespace {

Errc code_of(const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::IoError;
}

std::string message_of(const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

ReturnsTable two_groups(const std::vector<double>& a, const std::vector<double>& b) {
    ReturnsTable t;
    t.groups = {{"A", GroupKind::Sector}, {"B", GroupKind::Sector}};
    t.returns.resize(static_cast<Eigen::Index>(a.size()), 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        t.returns(static_cast<Eigen::Index>(i), 0) = a[i];
        t.returns(static_cast<Eigen::Index>(i), 1) = b[i];
    }
    return t;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST_SUITE("corr_estimator") {

TEST_CASE("parse prices") {
    const auto t = parse_prices("date,X\n2020-01-31,100\n2020-02-29,110\n");
    CHECK(t.dates.size() == 2);
    CHECK(log_returns(t).series.at("X").size() == 1);

    const auto u = parse_prices("date,X,Y\n2020-03-31,3,30\n2020-01-31,1,10\n2020-02-29,2,NA\n");
    CHECK(u.dates == std::vector<std::string>{"2020-01-31", "2020-02-29", "2020-03-31"});
    CHECK(u.series.at("X") == std::vector<double>{1, 2, 3});
    CHECK(std::isnan(u.series.at("Y")[1]));

    CHECK(code_of([] { parse_prices("date,X\n2020-01-31,0\n"); }) == Errc::NonPositivePrice);
    CHECK(code_of([] { parse_prices("date,X\n2020-01-31,-4\n"); }) == Errc::NonPositivePrice);
    CHECK(code_of([] { parse_prices("date,X\n2020-01-31,abc\n"); }) == Errc::ParseError);
    CHECK(code_of([] { parse_prices("date,X\n01/31/2020,1\n"); }) == Errc::ParseError);
    CHECK(code_of([] { parse_prices("date,X\n2020-01-31,1\n2020-01-31,2\n"); }) == Errc::ParseError);
    CHECK(message_of([] { parse_prices(""); }).find("'date'") != std::string::npos);
    CHECK(message_of([] { parse_prices("day,X\n"); }).find("'date'") != std::string::npos);
}

TEST_CASE("log returns") {
    const auto r = log_returns(parse_prices("date,X,C\n2020-01-31,100,5\n2020-02-29,110,5\n2020-03-31,99,5\n"));
    CHECK(r.series.at("X")[0] == doctest::Approx(0.09531).epsilon(1e-4));
    CHECK(r.series.at("X")[1] == doctest::Approx(-0.10536).epsilon(1e-4));
    CHECK(r.series.at("C") == std::vector<double>{0.0, 0.0});
    CHECK(r.dates.front() == "2020-02-29");
    CHECK(code_of([] { log_returns(parse_prices("date,X\n2020-01-31,1\n")); }) == Errc::InsufficientData);
}

TEST_CASE("basket aggregation") {
    TickerReturns r;
    r.dates = {"t1", "t2", "t3"};
    const double nan = std::nan("");
    r.series["P"] = {0.02, 0.01, 0.05};
    r.series["Q"] = {0.04, nan, 0.01};
    r.series["S"] = {0.10, 0.20, 0.30};
    const std::vector<BasketSpec> baskets = {{"Sec", GroupKind::Sector, {"S"}},
                                             {"Geo", GroupKind::Geography, {"P", "Q"}}};
    const auto t = aggregate_baskets(r, baskets);
    CHECK(t.dates == std::vector<std::string>{"t1", "t3"});  // t2 incomplete
    CHECK(t.returns(0, 0) == 0.10);                            // passthrough
    CHECK(t.returns(0, 1) == doctest::Approx(0.03));
    CHECK(t.returns(1, 1) == doctest::Approx(0.03));

    const std::vector<BasketSpec> missing = {{"Geo", GroupKind::Geography, {"P", "Z"}}};
    CHECK(code_of([&] { aggregate_baskets(r, missing); }) == Errc::MissingTicker);
    const std::vector<BasketSpec> two_etf = {{"Sec", GroupKind::Sector, {"S", "P"}}};
    CHECK(code_of([&] { aggregate_baskets(r, two_etf); }) == Errc::InvalidConfig);
}

TEST_CASE("basket manifest parsing") {
    const auto b = parse_baskets(R"({"_note": "x", "groups": {"Z": {"kind": "sector", "tickers": ["Z1"]},
        "A": {"kind": "geography", "tickers": ["A1", "A2"]}}})");
    REQUIRE(b.size() == 2);
    CHECK(b[0].label == "Z");  // file order, not sorted
    CHECK(b[1].kind == GroupKind::Geography);
    CHECK(code_of([] { parse_baskets("[1]"); }) == Errc::ParseError);
    CHECK(code_of([] { parse_baskets(R"({"A": {"kind": "planet", "tickers": ["X"]}})"); }) == Errc::ParseError);
    CHECK(load_baskets(test::data_path("baskets_default.json")).size() == 11);
}

TEST_CASE("correlation estimates") {
    const std::vector<double> a = {0.01, -0.02, 0.03, 0.00, 0.05, -0.01};
    std::vector<double> neg;
    for (const double x : a) neg.push_back(-x);
    CHECK(estimate_correlation(two_groups(a, a))(0, 1) == 1.0);
    CHECK(estimate_correlation(two_groups(a, neg))(0, 1) == -1.0);

    RandomStream s(derive_key(99, "pm1"), 0);
    std::vector<double> x, y;
    for (int i = 0; i < 1000; ++i) {
        x.push_back(s.below(2) ? 1.0 : -1.0);
        y.push_back(s.below(2) ? 1.0 : -1.0);
    }
    const auto c = estimate_correlation(two_groups(x, y));
    CHECK(std::abs(c(0, 1)) < 0.1);
    CHECK(c(0, 0) == 1.0);
    CHECK(c(0, 1) == c(1, 0));

    const std::vector<double> flat = {0.01, 0.01, 0.01, 0.01};
    CHECK(message_of([&] { estimate_correlation(two_groups({0.1, 0.2, 0.3, 0.1}, flat)); }).find("'B'") !=
          std::string::npos);
    CHECK(code_of([&] { estimate_correlation(two_groups({0.1, 0.2}, {0.2, 0.1})); }) == Errc::InsufficientData);
}

TEST_CASE("ensure_psd") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    const auto same = ensure_psd(id);
    CHECK_FALSE(same.repaired);
    CHECK(same.matrix == id);

    Eigen::MatrixXd bad(3, 3);
    bad << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;
    REQUIRE(min_eigenvalue(bad) < 0);
    const double eps = 1e-6;
    const auto fixed = ensure_psd(bad, eps);
    CHECK(fixed.repaired);
    CHECK(fixed.min_eigenvalue_before == doctest::Approx(min_eigenvalue(bad)));
    CHECK(min_eigenvalue(fixed.matrix) >= eps);
    CHECK((fixed.matrix.diagonal().array() == 1.0).all());
    CHECK((fixed.matrix - fixed.matrix.transpose()).norm() == 0.0);
    CHECK(fixed.max_abs_change > 0.0);
}

TEST_CASE("sample correlation of full-rank data is left alone") {
    const auto est = estimate_universe(load_prices(test::data_path("fixtures/prices.csv")),
                                       load_baskets(test::data_path("fixtures/baskets.json")));
    CHECK_FALSE(est.repair.repaired);
    CHECK(est.observations == 66);
    CHECK(est.universe.size() == 11);
}

}
