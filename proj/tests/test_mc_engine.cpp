#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vcrisk/error.hpp"
#include "vcrisk/mc_engine.hpp"
#include "vcrisk/oracles.hpp"

using namespace vcrisk;
using test::fixture;

namespace {

OutcomeDistribution run(const Portfolio& p, ModelMode mode, std::uint64_t m, unsigned threads = 0,
                        std::uint64_t seed = 42) {
    RunSettings s;
    s.iterations = m;
    s.seed = seed;
    s.threads = threads;
    return run_mode(p, mode, s, fixture().universe).distribution;
}

}  // namespace

TEST_SUITE("mc_engine") {

TEST_CASE("cholesky") {
    CHECK((cholesky(Eigen::MatrixXd::Identity(4, 4)).lower - Eigen::MatrixXd::Identity(4, 4)).norm() == 0);
    Eigen::MatrixXd s(2, 2);
    s << 1, 0.5, 0.5, 1;
    const auto l = cholesky(s).lower;
    CHECK(l(0, 0) == doctest::Approx(1.0));
    CHECK(l(0, 1) == 0.0);
    CHECK(l(1, 0) == doctest::Approx(0.5));
    CHECK(l(1, 1) == doctest::Approx(0.866025).epsilon(1e-6));

    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    try {
        cholesky(bad);
        FAIL("expected NotPSD");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NotPSD);
    }

    // Rank-one PSD input: the zero pivot gives a zero column, L L' still equals Σ.
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
    const auto lo = cholesky(ones).lower;
    CHECK((lo * lo.transpose() - ones).cwiseAbs().maxCoeff() < 1e-12);

    const auto lf = cholesky(fixture().universe.sigma()).lower;
    CHECK((lf * lf.transpose() - fixture().universe.sigma()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sample_factors multiplies iid normals by L") {
    Eigen::MatrixXd s(2, 2);
    s << 1, 0.5, 0.5, 1;
    const auto f = cholesky(s);
    RandomStream a(derive_key(5, "f"), 9), b(derive_key(5, "f"), 9);
    const auto z = sample_factors(f, a);
    Eigen::Vector2d x;
    x(0) = b.normal();
    x(1) = b.normal();
    CHECK((z - f.lower * x).norm() < 1e-15);
    CHECK((f.lower * Eigen::Vector2d(1, 0) - Eigen::Vector2d(1, 0.5)).norm() < 1e-15);
}

TEST_CASE("sampled factors reproduce the fixture correlation") {
    const auto& sigma = fixture().universe.sigma();
    const auto f = cholesky(sigma);
    const auto n = sigma.rows();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    const int m = 1'000'000;
    RandomStream s(derive_key(11, "factors"), 0);
    for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd z = sample_factors(f, s);
        acc.noalias() += z * z.transpose();
    }
    acc /= m;
    const Eigen::VectorXd d = acc.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd corr = d.asDiagonal() * acc * d.asDiagonal();
    CHECK((corr - sigma).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("uncorrelated homogeneous portfolio is binomial") {
    const auto d = run(test::homogeneous(40, 0.04, {"AI", "CA", "Repeat"}), ModelMode::Uncorrelated, 1'000'000);
    const auto cdf = empirical_cdf(d);
    CHECK(std::abs(cdf[0] - 0.19537) < 0.002);
    CHECK(std::abs(cdf[1] - 0.52096) < 0.002);
    CHECK(std::abs(cdf[2] - 0.78539) < 0.002);
    CHECK(cdf.back() == 1.0);
}

TEST_CASE("tiny probabilities never succeed") {
    for (const auto mode : {ModelMode::Uncorrelated, ModelMode::MultiFactor}) {
        const auto d = run(test::homogeneous(40, 1e-9, {"AI", "CA", "Repeat"}), mode, 10'000);
        CHECK(d.counts[0] == 10'000);
    }
}

TEST_CASE("marginal success rates are preserved") {
    Portfolio p;
    p.label = "mixed";
    p.deals = {{"a", 0.02, {"AI", "CA", "Repeat"}},
               {"b", 0.10, {"Healthcare", "MA", "FirstTime"}},
               {"c", 0.20, {"SaaS", "NY", "Repeat"}},
               {"d", 0.05, {"Consumer", "OtherUS", "FirstTime"}}};
    for (const auto mode : {ModelMode::Uncorrelated, ModelMode::SingleFactorSector, ModelMode::MultiFactor}) {
        const auto d = run(p, mode, 400'000);
        for (std::size_t i = 0; i < p.deals.size(); ++i) {
            const double pi = p.deals[i].p;
            const double freq = static_cast<double>(d.deal_successes[i]) / 400'000.0;
            CHECK(std::abs(freq - pi) < 4 * std::sqrt(pi * (1 - pi) / 400'000.0));
        }
    }
}

TEST_CASE("single-factor run matches the quadrature oracle") {
    const auto d = run(test::homogeneous(40, 0.04, {"AI", "CA", "Repeat"}), ModelMode::SingleFactorSector,
                       1'000'000);
    const auto cdf = empirical_cdf(d);
    // Cross-product calibration: pair rho between identical deals is w0^2.
    RunSettings s;
    const auto pf = test::homogeneous(40, 0.04, {"AI", "CA", "Repeat"});
    const double w0 = calibrate_for_mode(pf, ModelMode::SingleFactorSector, s, fixture().universe).w0;
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(cdf[k] - single_factor_homogeneous(0.04, w0 * w0, 40, k)) < 0.003);
    }
}

TEST_CASE("histogram does not depend on thread count") {
    const auto p = test::homogeneous(25, 0.07, {"FinTech", "NY", "FirstTime"});
    const auto one = run(p, ModelMode::MultiFactor, 50'000, 1);
    const auto three = run(p, ModelMode::MultiFactor, 50'000, 3);
    const auto eight = run(p, ModelMode::MultiFactor, 50'000, 8);
    CHECK(one.counts == three.counts);
    CHECK(one.counts == eight.counts);
    CHECK(one.deal_successes == eight.deal_successes);
    CHECK(run(p, ModelMode::MultiFactor, 50'000, 1, 43).counts != one.counts);
}

TEST_CASE("distribution_stats") {
    OutcomeDistribution d;
    d.counts = {500, 300, 200};
    d.iterations = 1000;
    d.portfolio_size = 2;
    const auto s = distribution_stats(d);
    CHECK(s.p_u_eq_0 == doctest::Approx(0.5));
    CHECK(s.p_u_le_1 == doctest::Approx(0.8));
    CHECK(s.p_u_le_2 == doctest::Approx(1.0));
    CHECK(s.expected_u == doctest::Approx(0.7));
    CHECK(*s.e_u_given_ge_1 == doctest::Approx(1.4));
    CHECK(*s.e_u_given_ge_2 == doctest::Approx(2.0));
    CHECK_FALSE(s.e_u_given_ge_3.has_value());

    const auto e = standard_errors(d);
    CHECK(e.p_u_eq_0 == doctest::Approx(std::sqrt(0.25 / 1000)));
    CHECK(e.expected_u == doctest::Approx(std::sqrt((1.1 - 0.49) / 1000)));

    OutcomeDistribution z;
    z.counts = {1000, 0, 0};
    z.iterations = 1000;
    z.portfolio_size = 2;
    const auto sz = distribution_stats(z);
    CHECK(sz.p_u_eq_0 == 1.0);
    CHECK(sz.expected_u == 0.0);
    CHECK_FALSE(sz.e_u_given_ge_1.has_value());
    CHECK_FALSE(sz.e_u_given_ge_2.has_value());
}

TEST_CASE("mode names") {
    for (const auto m : {ModelMode::Uncorrelated, ModelMode::SingleFactorSector, ModelMode::MultiFactor}) {
        CHECK(parse_model_mode(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_model_mode("two_factor"), Error);
    CHECK(weights_for(ModelMode::SingleFactorSector, KindWeights::multi_factor()) == KindWeights::sector_only());
}

}
