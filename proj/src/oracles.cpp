#include "vcrisk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "vcrisk/error.hpp"
#include "vcrisk/normal.hpp"

namespace vcrisk {

std::vector<double> poisson_binomial_pmf(std::span<const double> probs) {
    std::vector<double> pmf(probs.size() + 1, 0.0);
    pmf[0] = 1.0;
    std::size_t filled = 0;
    for (const double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(Errc::OutOfRange, "Poisson-binomial probabilities must lie in [0, 1]");
        }
        ++filled;
        for (std::size_t u = filled; u > 0; --u) {
            pmf[u] = pmf[u] * (1.0 - p) + pmf[u - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    return pmf;
}

double binomial_cdf_log(std::size_t k, std::size_t n, double log_p, double log_q) {
    if (k >= n) return 1.0;
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    double total = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
        const auto jd = static_cast<double>(j);
        const auto rest = static_cast<double>(n - j);
        // 0 * log(0) terms are zero, not NaN.
        const double a = j == 0 ? 0.0 : jd * log_p;
        const double b = rest == 0.0 ? 0.0 : rest * log_q;
        const double log_term =
            lgn - std::lgamma(jd + 1.0) - std::lgamma(rest + 1.0) + a + b;
        total += std::exp(log_term);
    }
    return std::min(1.0, total);
}

double binomial_cdf(std::size_t k, std::size_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(Errc::OutOfRange, "binomial probability must lie in [0, 1]");
    }
    return binomial_cdf_log(k, n, std::log(p), std::log1p(-p));
}

QuadratureRule gauss_hermite_normal(std::size_t n) {
    if (n == 0) {
        throw Error(Errc::OutOfRange, "quadrature needs at least one node");
    }
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
    // polynomials: zero diagonal, off-diagonal sqrt(k). Nodes are the
    // eigenvalues, weights the squared first eigenvector components.
    const auto m = static_cast<Eigen::Index>(n);
    const Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index k = 0; k + 1 < m; ++k) sub(k) = std::sqrt(static_cast<double>(k + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double v = es.eigenvectors()(0, i);
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        rule.weights[static_cast<std::size_t>(i)] = v * v;
    }
    return rule;
}

double single_factor_homogeneous(double p, double pair_rho, std::size_t n, std::size_t k,
                                 std::size_t nodes) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(Errc::OutOfRange, "probability must lie in (0, 1)");
    }
    if (!(pair_rho >= 0.0 && pair_rho < 1.0)) {
        throw Error(Errc::OutOfRange, "pair correlation must lie in [0, 1)");
    }
    if (k >= n) return 1.0;
    if (pair_rho == 0.0) {
        return binomial_cdf(k, n, p);
    }
    const double threshold = -normal_quantile(p);
    const double w = std::sqrt(pair_rho);
    const double s = std::sqrt(1.0 - pair_rho);
    const QuadratureRule rule = gauss_hermite_normal(nodes);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        if (rule.weights[i] == 0.0) continue;
        const double arg = (w * rule.nodes[i] - threshold) / s;
        total += rule.weights[i] *
                 binomial_cdf_log(k, n, normal_log_cdf(arg), normal_log_cdf(-arg));
    }
    return total;
}

}  // namespace vcrisk
