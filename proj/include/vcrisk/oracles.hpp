#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vcrisk {

/// Exact distribution of a sum of independent Bernoulli(p_i), by the O(N^2)
/// convolution recurrence. Entry u is P(U = u). Throws OutOfRange unless every
/// p_i is in [0, 1].
std::vector<double> poisson_binomial_pmf(std::span<const double> probs);

/// P(X <= k) for X ~ Binomial(n, p), summed in log space.
double binomial_cdf(std::size_t k, std::size_t n, double p);

/// Binomial CDF with the success probability supplied as log(p), log(1 - p);
/// stays accurate when p underflows.
double binomial_cdf_log(std::size_t k, std::size_t n, double log_p, double log_q);

struct QuadratureRule {
    std::vector<double> nodes;    // abscissae for the standard normal weight
    std::vector<double> weights;  // sum to 1
};

/// Gauss-Hermite rule rescaled so that sum(w_i f(x_i)) ~ E[f(Z)], Z ~ N(0, 1).
QuadratureRule gauss_hermite_normal(std::size_t nodes);

inline constexpr std::size_t kDefaultQuadratureNodes = 200;

/// P(U <= k) for n exchangeable deals with standalone probability p that share
/// one Gaussian factor with pairwise latent correlation pair_rho:
///   integral phi(z) BinCDF(k; n, Phi((sqrt(rho) z - Phi^-1(1-p)) / sqrt(1-rho))) dz.
/// Throws OutOfRange for p outside (0, 1) or pair_rho outside [0, 1).
double single_factor_homogeneous(double p, double pair_rho, std::size_t n, std::size_t k,
                                 std::size_t nodes = kDefaultQuadratureNodes);

}  // namespace vcrisk
