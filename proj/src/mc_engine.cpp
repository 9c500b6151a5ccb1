#include "vcrisk/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "vcrisk/error.hpp"

namespace vcrisk {

namespace {

constexpr std::uint64_t kBlockSize = 4096;

// Flattened, sparse view of a portfolio ready for the hot loop.
struct PreparedDeals {
    std::vector<double> threshold;      // Phi^-1(1 - p_i)
    std::vector<double> probability;    // p_i, for the uncorrelated path
    std::vector<double> idio_sd;        // sqrt(1 - w_i' Sigma w_i)
    std::vector<std::size_t> offset;    // into factor_index / factor_weight
    std::vector<Eigen::Index> factor_index;
    std::vector<double> factor_weight;
};

PreparedDeals prepare(const Portfolio& portfolio, const LoadingSet& loadings,
                      const FactorUniverse& universe, ModelMode mode) {
    PreparedDeals out;
    const std::size_t n = portfolio.deals.size();
    out.offset.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = portfolio.deals[i].p;
        out.probability.push_back(p);
        out.threshold.push_back(exceedance_threshold(p));
        if (mode == ModelMode::Uncorrelated) {
            out.idio_sd.push_back(1.0);
            out.offset.push_back(out.factor_index.size());
            continue;
        }
        const Eigen::VectorXd w = loadings.loading(i);
        const double common = w.dot(universe.sigma() * w);
        double idio = 1.0 - common;
        if (idio < 0.0) {
            if (idio < -tolerance::kIdiosyncraticClamp) {
                std::ostringstream os;
                os << "deal '" << portfolio.deals[i].id << "' has idiosyncratic variance " << idio;
                throw Error(Errc::InvalidLoading, os.str());
            }
            idio = 0.0;
        }
        out.idio_sd.push_back(std::sqrt(idio));
        for (Eigen::Index k = 0; k < w.size(); ++k) {
            if (w(k) != 0.0) {
                out.factor_index.push_back(k);
                out.factor_weight.push_back(w(k));
            }
        }
        out.offset.push_back(out.factor_index.size());
    }
    return out;
}

struct Tally {
    std::vector<std::uint64_t> counts;
    std::vector<std::uint64_t> deal_successes;
};

void run_block(std::uint64_t begin, std::uint64_t end, std::uint64_t key, ModelMode mode,
               const PreparedDeals& deals, const Eigen::MatrixXd& lower, Tally& tally) {
    const std::size_t n = deals.threshold.size();
    const Eigen::Index k_factors = lower.rows();
    std::vector<double> x(static_cast<std::size_t>(k_factors));
    std::vector<double> z(static_cast<std::size_t>(k_factors));
    for (std::uint64_t it = begin; it < end; ++it) {
        RandomStream stream(key, it);
        std::size_t successes = 0;
        if (mode == ModelMode::Uncorrelated) {
            for (std::size_t i = 0; i < n; ++i) {
                if (stream.uniform() < deals.probability[i]) {
                    ++successes;
                    ++tally.deal_successes[i];
                }
            }
        } else {
            for (Eigen::Index r = 0; r < k_factors; ++r) {
                x[static_cast<std::size_t>(r)] = stream.normal();
            }
            for (Eigen::Index r = 0; r < k_factors; ++r) {
                double acc = 0.0;
                for (Eigen::Index c = 0; c <= r; ++c) {
                    acc += lower(r, c) * x[static_cast<std::size_t>(c)];
                }
                z[static_cast<std::size_t>(r)] = acc;
            }
            for (std::size_t i = 0; i < n; ++i) {
                double latent = 0.0;
                for (std::size_t j = deals.offset[i]; j < deals.offset[i + 1]; ++j) {
                    latent += deals.factor_weight[j] *
                              z[static_cast<std::size_t>(deals.factor_index[j])];
                }
                latent += deals.idio_sd[i] * stream.normal();
                if (latent > deals.threshold[i]) {
                    ++successes;
                    ++tally.deal_successes[i];
                }
            }
        }
        ++tally.counts[successes];
    }
}

}  // namespace

CholeskyFactor cholesky(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols()) {
        throw Error(Errc::DimensionMismatch, "cholesky needs a square matrix");
    }
    const Eigen::Index n = sigma.rows();
    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = sigma(j, j);
        for (Eigen::Index k = 0; k < j; ++k) {
            pivot -= lower(j, k) * lower(j, k);
        }
        if (pivot < tolerance::kNotPsdPivot) {
            std::ostringstream os;
            os << "matrix is not positive semidefinite (pivot " << pivot << " at column " << j
               << "); repair it with ensure_psd first";
            throw Error(Errc::NotPSD, os.str());
        }
        if (pivot <= tolerance::kZeroPivot) {
            continue;  // singular direction: leave the column zero
        }
        const double d = std::sqrt(pivot);
        lower(j, j) = d;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double acc = sigma(i, j);
            for (Eigen::Index k = 0; k < j; ++k) {
                acc -= lower(i, k) * lower(j, k);
            }
            lower(i, j) = acc / d;
        }
    }
    return {std::move(lower)};
}

Eigen::VectorXd sample_factors(const CholeskyFactor& factor, RandomStream& stream) {
    Eigen::VectorXd x(factor.lower.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = stream.normal();
    }
    return factor.lower.triangularView<Eigen::Lower>() * x;
}

std::string_view to_string(ModelMode mode) noexcept {
    switch (mode) {
        case ModelMode::Uncorrelated: return "uncorrelated";
        case ModelMode::SingleFactorSector: return "single_factor_sector";
        case ModelMode::MultiFactor: return "multi_factor";
    }
    return "unknown";
}

ModelMode parse_model_mode(std::string_view text) {
    if (text == "uncorrelated") return ModelMode::Uncorrelated;
    if (text == "single_factor_sector" || text == "single_factor") {
        return ModelMode::SingleFactorSector;
    }
    if (text == "multi_factor" || text == "multifactor") return ModelMode::MultiFactor;
    throw Error(Errc::InvalidConfig,
                "unknown model mode '" + std::string(text) +
                    "' (expected uncorrelated, single_factor_sector or multi_factor)");
}

KindWeights weights_for(ModelMode mode, const KindWeights& multi) {
    return mode == ModelMode::SingleFactorSector ? KindWeights::sector_only() : multi;
}

OutcomeDistribution simulate(const Portfolio& portfolio, const LoadingSet& loadings,
                             const FactorUniverse& universe, const SimConfig& config) {
    if (config.iterations < 1) {
        throw Error(Errc::InvalidConfig, "iterations must be at least 1");
    }
    validate_portfolio(portfolio, universe);
    const std::size_t n = portfolio.deals.size();
    if (config.mode != ModelMode::Uncorrelated) {
        if (loadings.size() != n) {
            throw Error(Errc::DimensionMismatch, "loading set does not match portfolio size");
        }
        if (config.mode == ModelMode::SingleFactorSector &&
            !(loadings.weights() == KindWeights::sector_only())) {
            throw Error(Errc::InvalidConfig,
                        "single_factor_sector mode needs loadings built with weights (1, 0, 0)");
        }
    }

    const PreparedDeals deals = prepare(portfolio, loadings, universe, config.mode);
    Eigen::MatrixXd lower;
    if (config.mode != ModelMode::Uncorrelated) {
        lower = cholesky(universe.sigma()).lower;
    }
    const std::uint64_t key = derive_key(config.seed, "simulate");
    const std::uint64_t total = config.iterations;
    const std::uint64_t blocks = (total + kBlockSize - 1) / kBlockSize;

    unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
    threads = std::max(1U, threads);
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));

    std::vector<Tally> tallies(threads, Tally{std::vector<std::uint64_t>(n + 1, 0),
                                              std::vector<std::uint64_t>(n, 0)});
    std::atomic<std::uint64_t> next_block{0};
    const auto worker = [&](Tally& tally) {
        for (;;) {
            const std::uint64_t b = next_block.fetch_add(1, std::memory_order_relaxed);
            if (b >= blocks) break;
            const std::uint64_t begin = b * kBlockSize;
            run_block(begin, std::min(total, begin + kBlockSize), key, config.mode, deals, lower,
                      tally);
        }
    };
    if (threads == 1) {
        worker(tallies[0]);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker, std::ref(tallies[t]));
        }
    }

    // Integer sums: merge order cannot change the result.
    OutcomeDistribution dist{std::vector<std::uint64_t>(n + 1, 0), total, n,
                             std::vector<std::uint64_t>(n, 0)};
    for (const auto& t : tallies) {
        for (std::size_t u = 0; u <= n; ++u) dist.counts[u] += t.counts[u];
        for (std::size_t i = 0; i < n; ++i) dist.deal_successes[i] += t.deal_successes[i];
    }
    return dist;
}

PortfolioStats distribution_stats(const OutcomeDistribution& dist) {
    const auto m = static_cast<double>(dist.iterations);
    const std::size_t n = dist.counts.size();
    const auto count_at = [&](std::size_t u) {
        return u < n ? static_cast<double>(dist.counts[u]) : 0.0;
    };
    PortfolioStats s;
    double weighted = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        weighted += static_cast<double>(u) * static_cast<double>(dist.counts[u]);
    }
    s.expected_u = weighted / m;
    s.p_u_eq_0 = count_at(0) / m;
    s.p_u_le_1 = (count_at(0) + count_at(1)) / m;
    s.p_u_le_2 = (count_at(0) + count_at(1) + count_at(2)) / m;

    const auto conditional = [&](std::size_t k) -> std::optional<double> {
        double mass = 0.0;
        double sum = 0.0;
        for (std::size_t u = k; u < n; ++u) {
            mass += static_cast<double>(dist.counts[u]);
            sum += static_cast<double>(u) * static_cast<double>(dist.counts[u]);
        }
        if (mass == 0.0) return std::nullopt;
        return sum / mass;
    };
    s.e_u_given_ge_1 = conditional(1);
    s.e_u_given_ge_2 = conditional(2);
    s.e_u_given_ge_3 = conditional(3);
    return s;
}

StatErrors standard_errors(const OutcomeDistribution& dist) {
    const auto m = static_cast<double>(dist.iterations);
    const PortfolioStats s = distribution_stats(dist);
    double second = 0.0;
    for (std::size_t u = 0; u < dist.counts.size(); ++u) {
        second += static_cast<double>(u * u) * static_cast<double>(dist.counts[u]);
    }
    const double var_u = std::max(0.0, second / m - s.expected_u * s.expected_u);
    const auto binom_se = [m](double p) { return std::sqrt(p * (1.0 - p) / m); };
    return {std::sqrt(var_u / m), binom_se(s.p_u_eq_0), binom_se(s.p_u_le_1),
            binom_se(s.p_u_le_2)};
}

std::vector<double> empirical_cdf(const OutcomeDistribution& dist) {
    std::vector<double> out;
    out.reserve(dist.counts.size());
    std::uint64_t acc = 0;
    for (const auto c : dist.counts) {
        acc += c;
        out.push_back(static_cast<double>(acc) / static_cast<double>(dist.iterations));
    }
    return out;
}

}  // namespace vcrisk
