// Acceptance run: one PASS/FAIL line per headline criterion, against the
// shipped fixture Σ. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "vcrisk/commands.hpp"
#include "vcrisk/oracles.hpp"
#include "vcrisk/prob_assigner.hpp"
#include "vcrisk/report.hpp"
#include "vcrisk/scenario.hpp"

using namespace vcrisk;

namespace {

int failures = 0;

void verdict(bool ok, const char* id, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

UniverseContext fixture() { return report::load_context(VCRISK_DATA_DIR "/fixture_sigma.csv"); }

PortfolioSpec homogeneous(const std::string& label, std::size_t n, double p,
                          const Affiliation& a) {
    PortfolioSpec spec;
    spec.label = label;
    for (std::size_t k = 0; k < n; ++k) spec.deals.push_back({"deal-" + std::to_string(k + 1), p, a});
    return spec;
}

PortfolioSpec sector_diversified(double p) {
    PortfolioSpec spec;
    spec.label = "diversified";
    spec.composition = Composition{40,
                                   {{"Repeat", 1.0}},
                                   {{"AI", 0.2}, {"FinTech", 0.2}, {"Healthcare", 0.2},
                                    {"Consumer", 0.2}, {"SaaS", 0.2}},
                                   {{"CA", 1.0}}};
    spec.homogeneous_p = p;
    return spec;
}

const std::vector<ModelMode> kAllModes = {ModelMode::Uncorrelated, ModelMode::SingleFactorSector,
                                          ModelMode::MultiFactor};

// Delta-method standard error of E[U | U >= k] from the histogram.
double conditional_se(const OutcomeDistribution& d, std::size_t k) {
    double mass = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t u = k; u < d.counts.size(); ++u) {
        const auto c = static_cast<double>(d.counts[u]);
        mass += c;
        s1 += c * static_cast<double>(u);
        s2 += c * static_cast<double>(u * u);
    }
    const double mean = s1 / mass;
    const double var = s2 / mass - mean * mean;
    return std::sqrt(var / mass);
}

// ---------------------------------------------------------------------------

void binomial_baseline(const UniverseContext& ctx) {
    RunSettings s;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_scenario(
        {homogeneous("baseline40", 40, 0.04, {"AI", "CA", "Repeat"}), {ModelMode::Uncorrelated}, s},
        ctx);
    const double secs = seconds_since(t0);
    const auto& st = r.modes[0].stats;
    const double exact[3] = {binomial_cdf(0, 40, 0.04), binomial_cdf(1, 40, 0.04),
                             binomial_cdf(2, 40, 0.04)};
    const double benchmark[3] = {0.196, 0.520, 0.785};
    // Five-decimal reference values for the same figures; the last
    // two are slightly off the closed form, so they are reported, not gated on.
    const double reference[3] = {0.19537, 0.52096, 0.78539};
    const double mc[3] = {st.p_u_eq_0, st.p_u_le_1, st.p_u_le_2};
    bool ok = secs < 10.0;
    double worst = 0.0, worst_bench = 0.0, worst_ref = 0.0;
    for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(mc[i] - exact[i]));
        worst_bench = std::max(worst_bench, std::abs(benchmark[i] - exact[i]));
        worst_ref = std::max(worst_ref, std::abs(reference[i] - exact[i]));
    }
    ok = ok && worst <= 0.002 && worst_bench <= 0.002 + 1e-12;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "P(U=0)=%.4f P(U<=1)=%.4f P(U<=2)=%.4f vs Binomial(40,0.04) %.5f/%.5f/%.5f; "
                  "max |MC-exact|=%.3fpp, |benchmark-exact|=%.3fpp (tol 0.2pp); reference "
                  "decimals off by up to %.3fpp; %.2fs (limit 10s)",
                  mc[0], mc[1], mc[2], exact[0], exact[1], exact[2], 100 * worst, 100 * worst_bench,
                  100 * worst_ref, secs);
    verdict(ok, "binomial-baseline", buf);
}

void probability_sensitivity(const UniverseContext& ctx) {
    RunSettings s;
    const double ps[4] = {0.02, 0.04, 0.08, 0.16};
    const double benchmark[4][3] = {
        {0.445, 0.810, 0.954}, {0.196, 0.520, 0.785}, {0.037, 0.161, 0.368}, {0.001, 0.009, 0.036}};
    const std::vector<double> pv(std::begin(ps), std::end(ps));
    const auto sweep = run_probability_sweep(pv, 40, {"AI", "CA", "Repeat"}, s, ctx);
    double worst_mc = 0.0, worst_bench = 0.0;
    for (const auto& row : sweep.rows) {
        if (row.mode != ModelMode::Uncorrelated) continue;
        const int i = static_cast<int>(std::find(ps, ps + 4, row.p) - ps);
        const double mc[3] = {row.stats.p_u_eq_0, row.stats.p_u_le_1, row.stats.p_u_le_2};
        for (int k = 0; k < 3; ++k) {
            const double exact = binomial_cdf(static_cast<std::size_t>(k), 40, row.p);
            worst_mc = std::max(worst_mc, std::abs(mc[k] - exact));
            worst_bench = std::max(worst_bench, std::abs(benchmark[i][k] - exact));
        }
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "p in {2,4,8,16}%%: max |MC - closed form|=%.3fpp, max |benchmark - closed "
                  "form|=%.3fpp (tol 0.2pp each)",
                  100 * worst_mc, 100 * worst_bench);
    verdict(worst_mc <= 0.002 && worst_bench <= 0.002 + 1e-12, "probability-sensitivity", buf);
}

void mean_invariance(const UniverseContext& ctx) {
    RunSettings s;
    struct Case {
        PortfolioSpec spec;
        double expected;
    };
    std::vector<Case> cases;
    cases.push_back({homogeneous("concentrated", 40, 0.04, {"AI", "CA", "Repeat"}), 1.6});
    cases.push_back({sector_diversified(0.04), 1.6});
    for (const double p : {0.02, 0.08, 0.16}) {
        cases.push_back({homogeneous("p" + fmt("%.2f", p), 40, p, {"AI", "CA", "Repeat"}), 40 * p});
    }
    double worst = 0.0;
    std::string where;
    for (const auto& c : cases) {
        const auto r = run_scenario({c.spec, kAllModes, s}, ctx);
        for (const auto& m : r.modes) {
            const double z = std::abs(m.stats.expected_u - c.expected) / m.errors.expected_u;
            if (z > worst) {
                worst = z;
                where = r.label + "/" + std::string(to_string(m.mode));
            }
        }
    }
    verdict(worst <= 3.0, "mean-invariance",
            std::to_string(cases.size()) + " homogeneous scenarios x 3 modes; worst |E[U]-Np|/SE=" +
                fmt("%.2f", worst) + " at " + where + " (limit 3)");
}

void oracle_equivalence(const UniverseContext& ctx) {
    // Randomized cases drawn from a fixed stream so the run is reproducible.
    RandomStream rng(derive_key(20240601, "acceptance-oracle"), 0);
    double worst = 0.0;
    std::string where;
    for (int c = 0; c < 20; ++c) {
        const double p = 0.01 + 0.19 * rng.uniform();
        const double rho = 0.5 * rng.uniform();
        const std::size_t n = 10 + static_cast<std::size_t>(rng.below(51));
        RunSettings s;
        s.seed = 1000 + static_cast<std::uint64_t>(c);
        s.calibration.fixed_w0 = std::sqrt(rho);
        const auto r = run_scenario(
            {homogeneous("oracle", n, p, {"SaaS", "NY", "FirstTime"}), {ModelMode::SingleFactorSector}, s},
            ctx);
        const auto& st = r.modes[0].stats;
        const double mc[3] = {st.p_u_eq_0, st.p_u_le_1, st.p_u_le_2};
        for (std::size_t k = 0; k < 3; ++k) {
            const double q = single_factor_homogeneous(p, rho, n, k);
            const double d = std::abs(mc[k] - q);
            if (d > worst) {
                worst = d;
                where = "p=" + fmt("%.4f", p) + " rho=" + fmt("%.3f", rho) + " n=" + std::to_string(n) +
                        " k=" + std::to_string(k);
            }
        }
    }
    verdict(worst <= 0.003, "oracle-equivalence",
            "20 random single-factor cases, max |MC - quadrature|=" + fmt("%.3f", 100 * worst) +
                "pp at " + where + " (tol 0.3pp)");
}

void poisson_binomial(const UniverseContext& ctx) {
    RunSettings s;
    s.calibration.fixed_w0 = 0.0;
    PortfolioSpec spec;
    spec.label = "A";
    spec.composition = preset_composition("A");
    const auto r = run_scenario({spec, {ModelMode::MultiFactor}, s}, ctx);
    std::vector<double> probs;
    for (const auto& d : r.deals) probs.push_back(d.p);
    const auto pmf = poisson_binomial_pmf(probs);
    const auto cdf = empirical_cdf(r.modes[0].distribution);
    double acc = 0.0, sup = 0.0;
    for (std::size_t u = 0; u < pmf.size(); ++u) {
        acc += pmf[u];
        sup = std::max(sup, std::abs(acc - cdf[u]));
    }
    verdict(sup < 0.002, "poisson-binomial",
            "w0=0, 40 assigned probabilities (portfolio A), M=1e6: sup |CDF diff|=" +
                fmt("%.5f", sup) + " (limit 0.002)");
}

void correlation_direction(const UniverseContext& ctx) {
    RunSettings s;
    const auto conc = run_scenario(
        {homogeneous("concentrated", 40, 0.04, {"AI", "CA", "Repeat"}), kAllModes, s}, ctx);
    const auto div = run_scenario({sector_diversified(0.04), kAllModes, s}, ctx);
    const auto p0 = [](const ScenarioResult& r, ModelMode m) { return r.mode(m).stats.p_u_eq_0; };
    const auto se = [](const ScenarioResult& r, ModelMode m) { return r.mode(m).errors.p_u_eq_0; };
    struct Cmp {
        const char* name;
        double lo, lo_se, hi, hi_se;
    };
    const Cmp cmps[3] = {
        {"Unc(conc)<SF(conc)", p0(conc, ModelMode::Uncorrelated), se(conc, ModelMode::Uncorrelated),
         p0(conc, ModelMode::SingleFactorSector), se(conc, ModelMode::SingleFactorSector)},
        {"SF(div)<SF(conc)", p0(div, ModelMode::SingleFactorSector),
         se(div, ModelMode::SingleFactorSector), p0(conc, ModelMode::SingleFactorSector),
         se(conc, ModelMode::SingleFactorSector)},
        {"SF(div)<MF(div)", p0(div, ModelMode::SingleFactorSector),
         se(div, ModelMode::SingleFactorSector), p0(div, ModelMode::MultiFactor),
         se(div, ModelMode::MultiFactor)}};
    bool ok = true;
    std::string detail = "P(U=0):";
    for (const auto& c : cmps) {
        const double z = (c.hi - c.lo) / std::hypot(c.lo_se, c.hi_se);
        ok = ok && c.lo < c.hi;
        detail += std::string(" ") + c.name + " " + fmt("%.2f", 100 * c.lo) + "<" +
                  fmt("%.2f", 100 * c.hi) + "% (" + fmt("%.0f", z) + " SE);";
    }
    verdict(ok, "correlation-direction", detail);
}

void baseline_orderings(const UniverseContext& ctx) {
    RunSettings s;
    std::vector<PortfolioSpec> specs;
    for (const char* name : {"A", "B", "C", "D"}) {
        PortfolioSpec p;
        p.label = name;
        p.composition = preset_composition(name);
        specs.push_back(p);
    }
    const auto res = run_baseline_comparison(specs, s, ctx);
    const auto& A = res[0].modes[0];
    const auto& B = res[1].modes[0];
    const auto& C = res[2].modes[0];
    const auto& D = res[3].modes[0];

    int beyond = 0, total = 0;
    std::vector<std::string> within_noise;
    bool ok = true;
    // lower < higher, with the margin measured in combined standard errors.
    const auto check = [&](const std::string& name, double lower, double lower_se, double higher,
                           double higher_se, bool strict) {
        ++total;
        const double margin = higher - lower;
        const double se = std::hypot(lower_se, higher_se);
        if (margin > 3 * se) {
            ++beyond;
        } else {
            within_noise.push_back(name + "(" + fmt("%.1f", margin / se) + "SE)");
            if (strict ? margin <= 0 : margin < 0) ok = false;
        }
    };
    for (const auto* lo : {&B, &D}) {
        for (const auto* hi : {&A, &C}) {
            const std::string l = lo == &B ? "B" : "D", h = hi == &A ? "A" : "C";
            check("P0 " + l + "<" + h, lo->stats.p_u_eq_0, lo->errors.p_u_eq_0, hi->stats.p_u_eq_0,
                  hi->errors.p_u_eq_0, true);
            check("E1 " + h + "<" + l, *hi->stats.e_u_given_ge_1,
                  conditional_se(hi->distribution, 1), *lo->stats.e_u_given_ge_1,
                  conditional_se(lo->distribution, 1), true);
        }
    }
    check("P0 D<=B", D.stats.p_u_eq_0, D.errors.p_u_eq_0, B.stats.p_u_eq_0, B.errors.p_u_eq_0,
          false);
    const std::optional<double> PortfolioStats::*cond[3] = {
        &PortfolioStats::e_u_given_ge_1, &PortfolioStats::e_u_given_ge_2,
        &PortfolioStats::e_u_given_ge_3};
    for (std::size_t k = 0; k < 3; ++k) {
        check("E" + std::to_string(k + 1) + " D<=B", *(D.stats.*cond[k]),
              conditional_se(D.distribution, k + 1), *(B.stats.*cond[k]),
              conditional_se(B.distribution, k + 1), false);
    }
    std::string detail = std::to_string(beyond) + "/" + std::to_string(total) +
                         " margins beyond 3 SE; P(U=0) A/B/C/D=" + fmt("%.1f", 100 * A.stats.p_u_eq_0) +
                         "/" + fmt("%.1f", 100 * B.stats.p_u_eq_0) + "/" +
                         fmt("%.1f", 100 * C.stats.p_u_eq_0) + "/" + fmt("%.1f", 100 * D.stats.p_u_eq_0) +
                         "%; E[U|U>=1]=" + fmt("%.2f", *A.stats.e_u_given_ge_1) + "/" +
                         fmt("%.2f", *B.stats.e_u_given_ge_1) + "/" +
                         fmt("%.2f", *C.stats.e_u_given_ge_1) + "/" +
                         fmt("%.2f", *D.stats.e_u_given_ge_1);
    for (const auto& w : within_noise) detail += "; within noise: " + w;
    verdict(ok, "baseline-orderings", detail);
}

void diversification_limit(const UniverseContext& ctx) {
    RunSettings s;
    s.iterations = 10'000'000;
    const auto t0 = std::chrono::steady_clock::now();
    const auto lim = run_diversification_limit(s, ctx);
    const auto& E = lim.results[0].modes[0];
    const auto& F = lim.results[1].modes[0];
    const auto& G = lim.results[2].modes[0];
    const double ge = (E.stats.p_u_eq_0 - G.stats.p_u_eq_0) / std::hypot(E.errors.p_u_eq_0, G.errors.p_u_eq_0);
    const double ef = (F.stats.p_u_eq_0 - E.stats.p_u_eq_0) / std::hypot(E.errors.p_u_eq_0, F.errors.p_u_eq_0);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "M=1e7: P(U=0) G=%.3f%% < E=%.3f%% < F=%.3f%% (SE %.3fpp; margins %.1f and %.1f "
                  "SE); %.0fs",
                  100 * G.stats.p_u_eq_0, 100 * E.stats.p_u_eq_0, 100 * F.stats.p_u_eq_0,
                  100 * E.errors.p_u_eq_0, ge, ef, seconds_since(t0));
    verdict(lim.ordering_holds, "diversification-limit", buf);
}

void size_sweep(const UniverseContext& ctx) {
    RunSettings s;
    std::vector<PortfolioSpec> specs;
    for (const char* name : {"A", "D"}) {
        PortfolioSpec p;
        p.label = name;
        p.composition = preset_composition(name);
        specs.push_back(p);
    }
    const std::size_t replicates = 1000;
    const auto sweep = run_size_sweep(specs, kDefaultSweepSizes, s, ctx, replicates);
    const std::size_t k = kDefaultSweepSizes.size();

    bool ok = true;
    std::string detail = "sizes 5..40, " + std::to_string(replicates) + " probability draws:";
    std::vector<double> eu[2];
    for (int which = 0; which < 2; ++which) {
        std::vector<double> x, y, p0, se;
        for (std::size_t i = 0; i < k; ++i) {
            const auto& row = sweep.rows[which * k + i];
            x.push_back(static_cast<double>(row.size));
            y.push_back(row.expected_u);
            p0.push_back(row.p_u_eq_0);
            se.push_back(row.p_u_eq_0_se);
        }
        eu[which] = y;
        // Ordinary least squares R^2.
        const double n = static_cast<double>(k);
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < k; ++i) mx += x[i] / n, my += y[i] / n;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < k; ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        const double r2 = sxy * sxy / (sxx * syy);
        bool nonincreasing = true, convex = true;
        double worst_z = 1e9;
        for (std::size_t i = 1; i < k; ++i) {
            if (p0[i] > p0[i - 1] + 3 * std::hypot(se[i], se[i - 1])) nonincreasing = false;
        }
        for (std::size_t i = 1; i + 1 < k; ++i) {
            const double d2 = p0[i + 1] - 2 * p0[i] + p0[i - 1];
            const double sd = std::sqrt(se[i + 1] * se[i + 1] + 4 * se[i] * se[i] + se[i - 1] * se[i - 1]);
            worst_z = std::min(worst_z, d2 / sd);
            if (d2 < -3 * sd) convex = false;
        }
        // Strict check on the point estimates as well: every step must go down.
        for (std::size_t i = 1; i < k; ++i) nonincreasing = nonincreasing && p0[i] <= p0[i - 1];
        ok = ok && r2 > 0.999 && nonincreasing && convex;
        detail += std::string(" ") + specs[which].label + ": R2=" + fmt("%.6f", r2) +
                  (nonincreasing ? ", P0 nonincreasing" : ", P0 NOT nonincreasing") +
                  ", min 2nd diff " + fmt("%+.1f", worst_z) + " SE;";
    }
    bool widening = true;
    std::string gaps;
    for (std::size_t i = 0; i < k; ++i) {
        const double g = eu[1][i] - eu[0][i];
        gaps += (i ? "," : "") + fmt("%.3f", g);
        if (i > 0 && g <= eu[1][i - 1] - eu[0][i - 1]) widening = false;
    }
    ok = ok && widening;
    detail += " E[U] gap D-A " + gaps + (widening ? " (widening)" : " (NOT widening)");
    verdict(ok, "size-sweep", detail);
}

void assigner_means() {
    const auto rules = AssignmentRules::defaults();
    const Affiliation first{"Consumer", "MA", "FirstTime"};
    const Affiliation repeat{"Consumer", "MA", "Repeat"};
    const std::size_t n = 1'000'000;
    std::vector<Affiliation> firsts(n, first), repeats(n, repeat);
    const auto a = assign_probabilities(firsts, rules, RandomStream(derive_key(42, "assign"), 0));
    const auto b = assign_probabilities(repeats, rules, RandomStream(derive_key(43, "assign"), 0));
    double ma = 0, mb = 0;
    for (const auto& d : a) ma += d.p / static_cast<double>(n);
    for (const auto& d : b) mb += d.p / static_cast<double>(n);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "1e6 non-nudged draws: first-time mean %.4f%% (target 1.80 +/- 0.02pp), repeat "
                  "mean %.4f%% (target 2.583 +/- 0.03pp)",
                  100 * ma, 100 * mb);
    verdict(std::abs(ma - 0.018) <= 0.0002 && std::abs(mb - 0.02583) <= 0.0003, "assigner-means",
            buf);
}

void determinism(const UniverseContext& ctx) {
    const report::json doc = report::load_document(VCRISK_DATA_DIR "/scenarios/concentrated.json");
    std::vector<std::string> dumps;
    for (const unsigned threads : {1U, 4U, 16U}) {
        commands::Options o;
        o.threads = threads;
        o.iterations = 200'000;
        dumps.push_back(report::dump(commands::simulate(doc, ctx, RunSettings{}, o)));
    }
    PortfolioSpec d;
    d.label = "D";
    d.composition = preset_composition("D");
    std::vector<std::vector<std::uint64_t>> hist;
    for (const unsigned threads : {1U, 4U, 16U}) {
        RunSettings s;
        s.threads = threads;
        hist.push_back(run_scenario({d, {ModelMode::MultiFactor}, s}, ctx).modes[0].distribution.counts);
    }
    const bool ok = dumps[0] == dumps[1] && dumps[1] == dumps[2] && hist[0] == hist[1] &&
                    hist[1] == hist[2];
    verdict(ok, "determinism",
            "3-mode report (" + std::to_string(dumps[0].size()) +
                " bytes) and portfolio D histogram at M=1e6 identical across 1/4/16 threads");
}

}  // namespace

int main() {
    const UniverseContext ctx = fixture();
    const auto t0 = std::chrono::steady_clock::now();
    binomial_baseline(ctx);
    probability_sensitivity(ctx);
    mean_invariance(ctx);
    oracle_equivalence(ctx);
    poisson_binomial(ctx);
    correlation_direction(ctx);
    baseline_orderings(ctx);
    diversification_limit(ctx);
    size_sweep(ctx);
    assigner_means();
    determinism(ctx);
    std::printf("%d failure(s); %.0fs total\n", failures, seconds_since(t0));
    return failures;
}
