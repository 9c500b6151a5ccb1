#include "vcrisk/prob_assigner.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "vcrisk/error.hpp"

namespace vcrisk {

void AssignmentRules::validate() const {
    if (bands.empty()) {
        throw Error(Errc::InvalidRules, "assignment rules define no founder bands");
    }
    for (const auto& [label, b] : bands) {
        if (!(b.lo > 0.0 && b.lo < b.hi && b.hi < 1.0)) {
            throw Error(Errc::InvalidRules,
                        "founder band '" + label + "' must satisfy 0 < lo < hi < 1");
        }
        if (!(b.alpha > 0.0 && b.beta > 0.0)) {
            throw Error(Errc::InvalidRules,
                        "founder band '" + label + "' needs positive Beta shapes");
        }
    }
    if (!(nudge >= 0.0 && nudge < 1.0)) {
        throw Error(Errc::InvalidRules, "nudge must lie in [0, 1)");
    }
}

AssignmentRules AssignmentRules::defaults() {
    AssignmentRules r;
    r.bands["FirstTime"] = {0.001, 0.12, 1.0, 6.0};
    r.bands["Repeat"] = {0.01, 0.20, 1.0, 11.0};
    r.nudge = 0.01;
    r.nudge_geographies = {"CA", "NY"};
    r.nudge_sectors = {"AI", "FinTech", "SaaS"};
    r.stack_nudges = false;
    return r;
}

AssignmentRules AssignmentRules::healthcare_high_growth() {
    AssignmentRules r = defaults();
    r.nudge_sectors.insert("Healthcare");
    return r;
}

double beta_quantile(double alpha, double beta, double u) {
    if (alpha == 1.0) {
        // F(x) = 1 - (1 - x)^beta
        return -std::expm1(std::log1p(-u) / beta);
    }
    return boost::math::ibeta_inv(alpha, beta, u);
}

double apply_rules(double base_p, const Affiliation& deal, const FounderBand& band,
                   const AssignmentRules& rules) {
    const bool geo = rules.nudge_geographies.contains(deal.geography);
    const bool sector = rules.nudge_sectors.contains(deal.sector);
    double p = base_p;
    if (rules.stack_nudges) {
        p += rules.nudge * (static_cast<int>(geo) + static_cast<int>(sector));
    } else if (geo || sector) {
        p += rules.nudge;
    }
    return std::clamp(p, band.lo, band.hi);
}

std::vector<Deal> assign_probabilities(std::span<const Affiliation> deals,
                                       const AssignmentRules& rules, const RandomStream& stream) {
    rules.validate();
    std::vector<Deal> out;
    out.reserve(deals.size());
    for (std::size_t k = 0; k < deals.size(); ++k) {
        const Affiliation& a = deals[k];
        const auto it = rules.bands.find(a.founder);
        if (it == rules.bands.end()) {
            throw Error(Errc::InvalidRules, "no probability band for founder type '" + a.founder + "'");
        }
        const FounderBand& band = it->second;
        RandomStream slot = stream.substream(k);
        const double x = beta_quantile(band.alpha, band.beta, slot.uniform());
        const double base = band.lo + (band.hi - band.lo) * x;
        out.push_back({"deal-" + std::to_string(k + 1), apply_rules(base, a, band, rules), a});
    }
    return out;
}

}  // namespace vcrisk
