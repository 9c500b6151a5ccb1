#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vcrisk/factor_model.hpp"
#include "vcrisk/random.hpp"

namespace vcrisk {

/// p = lo + (hi - lo) * x with x ~ Beta(alpha, beta).
struct FounderBand {
    double lo = 0.0;
    double hi = 0.0;
    double alpha = 1.0;
    double beta = 1.0;
};

struct AssignmentRules {
    std::map<std::string, FounderBand> bands;  // keyed by founder-type label
    double nudge = 0.01;
    std::set<std::string> nudge_geographies;
    std::set<std::string> nudge_sectors;
    bool stack_nudges = false;  // one nudge per qualifying axis instead of one total

    void validate() const;

    /// First-time: [0.1%, 12%], Beta(1, 6). Repeat: [1%, 20%], Beta(1, 11).
    /// +1% for CA/NY or AI/FinTech/SaaS, not stacked.
    static AssignmentRules defaults();

    /// defaults() with Healthcare added to the high-growth sectors.
    static AssignmentRules healthcare_high_growth();
};

/// Inverse CDF of Beta(alpha, beta) at u. Closed form when alpha == 1,
/// otherwise boost's incomplete-beta inverse.
double beta_quantile(double alpha, double beta, double u);

/// Applies the nudge (once, or per axis when stacking) and clamps to the band.
double apply_rules(double base_p, const Affiliation& deal, const FounderBand& band,
                   const AssignmentRules& rules);

/// Deal k draws its Beta variate from stream.substream(k), so the draw for a
/// slot does not depend on the other deals in the list.
std::vector<Deal> assign_probabilities(std::span<const Affiliation> deals,
                                       const AssignmentRules& rules, const RandomStream& stream);

}  // namespace vcrisk
