#pragma once

#include <string>
#include <vector>

#include "vcrisk/report.hpp"
#include "vcrisk/scenario.hpp"

namespace vcrisk::test {

inline const UniverseContext& fixture() {
    static const UniverseContext ctx = report::load_context(VCRISK_DATA_DIR "/fixture_sigma.csv");
    return ctx;
}

inline std::string data_path(const std::string& rel) { return std::string(VCRISK_DATA_DIR) + "/" + rel; }

inline Portfolio homogeneous(std::size_t n, double p, const Affiliation& a) {
    Portfolio out;
    out.label = "homogeneous";
    for (std::size_t k = 0; k < n; ++k) out.deals.push_back({"d" + std::to_string(k), p, a});
    return out;
}

// Σ with one common off-diagonal value and the fixture's labels/kinds.
inline FactorUniverse equicorrelated(double rho) {
    const auto& groups = fixture().universe.groups();
    const auto n = static_cast<Eigen::Index>(groups.size());
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, rho);
    s.diagonal().setOnes();
    return FactorUniverse(groups, s);
}

}  // namespace vcrisk::test
