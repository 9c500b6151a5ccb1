#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vcrisk/factor_model.hpp"

namespace vcrisk {

// Labeled correlation CSV:
//
//   label,AI,FinTech,...
//   AI,1,0.65,...
//
// values printed with 12 significant digits. Group kinds live in a sidecar
// "<stem>.kinds.csv" next to it with rows "label,kind".

struct LabeledMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;
};

std::string format_sigma_csv(const std::vector<std::string>& labels, const Eigen::MatrixXd& sigma);
LabeledMatrix parse_sigma_csv(std::string_view text);

std::string format_kinds_csv(const std::vector<FactorGroup>& groups);
std::vector<FactorGroup> parse_kinds_csv(std::string_view text);

std::filesystem::path kinds_sidecar_path(const std::filesystem::path& sigma_csv);

/// Loads the matrix and its kind sidecar; labels must match one-to-one.
FactorUniverse load_universe(const std::filesystem::path& sigma_csv);
void save_universe(const FactorUniverse& universe, const std::filesystem::path& sigma_csv);

}  // namespace vcrisk
