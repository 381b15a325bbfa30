#pragma once

#include <string>
#include <vector>

#include "fatml/automl.hpp"
#include "fatml/evalx.hpp"
#include "fatml/explain.hpp"

namespace fatml::cli {

/// Measured-vs-predicted scatter with the identity line and two dashed
/// residual band pairs at 1.5 and 2 standard deviations.
std::string parity_svg(const ParityTable& table, const std::string& title,
                       const std::string& unit);

/// Horizontal bar chart; items arrive sorted descending.
std::string importance_svg(const std::vector<std::pair<std::string, double>>& items,
                           const std::string& title, const std::string& value_label);

/// One horizontal lane per feature, points placed at their attribution with
/// a blue-to-red fill encoding the normalized feature value.
std::string beeswarm_svg(const ShapReports& reports,
                         const std::vector<std::string>& feature_names,
                         size_t max_features, const std::string& title);

/// Cross-validation RMSE of every completed trial, one lane per search
/// space, so the spread of each family is visible at a glance.
std::string rmse_strip_svg(const std::vector<TrialRecord>& trials, const std::string& title);

}  // namespace fatml::cli
