#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fatml/learners.hpp"
#include "fatml/matrix.hpp"

namespace fatml {

struct ShapMatrix {
    double base_value = 0;  // mean model prediction over the background
    Matrix values;          // one attribution row per explained row
    std::vector<std::string> feature_names;
    size_t background_size = 0;
    std::string background_source;
};

struct ShapOptions {
    std::vector<std::string> feature_names;
    size_t n_samples = 2048;  // sampling path only; rounded up to full cycles
    uint64_t seed = 0;
    int jobs = 0;
};

// Attribution dispatch: closed form for linear models, exact interventional
// attribution along tree paths for tree ensembles, seeded antithetic
// permutation sampling for networks. base_value + row sum reproduces the
// model prediction for every row.
ShapMatrix shap_values(const FittedModel& model, const Matrix& X_explain,
                       const Matrix& background, const ShapOptions& options = {});

// Linear combination of member attributions; weights need not sum to one.
ShapMatrix shap_weighted_sum(const std::vector<ShapMatrix>& parts,
                             const std::vector<double>& weights);

struct ImportanceEntry {
    std::string feature;
    double mean_degradation = 0;
    double std_degradation = 0;
};

struct ImportanceTable {
    double baseline_metric = 0;  // rmse on the unpermuted data
    std::vector<ImportanceEntry> entries;  // descending mean degradation
};

ImportanceTable permutation_importance(const FittedModel& model, const Matrix& X,
                                       const std::vector<double>& y,
                                       const std::vector<std::string>& names, size_t repeats,
                                       uint64_t seed, int jobs = 0);

// Same measurement against any batch predictor (e.g. an ensemble). The
// predictor must be safe to call from several threads at once.
using BatchPredictor = std::function<std::vector<double>(const Matrix&)>;

ImportanceTable permutation_importance(const BatchPredictor& predict, const Matrix& X,
                                       const std::vector<double>& y,
                                       const std::vector<std::string>& names, size_t repeats,
                                       uint64_t seed, int jobs = 0);

struct ShapImportanceEntry {
    std::string feature;
    double mean_abs = 0;
};

struct BeeswarmPoint {
    size_t row = 0;
    size_t feature = 0;
    double shap = 0;
    double normalized_value = 0;  // min-max scaled feature value in [0,1]
};

struct DependencePoint {
    double feature_value = 0;
    double shap = 0;
};

struct AttributionStep {
    std::string feature;
    double shap = 0;
    double cumulative = 0;  // running total from base_value
};

struct DecisionRecord {
    size_t row = 0;
    double prediction = 0;
    double actual = 0;
    std::vector<AttributionStep> steps;  // largest |shap| first, ends at prediction
};

struct ShapReports {
    std::vector<ShapImportanceEntry> importance;  // mean |shap| descending
    std::vector<BeeswarmPoint> beeswarm;
    std::vector<std::vector<DependencePoint>> dependence;  // per feature
    std::vector<DecisionRecord> best;   // k smallest absolute errors
    std::vector<DecisionRecord> worst;  // k largest
};

ShapReports shap_reports(const ShapMatrix& shap, const Matrix& X_explain,
                         const std::vector<double>& predictions,
                         const std::vector<double>& actuals, size_t k = 10);

// Intercept first, then one coefficient per encoded feature.
std::vector<std::pair<std::string, double>> linear_coefficients(
    const FittedModel& model, const std::vector<std::string>& names);

}  // namespace fatml
