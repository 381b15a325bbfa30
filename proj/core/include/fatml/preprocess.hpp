#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "fatml/matrix.hpp"
#include "fatml/tabular.hpp"

namespace fatml {

enum class ImputeStrategy { median, random_sample, constant };

struct ImputeSpec {
    std::string column;
    ImputeStrategy strategy = ImputeStrategy::median;
    // constant fills use whichever of these matches the column kind
    double constant_real = 0.0;
    std::string constant_label;
};

/// The per-column defaults: median for geometry and stress-range columns,
/// draws from the observed pool for strength/ratio/frequency columns, and
/// documented domain constants for the treatment and weld-type labels.
/// Remaining label columns fall back to pool draws.
std::vector<ImputeSpec> build_default_impute_specs(const FeatureSchema& schema);

struct FittedImputer {
    ImputeStrategy strategy = ImputeStrategy::median;
    double median = 0.0;
    std::vector<double> pool;             // sorted observed training values
    std::vector<std::string> label_pool;  // sorted observed training labels
    double constant_real = 0.0;
    std::string constant_label;
};

struct FittedEncoder {
    std::vector<std::string> levels;  // sorted training levels
    bool binary = false;              // emit one 0/1 column instead of one per level
};

struct TargetTransform {
    bool log10 = true;
    double yj_lambda = 1.0;
    double mu = 0.0;
    double sigma = 1.0;
};

/// Frozen preprocessing state. Everything here was fitted on the training
/// partition only; applying to any conforming dataset is a pure function of
/// this state plus the caller's seed (which drives pool draws).
struct FittedPipeline {
    FeatureSchema schema;
    std::string target;
    uint64_t seed = 0;  // seed used to materialize the training matrix at fit time

    std::map<std::string, FittedImputer> imputers;
    std::map<std::string, FittedEncoder> encoders;
    TargetTransform target_transform;

    std::vector<std::string> feature_names;  // post-encoding column names
    std::vector<double> feature_mu;
    std::vector<double> feature_sigma;  // 1.0 where the column was constant

    nlohmann::json to_json() const;
    static FittedPipeline from_json(const nlohmann::json& j);
};

struct EncodedData {
    Matrix X;
    std::vector<double> y;  // transformed target
    std::vector<std::string> feature_names;
};

/// Fit imputers, encoders, the target chain (decadic log, then the power
/// transform, then standardization) and feature moments on the training
/// partition. Pass the same seed to apply_pipeline on the training set to
/// reproduce the exact matrix the moments were computed from.
FittedPipeline fit_pipeline(const Dataset& train, const std::vector<ImputeSpec>& specs,
                            const std::string& target, uint64_t seed);

EncodedData apply_pipeline(const FittedPipeline& p, const Dataset& ds, uint64_t seed);

/// Map transformed-space predictions back to MPa.
std::vector<double> inverse_target(const FittedPipeline& p,
                                   const std::vector<double>& y_transformed);
double inverse_target_one(const FittedPipeline& p, double y_transformed);

enum class TransformDirection { forward, inverse };

double yj_forward(double x, double lambda);
double yj_inverse(double x, double lambda);
std::vector<double> yj_transform(const std::vector<double>& values, double lambda,
                                 TransformDirection direction);

/// Profile log-likelihood of the power transform at a given lambda
/// (normal model on the transformed values plus the Jacobian term).
double yj_log_likelihood(const std::vector<double>& values, double lambda);

/// Maximizer of yj_log_likelihood over [-5, 5] to 1e-6, ties toward 1.
double yj_fit_lambda(const std::vector<double>& values);

nlohmann::json schema_to_json(const FeatureSchema& s);
FeatureSchema schema_from_json(const nlohmann::json& j);

}  // namespace fatml
