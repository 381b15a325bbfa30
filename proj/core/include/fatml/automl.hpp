#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fatml/evalx.hpp"
#include "fatml/explain.hpp"
#include "fatml/features.hpp"
#include "fatml/learners.hpp"
#include "fatml/preprocess.hpp"
#include "fatml/tabular.hpp"

namespace fatml {

struct HypothesisConfig {
    std::string name;
    std::vector<std::string> features;
};

// M1 covers geometry, base-material strength, loading and post-treatment;
// M2 adds welding position and process; M3 adds process-sensitive extras.
HypothesisConfig hypothesis_config(const std::string& name);
std::vector<std::string> hypothesis_names();

enum class TrialStatus { completed, failed, skipped };

struct TrialRecord {
    size_t trial_id = 0;
    LearnerSpec spec;
    TrialStatus status = TrialStatus::completed;
    std::string error;
    std::vector<double> fold_rmse;
    double mean_cv_rmse = 0;
    std::vector<double> oof;  // one held-out prediction per training row
    std::vector<size_t> fold_best_iterations;  // nonzero for iterative fits
    double wall_seconds = 0;  // informational; excluded from run manifests
};

// Decile-stratified shuffled k-fold fit/predict for one spec. The fold
// assignment depends only on (y, k, seed), so every trial in a search sees
// the same folds and out-of-fold vectors stay comparable.
TrialRecord cross_validate(const LearnerSpec& spec, const Matrix& X,
                           const std::vector<double>& y, size_t k, uint64_t seed,
                           size_t jobs = 1);

std::vector<size_t> stratified_fold_assignment(const std::vector<double>& y, size_t k,
                                               uint64_t seed);

struct HpoOptions {
    std::vector<std::string> spaces;  // empty selects every search space
    size_t max_trials = 64;
    double budget_seconds = 3600;
    size_t cv_folds = 5;
    uint64_t seed = 0;
    int jobs = 0;
};

// Seeded random search, round-robin across spaces. The trial sequence is
// generated serially up front; the time budget only truncates how many
// trials run, never which specs they use.
std::vector<TrialRecord> hpo_search(const Matrix& X, const std::vector<double>& y,
                                    const HpoOptions& options);

// Trial indices ranked best-first (completed trials by mean CV RMSE, then
// everything else in id order).
std::vector<size_t> leaderboard_order(const std::vector<TrialRecord>& trials);

struct EnsembleDefinition {
    std::vector<size_t> member_trials;  // distinct trial ids, ascending
    std::vector<double> weights;        // aligned; non-negative, sums to 1
    std::vector<size_t> counts;         // greedy selection counts
    double oof_rmse = 0;
    std::vector<double> oof;  // blended out-of-fold predictions
};

// Forward selection with replacement on out-of-fold RMSE, starting from the
// single best trial; only strict improvements are accepted.
EnsembleDefinition greedy_ensemble(const std::vector<TrialRecord>& trials,
                                   const std::vector<double>& y, size_t max_members = 25);

std::vector<double> ensemble_predict(const std::vector<FittedModel>& members,
                                     const std::vector<double>& weights, const Matrix& X);

struct RunOptions {
    std::string target = "delta_sigma_c50";
    std::vector<ImputeSpec> impute_overrides;  // replace or extend the defaults
    bool vif_enabled = true;
    double vif_threshold = 5.0;
    bool golden_enabled = false;
    AuditPolicy audit_policy = AuditPolicy::strict;
    std::vector<std::string> spaces;  // search spaces to draw from; empty keeps all
    size_t max_trials = 64;
    double budget_seconds = 3600;
    size_t cv_folds = 5;
    size_t ensemble_max_members = 25;
    uint64_t seed_pipeline = 1;
    uint64_t seed_search = 2;
    uint64_t seed_explain = 3;
    Band eval_band{0.0, 150.0};
    size_t explain_rows = 256;      // test rows explained (seeded sample)
    size_t background_rows = 128;   // training rows behind attribution
    size_t shap_samples = 1024;     // sampling path budget per row
    size_t importance_repeats = 5;
    int jobs = 0;
};

struct RunResult {
    HypothesisConfig hypothesis;
    RunOptions options;
    FittedPipeline pipeline;

    bool vif_ran = false;
    VifScreenResult vif;
    std::vector<GoldenFeature> golden;
    std::vector<AuditFlag> golden_flags;
    std::vector<std::string> golden_used;  // recipes added as model columns

    std::vector<std::string> model_features;  // encoded columns fed to models
    std::vector<TrialRecord> trials;
    EnsembleDefinition ensemble;
    std::vector<FittedModel> final_members;  // refit on the full training set
    std::vector<double> member_weights;

    std::vector<double> train_actual_mpa, train_pred_mpa;
    std::vector<double> test_actual_mpa, test_pred_mpa;
    Metrics train_full, train_band, test_full, test_band;
    ParityTable parity_train, parity_test;

    std::vector<size_t> explained_rows;  // test row indices behind shap
    ShapMatrix shap;                     // transformed target units
    ShapReports reports;
    ImportanceTable importance;          // permutation importance, test rows
};

// Full pipeline on a frozen train/test split. The test partition is touched
// only by the final scoring and explanation stages.
RunResult run(const Dataset& train, const Dataset& test, const HypothesisConfig& hypothesis,
              const RunOptions& options);

}  // namespace fatml
