#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fatml/gbdt.hpp"
#include "fatml/matrix.hpp"
#include "fatml/nn.hpp"
#include "fatml/rng.hpp"
#include "fatml/tree.hpp"

#include "json.hpp"

namespace fatml {

enum class Family {
    baseline,
    linear,
    tree,
    random_forest,
    extra_trees,
    gbdt,
    gbdt_leafwise,
    nn,
};

std::string family_name(Family family);
Family family_from_name(const std::string& name);

// A learner spec is a family plus a flat bag of numeric hyperparameters.
// `space` records which search space produced it ("gbdt_cat" shares the
// gbdt family but samples a different region).
struct LearnerSpec {
    Family family = Family::baseline;
    std::string space;
    std::map<std::string, double> hp;
    uint64_t seed = 0;

    double hp_or(const std::string& key, double fallback) const;
};

struct ConstantModel {
    double value = 0;
};

struct LinearModel {
    double intercept = 0;
    std::vector<double> coef;
};

struct FittedModel {
    LearnerSpec spec;
    size_t n_features = 0;
    std::variant<ConstantModel, LinearModel, Tree, Forest, GbdtModel, NnModel> model;
    std::vector<TrainLogRow> training_log;
    size_t best_iteration = 0;  // 1-based; 0 when the family is not iterative

    double predict_row(const double* x) const;
    std::vector<double> predict(const Matrix& X) const;
};

FittedModel fit(const Matrix& X, const std::vector<double>& y, const LearnerSpec& spec,
                std::optional<ValidationRef> validation = std::nullopt, size_t jobs = 1);

// Per-iteration train/validation curve. Throws NotIterativeError for
// families that fit in a single shot.
const std::vector<TrainLogRow>& learning_curve(const FittedModel& model);

nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

// Search spaces for hyperparameter sampling.
std::vector<std::string> search_space_names();
LearnerSpec sample_spec(const std::string& space, Rng& rng, uint64_t model_seed);
bool check_in_search_space(const LearnerSpec& spec);

}  // namespace fatml
