#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fatml/tabular.hpp"

namespace fatml {

/// Generator settings for the synthetic fatigue table. The target is built
/// from a known log-linear strength law so every downstream claim (feature
/// ranking, attribution signs, recovered R^2) can be checked against the
/// generating coefficients.
struct SynthConfig {
    size_t n_rows = 1000;
    double noise_std_log10 = 0.05;
    uint64_t seed = 1;

    // effect sizes on log10(strength)
    double base_log10 = 2.02;
    double r_slope = -0.25;      // stress ratio, the dominant effect
    double yield_slope = 0.15;   // per 1000 MPa of yield strength
    double tig_uplift = 0.10;    // TIG-dressed rows
    double height_slope = 0.02;  // per 300 mm of stiffener height
    double ratio_coeff = 0.35;   // width/thickness ratio term, when planted

    bool planted_collinear = false;      // adds a column ~ w_BP + l_S
    bool planted_ratio_feature = false;  // target gains the w_BP/t_BP term

    // optional per-column missingness injection (feature columns only)
    std::map<std::string, double> missing_rates;

    void validate() const;
};

/// Name of the extra near-duplicate column emitted when planted_collinear
/// is set.
inline const std::string& collinear_column_name() {
    static const std::string name = "w_plus_l";
    return name;
}

/// The generating law, kept alongside the data so tests and reports can
/// compare what a model learned against what was planted.
struct SynthTruth {
    double base_log10 = 0;
    double r_slope = 0;
    double yield_slope = 0;
    double tig_uplift = 0;
    double height_slope = 0;
    double ratio_coeff = 0;  // zero when the ratio term is off
    double noise_std_log10 = 0;
    std::string dominant_feature;       // "R"
    std::string treated_level;          // "TIG dressing"
    std::string collinear_column;       // empty when off

    double formula_log10(double r, double r_eh, bool tig, double h_s, double w_bp,
                         double t_bp) const;
    double target_mpa(double r, double r_eh, bool tig, double h_s, double w_bp,
                      double t_bp) const;
};

struct SynthResult {
    Dataset data;
    SynthTruth truth;
};

/// Schema of the generated table: the default catalog plus welding position
/// and process columns (and the planted near-duplicate when configured).
FeatureSchema synthetic_schema(const SynthConfig& cfg);

/// Deterministic per seed; all real values stay inside their schema ranges
/// (rows whose noisy target would leave (0, 500] MPa are redrawn).
SynthResult generate_synthetic(const SynthConfig& cfg);

}  // namespace fatml
