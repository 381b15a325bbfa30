#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fatml/matrix.hpp"
#include "fatml/tabular.hpp"

namespace fatml {

struct CorrelationResult {
    std::vector<std::string> names;  // non-constant columns, input order
    Matrix r;                        // names.size() square, symmetric, unit diagonal
    std::vector<std::string> constant_columns;
};

CorrelationResult correlation_matrix(const Matrix& X, const std::vector<std::string>& names);

struct VifEntry {
    std::string feature;
    double r_squared = 0;  // auxiliary-regression fit of this column on the others
    double vif = 1;        // 1/(1 - r_squared), +inf sentinel near a perfect fit
};

// Sorted descending by vif (ties by name ascending). Each auxiliary
// regression includes an intercept. Requires n > d.
std::vector<VifEntry> compute_vif(const Matrix& X, const std::vector<std::string>& names);

struct VifScreenResult {
    std::vector<std::string> kept;     // input order
    std::vector<std::string> dropped;  // drop order
    std::vector<std::vector<VifEntry>> rounds;
};

// Repeatedly drops the single highest-VIF column above the threshold and
// recomputes until all remaining columns pass.
VifScreenResult vif_screen(const Matrix& X, const std::vector<std::string>& names,
                           double threshold);

double derive_overhang(double w_bp, double l_s);

enum class GoldenOp { subtract, divide };

std::string golden_op_name(GoldenOp op);

struct GoldenFeature {
    std::string lhs;
    std::string rhs;
    GoldenOp op = GoldenOp::subtract;
    double score = 0;  // held-out MSE of the single-feature scoring tree
    std::string recipe;

    std::vector<double> materialize(const Matrix& X,
                                    const std::vector<std::string>& names) const;
};

// Scores every pairwise subtract/divide candidate with a depth-3 regression
// tree on a seeded 50/50 split and keeps the best round(0.05*d) of them,
// clamped to [5, 50]. Results are invariant to input column order.
std::vector<GoldenFeature> discover_golden(const Matrix& X, const std::vector<double>& y,
                                           const std::vector<std::string>& names,
                                           uint64_t seed, int jobs = 0);

enum class AuditReason { indicator_arithmetic, mixed_kind, unit_mismatch };

std::string audit_reason_name(AuditReason reason);

struct AuditFlag {
    GoldenFeature feature;
    AuditReason reason = AuditReason::unit_mismatch;
};

enum class AuditPolicy { strict, lenient };

// Machine-checkable consistency audit against the schema. Strict policy also
// flags division across different units; lenient allows cross-unit ratios.
std::vector<AuditFlag> audit_golden(const std::vector<GoldenFeature>& features,
                                    const FeatureSchema& schema,
                                    AuditPolicy policy = AuditPolicy::strict);

std::string format_golden_report(const std::vector<GoldenFeature>& features,
                                 const std::vector<AuditFlag>& flags);

}  // namespace fatml
