#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fatml/errors.hpp"

namespace fatml {

enum class ColumnKind { binary, categorical, real };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view s);

/// Closed interval for plausible real values. Cells outside are flagged at
/// load time but kept; downstream stages decide what to do with them.
struct ValueRange {
    double low;
    double high;
};

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::real;
    std::string unit;  // "MPa", "mm", "Hz"; empty for dimensionless
    std::optional<ValueRange> range;           // real columns only
    std::vector<std::string> levels;           // binary/categorical columns

    bool is_real() const { return kind == ColumnKind::real; }
};

/// Ordered column catalog plus the names of target columns. Targets are
/// ordinary columns of the table; the split is semantic, not structural.
struct FeatureSchema {
    std::vector<ColumnSpec> columns;
    std::vector<std::string> target_names;

    size_t index_of(const std::string& name) const;  // throws MissingColumnError
    const ColumnSpec* find(const std::string& name) const;
    bool is_target(const std::string& name) const;
    std::vector<std::string> feature_names() const;  // columns minus targets
    void validate() const;
};

/// The fatigue test-series catalog used as the default schema: geometry and
/// material descriptors of a welded transverse stiffener, the loading
/// conditions, and two targets (cycle count and 2e6-cycle strength in MPa).
FeatureSchema default_table_schema();

struct CellIssue {
    enum class Kind { out_of_range, unknown_level };
    Kind kind;
    size_t row;  // 0-based data row (header excluded)
    std::string column;
    std::string value;  // raw cell text
    std::string describe() const;
};

/// Immutable column-major table with a per-cell missingness mask. Real
/// columns store doubles; binary/categorical columns store interned level
/// codes. Reads of masked cells come back empty rather than as garbage.
class Dataset {
public:
    size_t n_rows() const { return n_rows_; }
    size_t n_cols() const { return schema_.columns.size(); }
    const FeatureSchema& schema() const { return schema_; }

    bool is_missing(size_t col, size_t row) const { return missing_[col][row]; }
    size_t missing_count(size_t col) const;

    std::optional<double> real_at(size_t col, size_t row) const;
    std::optional<std::string_view> label_at(size_t col, size_t row) const;
    std::optional<double> real_at(const std::string& col, size_t row) const;
    std::optional<std::string_view> label_at(const std::string& col, size_t row) const;

    /// Non-missing values of a real column, in row order.
    std::vector<double> observed_reals(size_t col) const;
    /// Distinct observed levels of a binary/categorical column, sorted.
    std::vector<std::string> observed_levels(size_t col) const;

    Dataset select_rows(const std::vector<size_t>& rows) const;
    /// Keep the named feature columns (plus all targets), in schema order.
    Dataset select_features(const std::vector<std::string>& features) const;

private:
    friend class DatasetBuilder;

    struct RealColumn {
        std::vector<double> values;
    };
    struct LabelColumn {
        std::vector<int32_t> codes;       // -1 where missing
        std::vector<std::string> pool;    // interned levels, first-seen order
    };
    using ColumnData = std::variant<RealColumn, LabelColumn>;

    FeatureSchema schema_;
    size_t n_rows_ = 0;
    std::vector<ColumnData> columns_;
    std::vector<std::vector<char>> missing_;  // [col][row]
};

/// Row-wise assembly of a Dataset. Every cell starts missing; build()
/// freezes the result.
class DatasetBuilder {
public:
    DatasetBuilder(FeatureSchema schema, size_t n_rows);

    void set_real(size_t col, size_t row, double value);
    void set_label(size_t col, size_t row, std::string_view level);
    void set_missing(size_t col, size_t row);
    size_t column_index(const std::string& name) const { return ds_.schema_.index_of(name); }

    Dataset build();

private:
    Dataset ds_;
    int32_t intern(size_t col, std::string_view level);
};

inline const std::vector<std::string>& default_missing_tokens() {
    static const std::vector<std::string> tokens = {"", "NA", "NaN", "-"};
    return tokens;
}

struct LoadResult {
    Dataset data;
    std::vector<CellIssue> issues;  // out-of-range / unknown-level, retained cells
};

/// Read a comma-separated UTF-8 file with a header row. Columns are matched
/// by header name against the schema; extra file columns are ignored. Cells
/// equal to a missing token set the mask. Malformed numbers and absent
/// schema columns throw; range and level violations are collected.
LoadResult load_csv(const std::string& path, const FeatureSchema& schema,
                    const std::vector<std::string>& missing_tokens = default_missing_tokens());

/// Write the dataset back out as CSV (missing cells become empty fields);
/// real values round-trip exactly.
void write_csv(const Dataset& ds, const std::string& path);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

struct HistogramData {
    std::vector<double> edges;   // bins+1 edges; last bin closed on the right
    std::vector<size_t> counts;
};

struct ColumnSummary {
    std::string name;
    ColumnKind kind;
    size_t n_observed = 0;
    size_t n_missing = 0;
    double missing_ratio = 0.0;
    bool all_missing = false;

    // real columns
    double min = 0, max = 0, mean = 0, median = 0, stddev = 0;
    HistogramData histogram;

    // binary/categorical columns, sorted by descending count then name
    std::vector<std::pair<std::string, size_t>> level_counts;
};

struct EdaReport {
    size_t n_rows = 0;
    std::vector<ColumnSummary> columns;
};

EdaReport eda_summary(const Dataset& ds, size_t bins);

/// Disjoint (train, test) row partition; the test side gets ceil(n*fraction)
/// rows. Same seed means the same partition, always.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             uint64_t seed);

}  // namespace fatml
