#include "fatml/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fatml/rng.hpp"

namespace fatml {

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::binary: return "binary";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::real: return "real";
    }
    return "real";
}

ColumnKind column_kind_from_string(std::string_view s) {
    if (s == "binary") return ColumnKind::binary;
    if (s == "categorical") return ColumnKind::categorical;
    if (s == "real") return ColumnKind::real;
    throw ConfigError("unknown column kind: " + std::string(s));
}

size_t FeatureSchema::index_of(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    throw MissingColumnError(name);
}

const ColumnSpec* FeatureSchema::find(const std::string& name) const {
    for (const auto& c : columns) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

bool FeatureSchema::is_target(const std::string& name) const {
    return std::find(target_names.begin(), target_names.end(), name) != target_names.end();
}

std::vector<std::string> FeatureSchema::feature_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) {
        if (!is_target(c.name)) out.push_back(c.name);
    }
    return out;
}

void FeatureSchema::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& c : columns) {
        if (!seen.insert(c.name).second) {
            throw SchemaMismatchError("duplicate column name: " + c.name);
        }
        if (c.kind == ColumnKind::real) {
            if (c.range && !(c.range->low < c.range->high)) {
                throw SchemaMismatchError("empty range for column: " + c.name);
            }
        } else if (c.levels.empty()) {
            throw SchemaMismatchError("no levels declared for column: " + c.name);
        }
    }
    std::unordered_set<std::string> target_seen;
    for (const auto& t : target_names) {
        if (!find(t)) throw MissingColumnError(t);
        if (!target_seen.insert(t).second) {
            throw SchemaMismatchError("target listed twice: " + t);
        }
    }
}

FeatureSchema default_table_schema() {
    auto real_col = [](std::string name, std::string unit, double lo, double hi) {
        ColumnSpec c;
        c.name = std::move(name);
        c.kind = ColumnKind::real;
        c.unit = std::move(unit);
        c.range = ValueRange{lo, hi};
        return c;
    };
    auto cat_col = [](std::string name, ColumnKind kind, std::vector<std::string> levels) {
        ColumnSpec c;
        c.name = std::move(name);
        c.kind = kind;
        c.levels = std::move(levels);
        return c;
    };

    FeatureSchema s;
    s.columns = {
        cat_col("Scale", ColumnKind::binary, {"small", "large"}),
        cat_col("Loading", ColumnKind::binary, {"axial", "bending"}),
        cat_col("I_A", ColumnKind::binary, {"yes", "no"}),
        real_col("f_T", "Hz", 1.0, 32.0),
        real_col("R_eH", "MPa", 235.0, 1125.0),
        real_col("R_m", "MPa", 275.0, 1420.0),
        cat_col("Pre_Treat", ColumnKind::categorical, {"none", "stress relieved", "other"}),
        cat_col("Post_Treat", ColumnKind::categorical,
                {"no weld post-treatment", "TIG dressing", "grinding", "hammer peening"}),
        cat_col("Weld_Type", ColumnKind::categorical, {"Fillet Weld", "Butt Weld"}),
        real_col("R_eH_filler", "MPa", 200.0, 800.0),
        real_col("R_m_filler", "MPa", 300.0, 900.0),
        real_col("l_BP", "mm", 50.0, 2000.0),
        real_col("w_BP", "mm", 10.0, 500.0),
        real_col("t_BP", "mm", 1.0, 100.0),
        real_col("h_S", "mm", 5.0, 300.0),
        real_col("l_S", "mm", 10.0, 1000.0),
        real_col("t_S", "mm", 1.0, 50.0),
        real_col("a_w", "mm", 1.0, 20.0),
        cat_col("Corrosion", ColumnKind::binary, {"yes", "no"}),
        real_col("R", "", -1.0, 0.8),
        real_col("delta_sigma_i", "MPa", 50.0, 1125.0),
        real_col("N_i", "", 0.0, 1.0),
        real_col("delta_sigma_c50", "MPa", 0.0, 500.0),
    };
    s.target_names = {"N_i", "delta_sigma_c50"};
    return s;
}

std::string CellIssue::describe() const {
    std::string what = kind == Kind::out_of_range ? "out-of-range value" : "unknown level";
    return what + " '" + value + "' at row " + std::to_string(row) + ", column " + column;
}

size_t Dataset::missing_count(size_t col) const {
    return static_cast<size_t>(std::count(missing_[col].begin(), missing_[col].end(), char(1)));
}

std::optional<double> Dataset::real_at(size_t col, size_t row) const {
    if (missing_[col][row]) return std::nullopt;
    return std::get<RealColumn>(columns_[col]).values[row];
}

std::optional<std::string_view> Dataset::label_at(size_t col, size_t row) const {
    if (missing_[col][row]) return std::nullopt;
    const auto& lc = std::get<LabelColumn>(columns_[col]);
    return std::string_view(lc.pool[static_cast<size_t>(lc.codes[row])]);
}

std::optional<double> Dataset::real_at(const std::string& col, size_t row) const {
    return real_at(schema_.index_of(col), row);
}

std::optional<std::string_view> Dataset::label_at(const std::string& col, size_t row) const {
    return label_at(schema_.index_of(col), row);
}

std::vector<double> Dataset::observed_reals(size_t col) const {
    std::vector<double> out;
    const auto& values = std::get<RealColumn>(columns_[col]).values;
    for (size_t r = 0; r < n_rows_; ++r) {
        if (!missing_[col][r]) out.push_back(values[r]);
    }
    return out;
}

std::vector<std::string> Dataset::observed_levels(size_t col) const {
    const auto& lc = std::get<LabelColumn>(columns_[col]);
    std::set<std::string> distinct;
    for (size_t r = 0; r < n_rows_; ++r) {
        if (!missing_[col][r]) distinct.insert(lc.pool[static_cast<size_t>(lc.codes[r])]);
    }
    return {distinct.begin(), distinct.end()};
}

Dataset Dataset::select_rows(const std::vector<size_t>& rows) const {
    DatasetBuilder b(schema_, rows.size());
    for (size_t c = 0; c < n_cols(); ++c) {
        for (size_t i = 0; i < rows.size(); ++i) {
            size_t r = rows[i];
            if (missing_[c][r]) continue;
            if (schema_.columns[c].is_real()) {
                b.set_real(c, i, std::get<RealColumn>(columns_[c]).values[r]);
            } else {
                b.set_label(c, i, *label_at(c, r));
            }
        }
    }
    return b.build();
}

Dataset Dataset::select_features(const std::vector<std::string>& features) const {
    FeatureSchema sub;
    sub.target_names = schema_.target_names;
    std::vector<size_t> keep;
    for (size_t c = 0; c < n_cols(); ++c) {
        const auto& name = schema_.columns[c].name;
        bool wanted = schema_.is_target(name) ||
                      std::find(features.begin(), features.end(), name) != features.end();
        if (wanted) {
            sub.columns.push_back(schema_.columns[c]);
            keep.push_back(c);
        }
    }
    for (const auto& f : features) {
        if (!schema_.find(f)) throw MissingColumnError(f);
    }
    DatasetBuilder b(sub, n_rows_);
    for (size_t j = 0; j < keep.size(); ++j) {
        size_t c = keep[j];
        for (size_t r = 0; r < n_rows_; ++r) {
            if (missing_[c][r]) continue;
            if (schema_.columns[c].is_real()) {
                b.set_real(j, r, std::get<RealColumn>(columns_[c]).values[r]);
            } else {
                b.set_label(j, r, *label_at(c, r));
            }
        }
    }
    return b.build();
}

DatasetBuilder::DatasetBuilder(FeatureSchema schema, size_t n_rows) {
    schema.validate();
    ds_.schema_ = std::move(schema);
    ds_.n_rows_ = n_rows;
    for (const auto& c : ds_.schema_.columns) {
        if (c.is_real()) {
            Dataset::RealColumn rc;
            rc.values.assign(n_rows, std::nan(""));
            ds_.columns_.emplace_back(std::move(rc));
        } else {
            Dataset::LabelColumn lc;
            lc.codes.assign(n_rows, -1);
            ds_.columns_.emplace_back(std::move(lc));
        }
        ds_.missing_.emplace_back(n_rows, char(1));
    }
}

int32_t DatasetBuilder::intern(size_t col, std::string_view level) {
    auto& lc = std::get<Dataset::LabelColumn>(ds_.columns_[col]);
    for (size_t i = 0; i < lc.pool.size(); ++i) {
        if (lc.pool[i] == level) return static_cast<int32_t>(i);
    }
    lc.pool.emplace_back(level);
    return static_cast<int32_t>(lc.pool.size() - 1);
}

void DatasetBuilder::set_real(size_t col, size_t row, double value) {
    if (!std::isfinite(value)) {
        throw DegenerateInputError("non-finite value for column " + ds_.schema_.columns[col].name);
    }
    std::get<Dataset::RealColumn>(ds_.columns_[col]).values[row] = value;
    ds_.missing_[col][row] = 0;
}

void DatasetBuilder::set_label(size_t col, size_t row, std::string_view level) {
    auto& lc = std::get<Dataset::LabelColumn>(ds_.columns_[col]);
    lc.codes[row] = intern(col, level);
    ds_.missing_[col][row] = 0;
}

void DatasetBuilder::set_missing(size_t col, size_t row) {
    if (ds_.schema_.columns[col].is_real()) {
        std::get<Dataset::RealColumn>(ds_.columns_[col]).values[row] = std::nan("");
    } else {
        std::get<Dataset::LabelColumn>(ds_.columns_[col]).codes[row] = -1;
    }
    ds_.missing_[col][row] = 1;
}

Dataset DatasetBuilder::build() {
    return std::move(ds_);
}

namespace {

// Split one CSV record. Handles quoted fields with doubled-quote escapes;
// everything the pipeline itself writes is unquoted.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

LoadResult load_csv(const std::string& path, const FeatureSchema& schema,
                    const std::vector<std::string>& missing_tokens) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path);
    std::vector<std::string> header = split_csv_line(line);

    // schema column -> file column
    std::vector<size_t> file_index(schema.columns.size());
    for (size_t c = 0; c < schema.columns.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), schema.columns[c].name);
        if (it == header.end()) throw MissingColumnError(schema.columns[c].name);
        file_index[c] = static_cast<size_t>(it - header.begin());
    }

    std::vector<std::vector<std::string>> records;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        records.push_back(split_csv_line(line));
    }

    auto is_missing_token = [&](const std::string& cell) {
        return std::find(missing_tokens.begin(), missing_tokens.end(), cell) !=
               missing_tokens.end();
    };

    DatasetBuilder b(schema, records.size());
    std::vector<CellIssue> issues;
    for (size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        for (size_t c = 0; c < schema.columns.size(); ++c) {
            const auto& spec = schema.columns[c];
            if (file_index[c] >= rec.size()) {
                throw CsvParseError(r, spec.name, "record too short");
            }
            const std::string& cell = rec[file_index[c]];
            if (is_missing_token(cell)) continue;  // cell stays masked
            if (spec.is_real()) {
                double v;
                if (!parse_double(cell, v)) {
                    throw CsvParseError(r, spec.name, "not a number: '" + cell + "'");
                }
                if (spec.range && (v < spec.range->low || v > spec.range->high)) {
                    issues.push_back({CellIssue::Kind::out_of_range, r, spec.name, cell});
                }
                b.set_real(c, r, v);
            } else {
                if (std::find(spec.levels.begin(), spec.levels.end(), cell) ==
                    spec.levels.end()) {
                    issues.push_back({CellIssue::Kind::unknown_level, r, spec.name, cell});
                }
                b.set_label(c, r, cell);
            }
        }
    }
    return {b.build(), std::move(issues)};
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const auto& cols = ds.schema().columns;
    for (size_t c = 0; c < cols.size(); ++c) {
        out << cols[c].name << (c + 1 < cols.size() ? "," : "\n");
    }
    for (size_t r = 0; r < ds.n_rows(); ++r) {
        for (size_t c = 0; c < cols.size(); ++c) {
            if (!ds.is_missing(c, r)) {
                if (cols[c].is_real()) {
                    out << format_double(*ds.real_at(c, r));
                } else {
                    out << *ds.label_at(c, r);
                }
            }
            out << (c + 1 < cols.size() ? "," : "\n");
        }
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

EdaReport eda_summary(const Dataset& ds, size_t bins) {
    if (bins < 1) throw ConfigError("eda bins must be >= 1");
    EdaReport report;
    report.n_rows = ds.n_rows();
    for (size_t c = 0; c < ds.n_cols(); ++c) {
        const auto& spec = ds.schema().columns[c];
        ColumnSummary s;
        s.name = spec.name;
        s.kind = spec.kind;
        s.n_missing = ds.missing_count(c);
        s.n_observed = ds.n_rows() - s.n_missing;
        s.missing_ratio = ds.n_rows() == 0
                              ? 0.0
                              : static_cast<double>(s.n_missing) / static_cast<double>(ds.n_rows());
        s.all_missing = s.n_observed == 0;
        if (s.all_missing) {
            report.columns.push_back(std::move(s));
            continue;
        }
        if (spec.is_real()) {
            std::vector<double> v = ds.observed_reals(c);
            std::sort(v.begin(), v.end());
            s.min = v.front();
            s.max = v.back();
            s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            s.median = v.size() % 2 == 1 ? v[v.size() / 2]
                                         : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
            double ss = 0.0;
            for (double x : v) ss += (x - s.mean) * (x - s.mean);
            s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;

            if (s.max == s.min) {
                s.histogram.edges = {s.min, s.max};
                s.histogram.counts = {v.size()};
            } else {
                double width = (s.max - s.min) / static_cast<double>(bins);
                for (size_t i = 0; i <= bins; ++i) {
                    s.histogram.edges.push_back(s.min + width * static_cast<double>(i));
                }
                s.histogram.counts.assign(bins, 0);
                for (double x : v) {
                    auto bin = static_cast<size_t>((x - s.min) / width);
                    if (bin >= bins) bin = bins - 1;  // max lands in the last bin
                    ++s.histogram.counts[bin];
                }
            }
        } else {
            std::unordered_map<std::string, size_t> counts;
            for (size_t r = 0; r < ds.n_rows(); ++r) {
                if (auto lvl = ds.label_at(c, r)) ++counts[std::string(*lvl)];
            }
            s.level_counts.assign(counts.begin(), counts.end());
            std::sort(s.level_counts.begin(), s.level_counts.end(),
                      [](const auto& a, const auto& b) {
                          if (a.second != b.second) return a.second > b.second;
                          return a.first < b.first;
                      });
        }
        report.columns.push_back(std::move(s));
    }
    return report;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0, 1)");
    }
    size_t n = ds.n_rows();
    auto n_test = static_cast<size_t>(
        std::ceil(static_cast<double>(n) * test_fraction - 1e-12));
    if (n_test == 0 || n_test >= n) throw TooFewRowsError(n, 2);

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));
    Rng rng = Rng(seed).stream("train_test_split");
    rng.shuffle(order);

    std::vector<size_t> test_rows(order.begin(), order.begin() + static_cast<long>(n_test));
    std::vector<size_t> train_rows(order.begin() + static_cast<long>(n_test), order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {ds.select_rows(train_rows), ds.select_rows(test_rows)};
}

}  // namespace fatml
