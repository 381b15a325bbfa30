#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"

#include "fatml/errors.hpp"
#include "fatml/tabular.hpp"

using namespace fatml;

namespace {

FeatureSchema tiny_schema() {
    FeatureSchema s;
    ColumnSpec a;
    a.name = "width";
    a.kind = ColumnKind::real;
    a.unit = "mm";
    a.range = ValueRange{0.0, 100.0};
    ColumnSpec b;
    b.name = "treated";
    b.kind = ColumnKind::binary;
    b.levels = {"yes", "no"};
    ColumnSpec t;
    t.name = "strength";
    t.kind = ColumnKind::real;
    t.unit = "MPa";
    s.columns = {a, b, t};
    s.target_names = {"strength"};
    return s;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        path = "tabular_test_tmp.csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("schema lookups and validation") {
    FeatureSchema s = tiny_schema();
    CHECK(s.index_of("treated") == 1);
    CHECK_THROWS_AS(s.index_of("absent"), MissingColumnError);
    CHECK(s.find("width") != nullptr);
    CHECK(s.find("absent") == nullptr);
    CHECK(s.is_target("strength"));
    CHECK_FALSE(s.is_target("width"));
    CHECK(s.feature_names() == std::vector<std::string>{"width", "treated"});
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("builder round trip with missing cells") {
    DatasetBuilder b(tiny_schema(), 3);
    b.set_real(0, 0, 12.5);
    b.set_label(1, 0, "yes");
    b.set_real(2, 0, 140.0);
    b.set_real(0, 1, 31.25);
    b.set_label(1, 2, "no");
    Dataset ds = b.build();

    CHECK(ds.n_rows() == 3);
    CHECK(ds.real_at("width", 0) == 12.5);
    CHECK(ds.label_at("treated", 0) == "yes");
    CHECK_FALSE(ds.real_at("width", 2).has_value());
    CHECK(ds.is_missing(2, 1));
    CHECK(ds.missing_count(0) == 1);
    CHECK(ds.observed_reals(0) == std::vector<double>{12.5, 31.25});
    CHECK(ds.observed_levels(1) == std::vector<std::string>{"no", "yes"});
}

TEST_CASE("select_rows and select_features keep targets") {
    DatasetBuilder b(tiny_schema(), 4);
    for (size_t r = 0; r < 4; ++r) {
        b.set_real(0, r, static_cast<double>(r));
        b.set_label(1, r, r % 2 ? "yes" : "no");
        b.set_real(2, r, 100.0 + static_cast<double>(r));
    }
    Dataset ds = b.build();

    Dataset sub = ds.select_rows({3, 1});
    CHECK(sub.n_rows() == 2);
    CHECK(sub.real_at("width", 0) == 3.0);
    CHECK(sub.real_at("width", 1) == 1.0);

    Dataset feat = ds.select_features({"treated"});
    CHECK(feat.schema().find("width") == nullptr);
    CHECK(feat.schema().find("treated") != nullptr);
    CHECK(feat.real_at("strength", 2) == 102.0);  // target survives selection
}

TEST_CASE("csv loading handles missing tokens, issues, and extras") {
    TempFile f(
        "width,treated,strength,ignored\n"
        "10.5,yes,120,junk\n"
        "NA,no,130,junk\n"
        "250,maybe,140,junk\n");
    LoadResult loaded = load_csv(f.path, tiny_schema());
    const Dataset& ds = loaded.data;

    CHECK(ds.n_rows() == 3);
    CHECK(ds.real_at("width", 0) == 10.5);
    CHECK(ds.is_missing(0, 1));
    // out-of-range and unknown-level cells are flagged but retained
    CHECK(ds.real_at("width", 2) == 250.0);
    REQUIRE(loaded.issues.size() == 2);
    CHECK(loaded.issues[0].kind == CellIssue::Kind::out_of_range);
    CHECK(loaded.issues[0].column == "width");
    CHECK(loaded.issues[1].kind == CellIssue::Kind::unknown_level);
    CHECK_FALSE(loaded.issues[1].describe().empty());
}

TEST_CASE("csv loading rejects malformed numbers and absent columns") {
    TempFile bad_number(
        "width,treated,strength\n"
        "abc,yes,120\n");
    CHECK_THROWS_AS(load_csv(bad_number.path, tiny_schema()), CsvParseError);

    TempFile missing_column(
        "width,strength\n"
        "10,120\n");
    CHECK_THROWS_AS(load_csv(missing_column.path, tiny_schema()), MissingColumnError);
}

TEST_CASE("write_csv then load_csv round-trips values exactly") {
    DatasetBuilder b(tiny_schema(), 3);
    b.set_real(0, 0, 0.1);
    b.set_real(0, 1, 1.0 / 3.0);
    b.set_label(1, 0, "yes");
    b.set_real(2, 0, 123.456);
    b.set_real(2, 1, 1e-30);
    b.set_real(2, 2, 499.999999999);
    Dataset ds = b.build();

    write_csv(ds, "tabular_roundtrip_tmp.csv");
    LoadResult loaded = load_csv("tabular_roundtrip_tmp.csv", tiny_schema());
    std::remove("tabular_roundtrip_tmp.csv");

    CHECK(loaded.data.real_at("width", 1) == 1.0 / 3.0);
    CHECK(loaded.data.real_at("strength", 1) == 1e-30);
    CHECK(loaded.data.real_at("strength", 2) == 499.999999999);
    CHECK(loaded.data.is_missing(0, 2));
}

TEST_CASE("format_double is shortest-round-trip") {
    for (double v : {0.1, 1.0 / 3.0, -0.0, 1e300, 5e-324, 123456.789, 2.02}) {
        std::string text = format_double(v);
        double parsed = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
        CHECK(ec == std::errc{});
        CHECK(ptr == text.data() + text.size());
        CHECK(parsed == v);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("eda summary profiles both column kinds") {
    DatasetBuilder b(tiny_schema(), 10);
    for (size_t r = 0; r < 10; ++r) {
        if (r != 7) b.set_real(0, r, static_cast<double>(r));
        b.set_label(1, r, r < 6 ? "no" : "yes");
        b.set_real(2, r, 100.0);
    }
    Dataset ds = b.build();
    EdaReport report = eda_summary(ds, 4);

    REQUIRE(report.columns.size() == 3);
    const ColumnSummary& width = report.columns[0];
    CHECK(width.n_observed == 9);
    CHECK(width.n_missing == 1);
    CHECK(width.missing_ratio == doctest::Approx(0.1));
    CHECK(width.min == 0.0);
    CHECK(width.max == 9.0);
    size_t total = 0;
    for (size_t c : width.histogram.counts) total += c;
    CHECK(total == 9);
    REQUIRE(width.histogram.edges.size() == 5);
    for (size_t i = 1; i < width.histogram.edges.size(); ++i) {
        CHECK(width.histogram.edges[i] > width.histogram.edges[i - 1]);
    }

    const ColumnSummary& treated = report.columns[1];
    REQUIRE(treated.level_counts.size() == 2);
    CHECK(treated.level_counts[0].first == "no");  // sorted by descending count
    CHECK(treated.level_counts[0].second == 6);
}

TEST_CASE("train test split is disjoint, sized, and seeded") {
    DatasetBuilder b(tiny_schema(), 10);
    for (size_t r = 0; r < 10; ++r) {
        b.set_real(0, r, static_cast<double>(r));
        b.set_label(1, r, "yes");
        b.set_real(2, r, 100.0 + static_cast<double>(r));
    }
    Dataset ds = b.build();

    auto [train, test] = train_test_split(ds, 0.25, 11);
    CHECK(test.n_rows() == 3);  // ceil(10 * 0.25)
    CHECK(train.n_rows() == 7);

    std::multiset<double> seen;
    for (size_t r = 0; r < train.n_rows(); ++r) seen.insert(*train.real_at("width", r));
    for (size_t r = 0; r < test.n_rows(); ++r) seen.insert(*test.real_at("width", r));
    CHECK(seen.size() == 10);
    CHECK(std::set<double>(seen.begin(), seen.end()).size() == 10);  // disjoint partitions

    auto [train2, test2] = train_test_split(ds, 0.25, 11);
    for (size_t r = 0; r < test.n_rows(); ++r) {
        CHECK(test.real_at("width", r) == test2.real_at("width", r));
    }
}

TEST_CASE("the built-in schema names the fatigue catalog") {
    FeatureSchema s = default_table_schema();
    CHECK_NOTHROW(s.validate());
    CHECK(s.is_target("delta_sigma_c50"));
    CHECK(s.find("R") != nullptr);
    CHECK(s.find("R")->range->low == -1.0);
    CHECK(s.find("Post_Treat")->kind == ColumnKind::categorical);
    CHECK(s.find("w_BP")->unit == "mm");
}
