#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "fatml/errors.hpp"
#include "fatml/preprocess.hpp"
#include "fatml/rng.hpp"

#include "artifacts.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;

namespace fatml::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-';
        out += ok ? c : '_';
    }
    return out;
}

std::string num(double v) { return format_double(v); }

nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"n", m.n},     {"mae", m.mae}, {"mse", m.mse},
            {"rmse", m.rmse}, {"r2", m.r2},   {"err_std", m.err_std}};
}

nlohmann::json parity_summary_json(const ParityTable& t) {
    return {{"n", t.rows.size()},     {"err_std", t.err_std},
            {"band_15", t.band_15},   {"band_20", t.band_20},
            {"inside_15", t.inside_15}, {"inside_20", t.inside_20}};
}

std::string parity_csv(const ParityTable& t) {
    std::ostringstream out;
    out << "actual,predicted,residual\n";
    for (const ParityRow& r : t.rows) {
        out << num(r.actual) << ',' << num(r.predicted) << ',' << num(r.residual) << '\n';
    }
    return out.str();
}

std::string trial_status_name(TrialStatus s) {
    switch (s) {
        case TrialStatus::completed: return "completed";
        case TrialStatus::failed: return "failed";
        case TrialStatus::skipped: return "skipped";
    }
    return "unknown";
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += num(v[i]);
    }
    return out;
}

std::string hp_text(const LearnerSpec& spec) {
    std::string out;
    for (const auto& [key, value] : spec.hp) {
        if (!out.empty()) out += ';';
        out += key + "=" + num(value);
    }
    return out;
}

std::string leaderboard_csv(const std::vector<TrialRecord>& trials) {
    std::ostringstream out;
    out << "rank,trial_id,space,family,status,mean_cv_rmse,fold_rmse,best_iterations,"
           "hyperparameters,error\n";
    std::vector<size_t> order = leaderboard_order(trials);
    for (size_t rank = 0; rank < order.size(); ++rank) {
        const TrialRecord& t = trials[order[rank]];
        std::string iters;
        for (size_t i = 0; i < t.fold_best_iterations.size(); ++i) {
            if (i) iters += ';';
            iters += std::to_string(t.fold_best_iterations[i]);
        }
        out << rank + 1 << ',' << t.trial_id << ',' << csv_escape(t.spec.space) << ','
            << family_name(t.spec.family) << ',' << trial_status_name(t.status) << ','
            << (t.status == TrialStatus::completed ? num(t.mean_cv_rmse) : std::string()) << ','
            << csv_escape(join_doubles(t.fold_rmse)) << ',' << csv_escape(iters) << ','
            << csv_escape(hp_text(t.spec)) << ',' << csv_escape(t.error) << '\n';
    }
    return out.str();
}

std::string vif_csv(const VifScreenResult& vif, double threshold) {
    std::ostringstream out;
    out << "round,feature,r_squared,vif,action\n";
    for (size_t r = 0; r < vif.rounds.size(); ++r) {
        for (const VifEntry& e : vif.rounds[r]) {
            std::string action;
            if (r < vif.dropped.size() && e.feature == vif.dropped[r]) {
                action = "dropped";
            } else if (e.vif > threshold) {
                action = "over_threshold";
            }
            out << r + 1 << ',' << csv_escape(e.feature) << ',' << num(e.r_squared) << ','
                << num(e.vif) << ',' << action << '\n';
        }
    }
    return out.str();
}

std::string learning_curves_csv(const std::vector<FittedModel>& members) {
    std::ostringstream out;
    out << "member,space,iteration,train_rmse,valid_rmse\n";
    for (size_t i = 0; i < members.size(); ++i) {
        for (const TrainLogRow& row : members[i].training_log) {
            out << i << ',' << csv_escape(members[i].spec.space) << ',' << row.iteration << ','
                << num(row.train_metric) << ','
                << (std::isfinite(row.valid_metric) ? num(row.valid_metric) : std::string())
                << '\n';
        }
    }
    return out.str();
}

std::string decision_path_text(const DecisionRecord& rec) {
    std::string out;
    for (const AttributionStep& step : rec.steps) {
        if (!out.empty()) out += ';';
        out += step.feature + ":" + num(step.shap);
    }
    return out;
}

struct ExplainBundle {
    const ShapMatrix& shap;
    const ShapReports& reports;
    const ImportanceTable& importance;
    const std::vector<size_t>& rows;  // original row ids of the explained rows
};

void write_explain_artifacts(RunDir& dir, const ExplainBundle& b) {
    std::ostringstream shap_csv;
    shap_csv << "row";
    for (const std::string& f : b.shap.feature_names) shap_csv << ',' << csv_escape(f);
    shap_csv << ",base_value\n";
    for (size_t r = 0; r < b.shap.values.n_rows; ++r) {
        shap_csv << b.rows[r];
        for (size_t c = 0; c < b.shap.values.n_cols; ++c) {
            shap_csv << ',' << num(b.shap.values.at(r, c));
        }
        shap_csv << ',' << num(b.shap.base_value) << '\n';
    }
    dir.write_text("shap_values.csv", shap_csv.str());

    std::ostringstream imp;
    imp << "feature,mean_abs_shap\n";
    for (const ShapImportanceEntry& e : b.reports.importance) {
        imp << csv_escape(e.feature) << ',' << num(e.mean_abs) << '\n';
    }
    dir.write_text("shap_importance.csv", imp.str());

    std::ostringstream perm;
    perm << "feature,mean_degradation,std_degradation\n";
    for (const ImportanceEntry& e : b.importance.entries) {
        perm << csv_escape(e.feature) << ',' << num(e.mean_degradation) << ','
             << num(e.std_degradation) << '\n';
    }
    dir.write_text("permutation_importance.csv", perm.str());

    size_t n_dep = std::min<size_t>(8, b.reports.importance.size());
    for (size_t i = 0; i < n_dep; ++i) {
        const std::string& feature = b.reports.importance[i].feature;
        const std::vector<std::string>& names = b.shap.feature_names;
        size_t idx = 0;
        while (idx < names.size() && names[idx] != feature) ++idx;
        if (idx == names.size()) continue;
        std::ostringstream dep;
        dep << "standardized_value,shap\n";
        for (const DependencePoint& p : b.reports.dependence[idx]) {
            dep << num(p.feature_value) << ',' << num(p.shap) << '\n';
        }
        dir.write_text("dependence_" + std::to_string(i) + "_" + sanitize_name(feature) + ".csv",
                       dep.str());
    }

    std::ostringstream dec;
    dec << "kind,row,actual,prediction,base_value,attribution_path\n";
    for (const DecisionRecord& r : b.reports.best) {
        dec << "best," << r.row << ',' << num(r.actual) << ',' << num(r.prediction) << ','
            << num(b.shap.base_value) << ',' << csv_escape(decision_path_text(r)) << '\n';
    }
    for (const DecisionRecord& r : b.reports.worst) {
        dec << "worst," << r.row << ',' << num(r.actual) << ',' << num(r.prediction) << ','
            << num(b.shap.base_value) << ',' << csv_escape(decision_path_text(r)) << '\n';
    }
    dir.write_text("decision_top10.csv", dec.str());

    std::vector<std::pair<std::string, double>> shap_items;
    for (const ShapImportanceEntry& e : b.reports.importance) {
        shap_items.emplace_back(e.feature, e.mean_abs);
    }
    dir.write_text("importance_shap.svg",
                   importance_svg(shap_items, "Attribution importance",
                                  "mean |attribution| (transformed target units)"));

    std::vector<std::pair<std::string, double>> perm_items;
    for (const ImportanceEntry& e : b.importance.entries) {
        perm_items.emplace_back(e.feature, e.mean_degradation);
    }
    dir.write_text("importance_permutation.svg",
                   importance_svg(perm_items, "Permutation importance",
                                  "RMSE degradation when shuffled"));

    dir.write_text("beeswarm.svg",
                   beeswarm_svg(b.reports, b.shap.feature_names, 12, "Attribution beeswarm"));
}

nlohmann::json golden_feature_json(const GoldenFeature& g) {
    return {{"lhs", g.lhs},
            {"rhs", g.rhs},
            {"op", golden_op_name(g.op)},
            {"score", g.score},
            {"recipe", g.recipe}};
}

GoldenFeature golden_feature_from_json(const nlohmann::json& j) {
    GoldenFeature g;
    g.lhs = j.at("lhs").get<std::string>();
    g.rhs = j.at("rhs").get<std::string>();
    std::string op = j.at("op").get<std::string>();
    if (op == "subtract") {
        g.op = GoldenOp::subtract;
    } else if (op == "divide") {
        g.op = GoldenOp::divide;
    } else {
        throw ConfigError("unknown golden op: " + op);
    }
    g.score = j.value("score", 0.0);
    g.recipe = j.at("recipe").get<std::string>();
    return g;
}

nlohmann::json read_json_path(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<size_t> seeded_subset(size_t n, size_t want, Rng rng) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t(0));
    if (want >= n) return idx;
    rng.shuffle(idx);
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

int cmd_synth(const RunConfig& cfg) {
    if (!cfg.synth) throw ConfigError("synth command needs an input.synth block");
    SynthResult result = generate_synthetic(*cfg.synth);

    RunDir dir(cfg.output_dir);
    dir.write_json("config_echo.json", config_echo(cfg));
    write_csv(result.data, dir.path_of("dataset.csv"));
    dir.add_existing("dataset.csv");
    dir.write_json("schema.json", schema_to_json(result.data.schema()));

    nlohmann::json truth;
    truth["base_log10"] = result.truth.base_log10;
    truth["r_slope"] = result.truth.r_slope;
    truth["yield_slope"] = result.truth.yield_slope;
    truth["tig_uplift"] = result.truth.tig_uplift;
    truth["height_slope"] = result.truth.height_slope;
    truth["ratio_coeff"] = result.truth.ratio_coeff;
    truth["noise_std_log10"] = result.truth.noise_std_log10;
    truth["dominant_feature"] = result.truth.dominant_feature;
    truth["treated_level"] = result.truth.treated_level;
    truth["collinear_column"] = result.truth.collinear_column;
    dir.write_json("truth.json", truth);

    dir.write_manifest();
    std::cout << "wrote " << result.data.n_rows() << " rows to " << dir.path_of("dataset.csv")
              << "\n";
    return 0;
}

int cmd_eda(const RunConfig& cfg) {
    Dataset ds = cfg.load_input();
    EdaReport report = eda_summary(ds, cfg.eda_bins);

    RunDir dir(cfg.output_dir);
    dir.write_json("config_echo.json", config_echo(cfg));

    std::ostringstream missing;
    missing << "column,missing_percent\n";
    for (const ColumnSummary& c : report.columns) {
        missing << csv_escape(c.name) << ',' << num(100.0 * c.missing_ratio) << '\n';
    }
    dir.write_text("missingness.csv", missing.str());

    std::ostringstream stats;
    stats << "column,kind,observed,missing,missing_percent,min,max,mean,median,stddev\n";
    for (const ColumnSummary& c : report.columns) {
        stats << csv_escape(c.name) << ',' << to_string(c.kind) << ',' << c.n_observed << ','
              << c.n_missing << ',' << num(100.0 * c.missing_ratio) << ',';
        if (c.kind == ColumnKind::real && c.n_observed > 0) {
            stats << num(c.min) << ',' << num(c.max) << ',' << num(c.mean) << ','
                  << num(c.median) << ',' << num(c.stddev);
        } else {
            stats << ",,,,";
        }
        stats << '\n';
    }
    dir.write_text("stats.csv", stats.str());

    for (const ColumnSummary& c : report.columns) {
        std::ostringstream hist;
        if (c.kind == ColumnKind::real) {
            hist << "bin_low,bin_high,count\n";
            for (size_t b = 0; b + 1 < c.histogram.edges.size(); ++b) {
                hist << num(c.histogram.edges[b]) << ',' << num(c.histogram.edges[b + 1]) << ','
                     << c.histogram.counts[b] << '\n';
            }
        } else {
            hist << "level,count\n";
            for (const auto& [level, count] : c.level_counts) {
                hist << csv_escape(level) << ',' << count << '\n';
            }
        }
        dir.write_text("hist_" + sanitize_name(c.name) + ".csv", hist.str());
    }

    dir.write_manifest();
    std::cout << "profiled " << report.n_rows << " rows, " << report.columns.size()
              << " columns into " << dir.root() << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    Clock::time_point t0 = Clock::now();
    RunDir dir(cfg.output_dir);
    std::ostringstream timings;
    timings << "stage,seconds\n";

    try {
        dir.write_json("config_echo.json", config_echo(cfg));

        Dataset ds = cfg.load_input();
        auto [train, test] = train_test_split(ds, cfg.split.test_fraction, cfg.split.seed);
        timings << "load_and_split," << num(seconds_since(t0)) << '\n';

        HypothesisConfig hypothesis;
        if (cfg.hypothesis == "custom") {
            hypothesis.name = "custom";
            hypothesis.features = cfg.custom_features;
        } else {
            hypothesis = hypothesis_config(cfg.hypothesis);
        }

        Clock::time_point t1 = Clock::now();
        RunResult result = run(train, test, hypothesis, cfg.options);
        timings << "run," << num(seconds_since(t1)) << '\n';
        for (const TrialRecord& t : result.trials) {
            timings << "trial_" << t.trial_id << ',' << num(t.wall_seconds) << '\n';
        }

        dir.write_json("schema.json", schema_to_json(ds.schema()));
        dir.write_json("pipeline.json", result.pipeline.to_json());

        if (result.vif_ran) {
            dir.write_text("vif.csv", vif_csv(result.vif, cfg.options.vif_threshold));
        }
        if (cfg.options.golden_enabled) {
            dir.write_text("golden_features.txt",
                           format_golden_report(result.golden, result.golden_flags));
        }

        dir.write_text("leaderboard.csv", leaderboard_csv(result.trials));
        dir.write_text("rmse_distribution.svg",
                       rmse_strip_svg(result.trials, "Trial RMSE by search space"));

        nlohmann::json features;
        features["model_features"] = result.model_features;
        nlohmann::json golden_used = nlohmann::json::array();
        std::set<std::string> used(result.golden_used.begin(), result.golden_used.end());
        for (const GoldenFeature& g : result.golden) {
            if (used.count(g.recipe)) golden_used.push_back(golden_feature_json(g));
        }
        features["golden_used"] = golden_used;
        dir.write_json("features.json", features);

        nlohmann::json ensemble;
        ensemble["member_trials"] = result.ensemble.member_trials;
        ensemble["weights"] = result.member_weights;
        ensemble["counts"] = result.ensemble.counts;
        ensemble["oof_rmse"] = result.ensemble.oof_rmse;
        nlohmann::json model_files = nlohmann::json::array();
        for (size_t i = 0; i < result.final_members.size(); ++i) {
            std::string name = "model_" + std::to_string(i) + ".json";
            dir.write_json(name, model_to_json(result.final_members[i]));
            model_files.push_back(name);
        }
        ensemble["model_files"] = model_files;
        dir.write_json("ensemble.json", ensemble);

        dir.write_text("learning_curves.csv", learning_curves_csv(result.final_members));

        nlohmann::json metrics;
        metrics["train"]["full"] = metrics_to_json(result.train_full);
        metrics["train"]["band"] = metrics_to_json(result.train_band);
        metrics["test"]["full"] = metrics_to_json(result.test_full);
        metrics["test"]["band"] = metrics_to_json(result.test_band);
        metrics["band"] = {{"low", cfg.options.eval_band.low},
                           {"high", cfg.options.eval_band.high}};
        metrics["parity"]["train"] = parity_summary_json(result.parity_train);
        metrics["parity"]["test"] = parity_summary_json(result.parity_test);
        dir.write_json("metrics.json", metrics);

        dir.write_text("parity_train.csv", parity_csv(result.parity_train));
        dir.write_text("parity_test.csv", parity_csv(result.parity_test));
        dir.write_text("parity_train.svg",
                       parity_svg(result.parity_train, "Parity, training partition", "MPa"));
        dir.write_text("parity_test.svg",
                       parity_svg(result.parity_test, "Parity, test partition", "MPa"));

        write_explain_artifacts(
            dir, ExplainBundle{result.shap, result.reports, result.importance,
                               result.explained_rows});

        nlohmann::json summary;
        summary["hypothesis"] = result.hypothesis.name;
        summary["hypothesis_features"] = result.hypothesis.features;
        summary["model_features"] = result.model_features;
        summary["golden_used"] = result.golden_used;
        size_t completed = 0, failed = 0, skipped = 0;
        for (const TrialRecord& t : result.trials) {
            if (t.status == TrialStatus::completed) ++completed;
            if (t.status == TrialStatus::failed) ++failed;
            if (t.status == TrialStatus::skipped) ++skipped;
        }
        summary["trials"] = {{"total", result.trials.size()},
                             {"completed", completed},
                             {"failed", failed},
                             {"skipped", skipped}};
        summary["ensemble"] = {{"members", result.ensemble.member_trials.size()},
                               {"oof_rmse", result.ensemble.oof_rmse}};
        summary["explained_rows"] = result.explained_rows.size();
        summary["permutation_baseline_rmse"] = result.importance.baseline_metric;
        dir.write_json("run_summary.json", summary);

        timings << "total," << num(seconds_since(t0)) << '\n';
        dir.write_text("timings.csv", timings.str(), false);
        dir.write_manifest();

        std::cout << "test R2 " << num(result.test_full.r2) << ", test RMSE "
                  << num(result.test_full.rmse) << " MPa, ensemble of "
                  << result.ensemble.member_trials.size() << " over " << completed
                  << " completed trials; artifacts in " << dir.root() << "\n";
        return 0;
    } catch (const std::exception& e) {
        dir.write_failed_marker(e.what());
        throw;
    }
}

int cmd_explain(const RunConfig& cfg, const std::string& model_dir) {
    fs::path mdir(model_dir);
    if (!fs::exists(mdir / "pipeline.json")) {
        throw IoError("no pipeline.json under " + model_dir);
    }
    FittedPipeline pipeline = FittedPipeline::from_json(read_json_path((mdir / "pipeline.json").string()));
    nlohmann::json features = read_json_path((mdir / "features.json").string());
    nlohmann::json ensemble = read_json_path((mdir / "ensemble.json").string());

    std::vector<std::string> model_features =
        features.at("model_features").get<std::vector<std::string>>();
    std::vector<GoldenFeature> golden;
    for (const nlohmann::json& g : features.at("golden_used")) {
        golden.push_back(golden_feature_from_json(g));
    }
    std::vector<double> weights = ensemble.at("weights").get<std::vector<double>>();
    std::vector<FittedModel> members;
    for (const nlohmann::json& f : ensemble.at("model_files")) {
        members.push_back(model_from_json(read_json_path((mdir / f.get<std::string>()).string())));
    }
    if (members.empty()) throw ConfigError("ensemble has no members");
    if (members.size() != weights.size()) {
        throw LengthMismatchError(members.size(), weights.size());
    }

    Dataset ds = cfg.load_input();
    EncodedData enc = apply_pipeline(pipeline, ds, cfg.options.seed_pipeline);

    // rebuild the model matrix: base columns by name, then stored recipes
    size_t n_golden = golden.size();
    std::vector<std::string> base(model_features.begin(), model_features.end() - n_golden);
    std::vector<size_t> base_cols;
    for (const std::string& name : base) {
        size_t j = 0;
        while (j < enc.feature_names.size() && enc.feature_names[j] != name) ++j;
        if (j == enc.feature_names.size()) throw MissingColumnError(name);
        base_cols.push_back(j);
    }
    Matrix X = enc.X.select_cols(base_cols);
    std::vector<std::string> names = base;
    for (const GoldenFeature& g : golden) {
        std::vector<double> col = g.materialize(X, names);
        Matrix grown(X.n_rows, X.n_cols + 1);
        for (size_t r = 0; r < X.n_rows; ++r) {
            for (size_t c = 0; c < X.n_cols; ++c) grown.at(r, c) = X.at(r, c);
            grown.at(r, X.n_cols) = col[r];
        }
        X = std::move(grown);
        names.push_back(g.recipe);
    }

    const RunOptions& o = cfg.options;
    Rng explain_rng(o.seed_explain);
    std::vector<size_t> bg_rows =
        seeded_subset(X.n_rows, o.background_rows, explain_rng.stream("background"));
    std::vector<size_t> explain_rows =
        seeded_subset(X.n_rows, o.explain_rows, explain_rng.stream("explain_rows"));
    Matrix background = X.select_rows(bg_rows);
    Matrix X_explain = X.select_rows(explain_rows);

    ShapOptions shap_options;
    shap_options.feature_names = names;
    shap_options.n_samples = o.shap_samples;
    shap_options.seed = o.seed_explain;
    shap_options.jobs = o.jobs;
    std::vector<ShapMatrix> parts;
    for (const FittedModel& m : members) {
        parts.push_back(shap_values(m, X_explain, background, shap_options));
    }
    ShapMatrix shap = shap_weighted_sum(parts, weights);
    shap.background_source = "input";

    std::vector<double> predictions = ensemble_predict(members, weights, X_explain);
    std::vector<double> actuals;
    for (size_t r : explain_rows) actuals.push_back(enc.y[r]);
    ShapReports reports =
        shap_reports(shap, X_explain, predictions, actuals, std::min<size_t>(10, explain_rows.size()));

    BatchPredictor predictor = [&](const Matrix& Xp) {
        return ensemble_predict(members, weights, Xp);
    };
    ImportanceTable importance = permutation_importance(predictor, X, enc.y, names,
                                                        o.importance_repeats, o.seed_explain, o.jobs);

    RunDir dir(cfg.output_dir);
    dir.write_json("config_echo.json", config_echo(cfg));
    try {
        write_explain_artifacts(dir, ExplainBundle{shap, reports, importance, explain_rows});

        std::vector<double> pred_mpa = inverse_target(pipeline, predictions);
        std::vector<double> actual_mpa = inverse_target(pipeline, actuals);
        ParityTable parity = parity_table(actual_mpa, pred_mpa);
        dir.write_text("parity.csv", parity_csv(parity));
        dir.write_text("parity.svg", parity_svg(parity, "Parity, explained rows", "MPa"));

        dir.write_manifest();
    } catch (const std::exception& e) {
        dir.write_failed_marker(e.what());
        throw;
    }
    std::cout << "explained " << explain_rows.size() << " rows with " << members.size()
              << " ensemble members; artifacts in " << dir.root() << "\n";
    return 0;
}

int cmd_report(const std::string& run_dir) {
    fs::path root(run_dir);
    nlohmann::json manifest = read_json_path((root / "manifest.json").string());

    size_t checked = 0, mismatched = 0, missing = 0;
    std::ostringstream lines;
    for (const nlohmann::json& entry : manifest.at("artifacts")) {
        std::string rel = entry.at("path").get<std::string>();
        std::string expected = entry.at("fnv1a64").get<std::string>();
        fs::path p = root / rel;
        if (!fs::exists(p)) {
            ++missing;
            lines << "  MISSING " << rel << "\n";
            continue;
        }
        std::string content = read_file(p.string());
        std::string actual = hex64(fnv1a64(content));
        ++checked;
        if (actual != expected) {
            ++mismatched;
            lines << "  CHANGED " << rel << " (expected " << expected << ", got " << actual
                  << ")\n";
        }
    }

    std::cout << "run directory: " << run_dir << "\n";
    std::cout << "manifest: " << checked << " artifacts checked, " << mismatched
              << " changed, " << missing << " missing\n";
    std::cout << lines.str();

    if (fs::exists(root / "run_summary.json")) {
        nlohmann::json summary = read_json_path((root / "run_summary.json").string());
        std::cout << "hypothesis: " << summary.value("hypothesis", std::string("?")) << "\n";
        if (summary.contains("trials")) {
            std::cout << "trials: " << summary["trials"].value("completed", 0) << " completed, "
                      << summary["trials"].value("failed", 0) << " failed, "
                      << summary["trials"].value("skipped", 0) << " skipped\n";
        }
        if (summary.contains("ensemble")) {
            std::cout << "ensemble: " << summary["ensemble"].value("members", 0)
                      << " members, out-of-fold RMSE "
                      << summary["ensemble"].value("oof_rmse", 0.0) << "\n";
        }
    }
    if (fs::exists(root / "metrics.json")) {
        nlohmann::json metrics = read_json_path((root / "metrics.json").string());
        for (const char* split : {"train", "test"}) {
            if (!metrics.contains(split)) continue;
            const nlohmann::json& full = metrics[split]["full"];
            const nlohmann::json& band = metrics[split]["band"];
            std::cout << split << ": RMSE " << full.value("rmse", 0.0) << " MPa, R2 "
                      << full.value("r2", 0.0) << ", banded RMSE " << band.value("rmse", 0.0)
                      << " MPa\n";
        }
    }
    if (fs::exists(root / "FAILED")) {
        std::cout << "FAILED marker present: " << read_file((root / "FAILED").string());
    }

    return (mismatched + missing) == 0 ? 0 : 1;
}

}  // namespace fatml::cli
