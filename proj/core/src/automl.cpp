#include "fatml/automl.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fatml/errors.hpp"
#include "fatml/parallel.hpp"
#include "fatml/rng.hpp"

namespace fatml {

HypothesisConfig hypothesis_config(const std::string& name) {
    static const std::vector<std::string> m1 = {
        "l_BP", "h_S", "t_BP", "t_S",           "a_w",
        "R_eH", "R_m", "R",    "delta_sigma_i", "Loading",
        "Scale", "Post_Treat"};
    HypothesisConfig h;
    h.name = name;
    h.features = m1;
    if (name == "M1") return h;
    h.features.push_back("Weld_Pos");
    h.features.push_back("Weld_Proc");
    if (name == "M2") return h;
    if (name == "M3") {
        h.features.push_back("f_T");
        h.features.push_back("R_eH_filler");
        h.features.push_back("R_m_filler");
        h.features.push_back("Pre_Treat");
        return h;
    }
    throw ConfigError("unknown hypothesis: " + name);
}

std::vector<std::string> hypothesis_names() { return {"M1", "M2", "M3"}; }

std::vector<size_t> stratified_fold_assignment(const std::vector<double>& y, size_t k,
                                               uint64_t seed) {
    const size_t n = y.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (y[a] != y[b]) return y[a] < y[b];
        return a < b;
    });

    // decile bins of the target, shuffled inside each bin, then dealt to
    // folds round-robin so every fold spans the whole target range
    const size_t bins = 10;
    Rng base = Rng(seed).stream("cv_folds");
    std::vector<size_t> fold(n, 0);
    size_t position = 0;
    for (size_t b = 0; b < bins; ++b) {
        size_t lo = b * n / bins;
        size_t hi = (b + 1) * n / bins;
        std::vector<size_t> bin(order.begin() + static_cast<long>(lo),
                                order.begin() + static_cast<long>(hi));
        Rng rng = base.stream(b);
        rng.shuffle(bin);
        for (size_t idx : bin) fold[idx] = position++ % k;
    }
    return fold;
}

TrialRecord cross_validate(const LearnerSpec& spec, const Matrix& X,
                           const std::vector<double>& y, size_t k, uint64_t seed,
                           size_t jobs) {
    if (k < 2) throw ConfigError("cross-validation needs k >= 2");
    const size_t n = X.n_rows;
    if (n != y.size()) throw LengthMismatchError(n, y.size());
    if (n < 2 * k) throw TooFewRowsError(n, 2 * k);

    std::vector<size_t> fold = stratified_fold_assignment(y, k, seed);

    TrialRecord record;
    record.spec = spec;
    record.oof.assign(n, std::numeric_limits<double>::quiet_NaN());
    record.fold_rmse.resize(k);
    record.fold_best_iterations.resize(k);

    for (size_t f = 0; f < k; ++f) {
        std::vector<size_t> train_rows, valid_rows;
        for (size_t r = 0; r < n; ++r) {
            (fold[r] == f ? valid_rows : train_rows).push_back(r);
        }
        Matrix X_train = X.select_rows(train_rows);
        Matrix X_valid = X.select_rows(valid_rows);
        std::vector<double> y_train(train_rows.size()), y_valid(valid_rows.size());
        for (size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];
        for (size_t i = 0; i < valid_rows.size(); ++i) y_valid[i] = y[valid_rows[i]];

        FittedModel model =
            fit(X_train, y_train, spec, ValidationRef{&X_valid, &y_valid}, jobs);
        record.fold_best_iterations[f] = model.best_iteration;

        std::vector<double> pred = model.predict(X_valid);
        double ss = 0;
        for (size_t i = 0; i < valid_rows.size(); ++i) {
            record.oof[valid_rows[i]] = pred[i];
            double e = pred[i] - y_valid[i];
            ss += e * e;
        }
        record.fold_rmse[f] = std::sqrt(ss / static_cast<double>(valid_rows.size()));
    }
    record.mean_cv_rmse =
        std::accumulate(record.fold_rmse.begin(), record.fold_rmse.end(), 0.0) /
        static_cast<double>(k);
    return record;
}

std::vector<TrialRecord> hpo_search(const Matrix& X, const std::vector<double>& y,
                                    const HpoOptions& options) {
    if (options.max_trials < 1) throw ConfigError("search needs at least one trial");
    if (options.budget_seconds <= 0) throw ConfigError("search budget must be positive");
    std::vector<std::string> spaces =
        options.spaces.empty() ? search_space_names() : options.spaces;

    // the whole spec sequence is drawn serially before any trial runs, so
    // worker count and budget cannot change which spec a trial id means
    std::vector<TrialRecord> records(options.max_trials);
    {
        Rng sample_rng = Rng(options.seed).stream("hpo_sampling");
        Rng seed_rng = Rng(options.seed).stream("model_seeds");
        for (size_t t = 0; t < options.max_trials; ++t) {
            records[t].trial_id = t;
            records[t].spec =
                sample_spec(spaces[t % spaces.size()], sample_rng, seed_rng.next_u64());
            records[t].status = TrialStatus::skipped;
            records[t].error = "time budget exhausted";
        }
    }

    auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    };

    parallel_for(options.max_trials, options.jobs, [&](size_t t) {
        TrialRecord& record = records[t];
        if (t > 0 && elapsed() > options.budget_seconds) return;  // stays skipped
        auto trial_start = std::chrono::steady_clock::now();
        try {
            TrialRecord done =
                cross_validate(record.spec, X, y, options.cv_folds, options.seed, 1);
            done.trial_id = record.trial_id;
            record = std::move(done);
            record.status = TrialStatus::completed;
            record.error.clear();
        } catch (const std::exception& e) {
            record.status = TrialStatus::failed;
            record.error = e.what();
            record.mean_cv_rmse = std::numeric_limits<double>::quiet_NaN();
        }
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - trial_start)
                .count();
    });
    return records;
}

std::vector<size_t> leaderboard_order(const std::vector<TrialRecord>& trials) {
    std::vector<size_t> ids(trials.size());
    std::iota(ids.begin(), ids.end(), size_t(0));
    std::sort(ids.begin(), ids.end(), [&](size_t a, size_t b) {
        bool ca = trials[a].status == TrialStatus::completed;
        bool cb = trials[b].status == TrialStatus::completed;
        if (ca != cb) return ca;
        if (ca && trials[a].mean_cv_rmse != trials[b].mean_cv_rmse) {
            return trials[a].mean_cv_rmse < trials[b].mean_cv_rmse;
        }
        return trials[a].trial_id < trials[b].trial_id;
    });
    return ids;
}

namespace {

double rmse_against(const std::vector<double>& pred, const std::vector<double>& y) {
    double ss = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        double e = pred[i] - y[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(y.size()));
}

bool oof_complete(const TrialRecord& t, size_t n) {
    if (t.status != TrialStatus::completed || t.oof.size() != n) return false;
    return std::all_of(t.oof.begin(), t.oof.end(),
                       [](double v) { return std::isfinite(v); });
}

}  // namespace

EnsembleDefinition greedy_ensemble(const std::vector<TrialRecord>& trials,
                                   const std::vector<double>& y, size_t max_members) {
    const size_t n = y.size();
    std::vector<size_t> eligible;
    for (size_t t = 0; t < trials.size(); ++t) {
        if (oof_complete(trials[t], n)) eligible.push_back(t);
    }
    if (eligible.empty()) {
        throw DegenerateInputError("no usable out-of-fold predictions to blend");
    }
    if (max_members < 1) throw ConfigError("ensemble needs at least one member slot");

    size_t best = eligible.front();
    double best_rmse = std::numeric_limits<double>::infinity();
    for (size_t t : eligible) {
        double r = rmse_against(trials[t].oof, y);
        if (r < best_rmse) {
            best_rmse = r;
            best = t;
        }
    }

    std::map<size_t, size_t> counts;
    counts[best] = 1;
    std::vector<double> sum = trials[best].oof;
    size_t members = 1;
    double current_rmse = best_rmse;

    std::vector<double> blended(n);
    while (members < max_members) {
        size_t pick = 0;
        double pick_rmse = std::numeric_limits<double>::infinity();
        bool found = false;
        for (size_t t : eligible) {
            const auto& oof = trials[t].oof;
            double inv = 1.0 / static_cast<double>(members + 1);
            for (size_t i = 0; i < n; ++i) blended[i] = (sum[i] + oof[i]) * inv;
            double r = rmse_against(blended, y);
            if (r < pick_rmse) {
                pick_rmse = r;
                pick = t;
                found = true;
            }
        }
        if (!found || pick_rmse >= current_rmse) break;
        for (size_t i = 0; i < n; ++i) sum[i] += trials[pick].oof[i];
        ++counts[pick];
        ++members;
        current_rmse = pick_rmse;
    }

    EnsembleDefinition def;
    for (const auto& [trial, count] : counts) {
        def.member_trials.push_back(trial);
        def.counts.push_back(count);
        def.weights.push_back(static_cast<double>(count) / static_cast<double>(members));
    }
    def.oof.resize(n);
    for (size_t i = 0; i < n; ++i) def.oof[i] = sum[i] / static_cast<double>(members);
    def.oof_rmse = rmse_against(def.oof, y);
    return def;
}

std::vector<double> ensemble_predict(const std::vector<FittedModel>& members,
                                     const std::vector<double>& weights, const Matrix& X) {
    if (members.empty()) throw DegenerateInputError("empty ensemble");
    if (members.size() != weights.size()) {
        throw LengthMismatchError(members.size(), weights.size());
    }
    std::vector<double> out(X.n_rows, 0.0);
    for (size_t m = 0; m < members.size(); ++m) {
        std::vector<double> pred = members[m].predict(X);
        for (size_t r = 0; r < X.n_rows; ++r) out[r] += weights[m] * pred[r];
    }
    return out;
}

namespace {

std::vector<double> target_mpa_column(const Dataset& ds, const std::string& target) {
    size_t col = ds.schema().index_of(target);
    std::vector<double> out(ds.n_rows());
    for (size_t r = 0; r < ds.n_rows(); ++r) {
        auto v = ds.real_at(col, r);
        if (!v) throw DegenerateInputError("missing target value at row " + std::to_string(r));
        out[r] = *v;
    }
    return out;
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

Matrix append_column(const Matrix& X, const std::vector<double>& v) {
    Matrix out(X.n_rows, X.n_cols + 1);
    for (size_t r = 0; r < X.n_rows; ++r) {
        const double* src = X.row(r);
        double* dst = out.row(r);
        std::copy(src, src + X.n_cols, dst);
        dst[X.n_cols] = v[r];
    }
    return out;
}

}  // namespace

RunResult run(const Dataset& train, const Dataset& test, const HypothesisConfig& hypothesis,
              const RunOptions& options) {
    RunResult out;
    out.hypothesis = hypothesis;
    out.options = options;

    Dataset tr = train.select_features(hypothesis.features);
    Dataset te = test.select_features(hypothesis.features);

    // preprocessing is fit on the training partition only
    std::vector<ImputeSpec> impute = build_default_impute_specs(tr.schema());
    for (const ImputeSpec& override_spec : options.impute_overrides) {
        bool replaced = false;
        for (ImputeSpec& spec : impute) {
            if (spec.column == override_spec.column) {
                spec = override_spec;
                replaced = true;
            }
        }
        if (!replaced) impute.push_back(override_spec);
    }
    out.pipeline = fit_pipeline(tr, impute, options.target, options.seed_pipeline);
    EncodedData enc_train = apply_pipeline(out.pipeline, tr, options.seed_pipeline);
    EncodedData enc_test = apply_pipeline(out.pipeline, te, options.seed_pipeline);

    std::vector<size_t> keep(enc_train.feature_names.size());
    std::iota(keep.begin(), keep.end(), size_t(0));
    if (options.vif_enabled) {
        // collinearity screening runs on the continuous columns only
        std::vector<size_t> real_cols;
        std::vector<std::string> real_names;
        for (size_t j = 0; j < enc_train.feature_names.size(); ++j) {
            if (enc_train.feature_names[j].find('=') == std::string::npos) {
                real_cols.push_back(j);
                real_names.push_back(enc_train.feature_names[j]);
            }
        }
        if (real_cols.size() >= 2) {
            out.vif = vif_screen(enc_train.X.select_cols(real_cols), real_names,
                                 options.vif_threshold);
            out.vif_ran = true;
            std::set<std::string> dropped(out.vif.dropped.begin(), out.vif.dropped.end());
            std::vector<size_t> filtered;
            for (size_t j : keep) {
                if (!dropped.count(enc_train.feature_names[j])) filtered.push_back(j);
            }
            keep = std::move(filtered);
        }
    }

    Matrix X_train = enc_train.X.select_cols(keep);
    Matrix X_test = enc_test.X.select_cols(keep);
    for (size_t j : keep) out.model_features.push_back(enc_train.feature_names[j]);

    if (options.golden_enabled) {
        out.golden = discover_golden(X_train, enc_train.y, out.model_features,
                                     options.seed_search, options.jobs);
        out.golden_flags = audit_golden(out.golden, tr.schema(), options.audit_policy);
        std::set<std::string> flagged;
        for (const auto& f : out.golden_flags) flagged.insert(f.feature.recipe);
        for (const auto& g : out.golden) {
            if (flagged.count(g.recipe)) continue;
            X_train = append_column(X_train, g.materialize(X_train, out.model_features));
            X_test = append_column(X_test, g.materialize(X_test, out.model_features));
            out.model_features.push_back(g.recipe);
            out.golden_used.push_back(g.recipe);
        }
    }

    HpoOptions hpo;
    hpo.spaces = options.spaces;
    hpo.max_trials = options.max_trials;
    hpo.budget_seconds = options.budget_seconds;
    hpo.cv_folds = options.cv_folds;
    hpo.seed = options.seed_search;
    hpo.jobs = options.jobs;
    out.trials = hpo_search(X_train, enc_train.y, hpo);

    out.ensemble = greedy_ensemble(out.trials, enc_train.y, options.ensemble_max_members);

    // winning specs are refit on all training rows; early-stopped fits reuse
    // the mean best iteration found across folds as a fixed stage count
    for (size_t t : out.ensemble.member_trials) {
        LearnerSpec spec = out.trials[t].spec;
        if (spec.hp.count("early_stopping_rounds")) {
            const auto& bi = out.trials[t].fold_best_iterations;
            double sum = 0;
            size_t seen = 0;
            for (size_t v : bi) {
                if (v > 0) {
                    sum += static_cast<double>(v);
                    ++seen;
                }
            }
            if (seen > 0) {
                spec.hp["n_estimators"] =
                    std::max(1.0, std::round(sum / static_cast<double>(seen)));
            }
            spec.hp.erase("early_stopping_rounds");
        }
        out.final_members.push_back(
            fit(X_train, enc_train.y, spec, std::nullopt, effective_jobs(options.jobs)));
    }
    out.member_weights = out.ensemble.weights;

    std::vector<double> pred_train_t =
        ensemble_predict(out.final_members, out.member_weights, X_train);
    std::vector<double> pred_test_t =
        ensemble_predict(out.final_members, out.member_weights, X_test);
    out.train_pred_mpa = inverse_target(out.pipeline, pred_train_t);
    out.test_pred_mpa = inverse_target(out.pipeline, pred_test_t);
    out.train_actual_mpa = target_mpa_column(tr, options.target);
    out.test_actual_mpa = target_mpa_column(te, options.target);

    out.train_full = regression_metrics(out.train_actual_mpa, out.train_pred_mpa);
    out.test_full = regression_metrics(out.test_actual_mpa, out.test_pred_mpa);
    out.train_band = banded_metrics(out.train_actual_mpa, out.train_pred_mpa,
                                    options.eval_band);
    out.test_band = banded_metrics(out.test_actual_mpa, out.test_pred_mpa,
                                   options.eval_band);
    out.parity_train = parity_table(out.train_actual_mpa, out.train_pred_mpa);
    out.parity_test = parity_table(out.test_actual_mpa, out.test_pred_mpa);

    // attribution on (a sample of) the test partition against a training
    // background, in transformed target units
    std::vector<size_t> bg_rows =
        seeded_subset(X_train.n_rows, options.background_rows,
                      Rng(options.seed_explain).stream("background"));
    Matrix background = X_train.select_rows(bg_rows);
    out.explained_rows = seeded_subset(
        X_test.n_rows, options.explain_rows, Rng(options.seed_explain).stream("explain_rows"));
    Matrix X_explain = X_test.select_rows(out.explained_rows);

    ShapOptions shap_options;
    shap_options.feature_names = out.model_features;
    shap_options.n_samples = options.shap_samples;
    shap_options.seed = options.seed_explain;
    shap_options.jobs = options.jobs;
    std::vector<ShapMatrix> parts;
    parts.reserve(out.final_members.size());
    for (const FittedModel& member : out.final_members) {
        parts.push_back(shap_values(member, X_explain, background, shap_options));
    }
    out.shap = shap_weighted_sum(parts, out.member_weights);
    out.shap.background_source = "train";

    std::vector<double> pred_explain(out.explained_rows.size());
    std::vector<double> actual_explain(out.explained_rows.size());
    for (size_t i = 0; i < out.explained_rows.size(); ++i) {
        pred_explain[i] = pred_test_t[out.explained_rows[i]];
        actual_explain[i] = enc_test.y[out.explained_rows[i]];
    }
    out.reports = shap_reports(out.shap, X_explain, pred_explain, actual_explain,
                               std::min<size_t>(10, out.explained_rows.size()));

    BatchPredictor predictor = [&](const Matrix& m) {
        return ensemble_predict(out.final_members, out.member_weights, m);
    };
    out.importance =
        permutation_importance(predictor, X_test, enc_test.y, out.model_features,
                               options.importance_repeats, options.seed_explain, options.jobs);
    return out;
}

}  // namespace fatml
