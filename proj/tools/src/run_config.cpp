#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include "fatml/errors.hpp"
#include "fatml/preprocess.hpp"

namespace fatml::cli {

namespace {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return j;
}

ImputeStrategy impute_strategy_from(const std::string& name) {
    if (name == "median") return ImputeStrategy::median;
    if (name == "random_sample") return ImputeStrategy::random_sample;
    if (name == "constant") return ImputeStrategy::constant;
    throw ConfigError("unknown impute strategy: " + name);
}

std::string impute_strategy_name(ImputeStrategy s) {
    switch (s) {
        case ImputeStrategy::median: return "median";
        case ImputeStrategy::random_sample: return "random_sample";
        case ImputeStrategy::constant: return "constant";
    }
    throw ConfigError("unknown impute strategy value");
}

AuditPolicy audit_policy_from(const std::string& name) {
    if (name == "strict") return AuditPolicy::strict;
    if (name == "lenient") return AuditPolicy::lenient;
    throw ConfigError("unknown audit policy: " + name);
}

SynthConfig parse_synth(const nlohmann::json& j) {
    SynthConfig s;
    s.n_rows = j.value("n_rows", s.n_rows);
    s.noise_std_log10 = j.value("noise_std_log10", s.noise_std_log10);
    s.seed = j.value("seed", s.seed);
    s.base_log10 = j.value("base_log10", s.base_log10);
    s.r_slope = j.value("r_slope", s.r_slope);
    s.yield_slope = j.value("yield_slope", s.yield_slope);
    s.tig_uplift = j.value("tig_uplift", s.tig_uplift);
    s.height_slope = j.value("height_slope", s.height_slope);
    s.ratio_coeff = j.value("ratio_coeff", s.ratio_coeff);
    s.planted_collinear = j.value("planted_collinear", s.planted_collinear);
    s.planted_ratio_feature = j.value("planted_ratio_feature", s.planted_ratio_feature);
    if (j.contains("missing_rates")) {
        for (const auto& [col, rate] : j.at("missing_rates").items()) {
            s.missing_rates[col] = rate.get<double>();
        }
    }
    s.validate();
    return s;
}

nlohmann::json synth_to_json(const SynthConfig& s) {
    nlohmann::json j;
    j["n_rows"] = s.n_rows;
    j["noise_std_log10"] = s.noise_std_log10;
    j["seed"] = s.seed;
    j["base_log10"] = s.base_log10;
    j["r_slope"] = s.r_slope;
    j["yield_slope"] = s.yield_slope;
    j["tig_uplift"] = s.tig_uplift;
    j["height_slope"] = s.height_slope;
    j["ratio_coeff"] = s.ratio_coeff;
    j["planted_collinear"] = s.planted_collinear;
    j["planted_ratio_feature"] = s.planted_ratio_feature;
    j["missing_rates"] = s.missing_rates;
    return j;
}

}  // namespace

FeatureSchema RunConfig::input_schema() const {
    if (synth) return synthetic_schema(*synth);
    if (schema_path.empty()) return default_table_schema();
    return schema_from_json(read_json_file(schema_path));
}

Dataset RunConfig::load_input() const {
    if (synth) return generate_synthetic(*synth).data;
    LoadResult loaded = load_csv(csv_path, input_schema());
    return std::move(loaded.data);
}

RunConfig load_run_config(const std::string& path) {
    nlohmann::json j = read_json_file(path);
    RunConfig cfg;
    cfg.path = path;

    if (!j.contains("input")) throw ConfigError("missing \"input\" section");
    const nlohmann::json& input = j.at("input");
    if (input.contains("synth") == input.contains("csv")) {
        throw ConfigError("input needs exactly one of \"csv\" and \"synth\"");
    }
    if (input.contains("csv")) {
        cfg.csv_path = input.at("csv").get<std::string>();
        cfg.schema_path = input.value("schema", std::string());
    } else {
        cfg.synth = parse_synth(input.at("synth"));
    }

    cfg.output_dir = j.value("output_dir", std::string());
    if (cfg.output_dir.empty()) throw ConfigError("missing \"output_dir\"");

    if (j.contains("hypothesis")) {
        const nlohmann::json& h = j.at("hypothesis");
        if (h.is_string()) {
            cfg.hypothesis = h.get<std::string>();
        } else {
            cfg.hypothesis = "custom";
            cfg.custom_features = h.at("features").get<std::vector<std::string>>();
        }
    }

    if (j.contains("split")) {
        cfg.split.test_fraction = j.at("split").value("test_fraction", cfg.split.test_fraction);
        cfg.split.seed = j.at("split").value("seed", cfg.split.seed);
    }

    RunOptions& o = cfg.options;
    o.target = j.value("target", o.target);

    if (j.contains("impute")) {
        for (const auto& [col, spec_json] : j.at("impute").items()) {
            ImputeSpec spec;
            spec.column = col;
            spec.strategy = impute_strategy_from(spec_json.at("strategy").get<std::string>());
            if (spec.strategy == ImputeStrategy::constant) {
                const nlohmann::json& v = spec_json.at("value");
                if (v.is_string()) {
                    spec.constant_label = v.get<std::string>();
                } else {
                    spec.constant_real = v.get<double>();
                }
            }
            o.impute_overrides.push_back(spec);
        }
    }

    if (j.contains("vif")) {
        o.vif_enabled = j.at("vif").value("enabled", o.vif_enabled);
        o.vif_threshold = j.at("vif").value("threshold", o.vif_threshold);
    }
    if (j.contains("golden")) {
        o.golden_enabled = j.at("golden").value("enabled", o.golden_enabled);
        o.audit_policy = audit_policy_from(j.at("golden").value("audit", std::string("strict")));
    }
    if (j.contains("search")) {
        const nlohmann::json& s = j.at("search");
        o.max_trials = s.value("max_trials", o.max_trials);
        o.budget_seconds = s.value("budget_seconds", o.budget_seconds);
        o.cv_folds = s.value("cv_folds", o.cv_folds);
        if (s.contains("spaces")) o.spaces = s.at("spaces").get<std::vector<std::string>>();
    }
    if (j.contains("ensemble")) {
        o.ensemble_max_members = j.at("ensemble").value("max_members", o.ensemble_max_members);
    }
    if (j.contains("seeds")) {
        const nlohmann::json& s = j.at("seeds");
        cfg.split.seed = s.value("split", cfg.split.seed);
        o.seed_pipeline = s.value("pipeline", o.seed_pipeline);
        o.seed_search = s.value("search", o.seed_search);
        o.seed_explain = s.value("explain", o.seed_explain);
    }
    if (j.contains("band")) {
        o.eval_band.low = j.at("band").value("low", o.eval_band.low);
        o.eval_band.high = j.at("band").value("high", o.eval_band.high);
    }
    if (j.contains("explain")) {
        const nlohmann::json& e = j.at("explain");
        o.explain_rows = e.value("rows", o.explain_rows);
        o.background_rows = e.value("background_rows", o.background_rows);
        o.shap_samples = e.value("shap_samples", o.shap_samples);
        o.importance_repeats = e.value("importance_repeats", o.importance_repeats);
    }
    if (j.contains("eda")) cfg.eda_bins = j.at("eda").value("bins", cfg.eda_bins);

    return cfg;
}

nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json j;
    if (cfg.synth) {
        j["input"]["synth"] = synth_to_json(*cfg.synth);
    } else {
        j["input"]["csv"] = cfg.csv_path;
        j["input"]["schema"] = cfg.schema_path.empty() ? "default" : cfg.schema_path;
    }
    j["hypothesis"] = cfg.hypothesis;
    if (!cfg.custom_features.empty()) j["custom_features"] = cfg.custom_features;
    j["target"] = cfg.options.target;
    j["split"] = {{"test_fraction", cfg.split.test_fraction}, {"seed", cfg.split.seed}};

    const RunOptions& o = cfg.options;
    nlohmann::json impute = nlohmann::json::object();
    for (const ImputeSpec& spec : o.impute_overrides) {
        nlohmann::json one{{"strategy", impute_strategy_name(spec.strategy)}};
        if (spec.strategy == ImputeStrategy::constant) {
            if (!spec.constant_label.empty()) {
                one["value"] = spec.constant_label;
            } else {
                one["value"] = spec.constant_real;
            }
        }
        impute[spec.column] = one;
    }
    j["impute"] = impute;
    j["vif"] = {{"enabled", o.vif_enabled}, {"threshold", o.vif_threshold}};
    j["golden"] = {{"enabled", o.golden_enabled},
                   {"audit", o.audit_policy == AuditPolicy::strict ? "strict" : "lenient"}};
    j["search"] = {{"max_trials", o.max_trials},
                   {"budget_seconds", o.budget_seconds},
                   {"cv_folds", o.cv_folds},
                   {"spaces", o.spaces}};
    j["ensemble"] = {{"max_members", o.ensemble_max_members}};
    j["seeds"] = {{"split", cfg.split.seed},
                  {"pipeline", o.seed_pipeline},
                  {"search", o.seed_search},
                  {"explain", o.seed_explain}};
    j["band"] = {{"low", o.eval_band.low}, {"high", o.eval_band.high}};
    j["explain"] = {{"rows", o.explain_rows},
                    {"background_rows", o.background_rows},
                    {"shap_samples", o.shap_samples},
                    {"importance_repeats", o.importance_repeats}};
    j["eda"] = {{"bins", cfg.eda_bins}};
    return j;
}

void CliOverrides::apply(RunConfig& cfg) const {
    if (seed_override) {
        uint64_t s = static_cast<uint64_t>(*seed_override);
        cfg.split.seed = s;
        cfg.options.seed_pipeline = s;
        cfg.options.seed_search = s;
        cfg.options.seed_explain = s;
    }
    if (jobs) cfg.options.jobs = *jobs;
    if (budget_seconds) cfg.options.budget_seconds = *budget_seconds;
}

}  // namespace fatml::cli
