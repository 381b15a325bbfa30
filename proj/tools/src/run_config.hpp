#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fatml/automl.hpp"
#include "fatml/synth.hpp"
#include "fatml/tabular.hpp"

namespace fatml::cli {

struct SplitConfig {
    double test_fraction = 0.2;
    uint64_t seed = 7;
};

/// One structured config file drives every command. Input is either a CSV
/// path with a schema reference or an inline synthetic-generator block;
/// everything else maps onto the engine's run options. All seeds are spelled
/// out in the file so a run never depends on the wall clock.
struct RunConfig {
    std::string path;  // where the file was loaded from

    std::string csv_path;     // empty when the input is synthetic
    std::string schema_path;  // empty selects the built-in column catalog
    std::optional<SynthConfig> synth;

    std::string output_dir;
    std::string hypothesis = "M1";
    std::vector<std::string> custom_features;  // used when hypothesis == "custom"

    SplitConfig split;
    RunOptions options;
    size_t eda_bins = 20;

    FeatureSchema input_schema() const;
    Dataset load_input() const;
};

RunConfig load_run_config(const std::string& path);

/// The config as it will be replayed: every knob that shapes results, none
/// of the execution-only ones (worker count). Serialized into each run
/// directory so artifacts are self-describing.
nlohmann::json config_echo(const RunConfig& cfg);

/// Flags shared by every command; they override the corresponding config
/// fields for this invocation only.
struct CliOverrides {
    std::optional<int64_t> seed_override;  // replaces split/pipeline/search/explain seeds
    std::optional<int> jobs;
    std::optional<double> budget_seconds;

    void apply(RunConfig& cfg) const;
};

}  // namespace fatml::cli
