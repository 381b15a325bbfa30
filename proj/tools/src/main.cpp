#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fatml/errors.hpp"

#include "commands.hpp"
#include "run_config.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<int64_t> seed_override;
    std::optional<int> jobs;
    std::optional<double> budget_seconds;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed-override", args.seed_override,
                    "replace the split/pipeline/search/explain seeds for this invocation");
    cmd->add_option("--jobs", args.jobs, "worker threads (0 = all cores); never changes results");
    cmd->add_option("--budget-seconds", args.budget_seconds,
                    "override the hyperparameter search wall-clock budget");
}

fatml::cli::RunConfig load_with_overrides(const CommonArgs& args) {
    fatml::cli::RunConfig cfg = fatml::cli::load_run_config(args.config_path);
    fatml::cli::CliOverrides overrides{args.seed_override, args.jobs, args.budget_seconds};
    overrides.apply(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explainable strength-regression workbench"};
    app.require_subcommand(1);

    CommonArgs synth_args, eda_args, train_args, explain_args;
    std::string model_dir, report_dir;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic test-series table");
    add_common(synth, synth_args);

    CLI::App* eda = app.add_subcommand("eda", "profile a table: missingness, stats, histograms");
    add_common(eda, eda_args);

    CLI::App* train = app.add_subcommand(
        "train", "full run: preprocess, screen, search, ensemble, explain, report");
    add_common(train, train_args);

    CLI::App* explain =
        app.add_subcommand("explain", "re-run attribution for a trained run on a dataset");
    add_common(explain, explain_args);
    explain->add_option("--model-dir", model_dir, "run directory holding pipeline.json and models")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI::App* report = app.add_subcommand("report", "verify and summarize a run directory");
    report->add_option("--run", report_dir, "run directory with a manifest.json")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return fatml::cli::cmd_synth(load_with_overrides(synth_args));
        if (eda->parsed()) return fatml::cli::cmd_eda(load_with_overrides(eda_args));
        if (train->parsed()) return fatml::cli::cmd_train(load_with_overrides(train_args));
        if (explain->parsed()) {
            return fatml::cli::cmd_explain(load_with_overrides(explain_args), model_dir);
        }
        if (report->parsed()) return fatml::cli::cmd_report(report_dir);
    } catch (const fatml::Error& e) {
        std::cerr << "error";
        if (!e.stage().empty()) std::cerr << " [" << e.stage() << "]";
        std::cerr << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
