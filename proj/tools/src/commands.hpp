#pragma once

#include <string>

#include "run_config.hpp"

namespace fatml::cli {

int cmd_synth(const RunConfig& cfg);
int cmd_eda(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_explain(const RunConfig& cfg, const std::string& model_dir);
int cmd_report(const std::string& run_dir);

}  // namespace fatml::cli
