#pragma once

#include <string>

#include "drgct/runner.hpp"

namespace drgct {

/// JSON keys mirror the struct field names exactly ("L", "M", "G", "B",
/// "alpha", "freq_bounds", "multiplier_law", "mode", "seed", "mlp", "mdn",
/// "la", "p", "q"). Unknown keys are rejected; absent keys keep defaults.
TestConfig test_config_from_json_text(const std::string& text);
std::string test_config_to_json_text(const TestConfig& cfg);

/// Plan keys: "kinds", "lags", "sample_sizes", "reps", "threads", "timing",
/// "test".
ExperimentPlan plan_from_json_text(const std::string& text);
std::string plan_to_json_text(const ExperimentPlan& plan);

ExperimentPlan load_plan(const std::string& path);
TestConfig load_test_config(const std::string& path);

}  // namespace drgct
