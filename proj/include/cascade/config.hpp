#pragma once

#include "cascade/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace cascade {

// Flat `section.key = value` run configuration. Environment variables with
// the FLOWCASCADE_ prefix override file values (dots become underscores,
// upper case: stage1.delta -> FLOWCASCADE_STAGE1_DELTA).
inline constexpr const char* kEnvPrefix = "FLOWCASCADE_";

struct RunConfig {
    PipelineOptions pipeline;
    std::optional<std::uint64_t> seed;  // run.seed; absent = pick and journal one
    std::string dataset_name;           // run.dataset
};

// config_path may be empty (defaults + environment only).
RunConfig load_run_config(const std::string& config_path);

// Exposed for tests: applies one key to the config, throws ConfigError on an
// unknown key or a bad value.
void apply_config_key(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace cascade
