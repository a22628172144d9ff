#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "pbseg/evaluation.hpp"
#include "pbseg/pipeline.hpp"
#include "pbseg/scene_synth.hpp"

namespace pbseg::io {

/// Environment variable naming the config file used when no --config flag
/// is given.
inline constexpr const char* kConfigEnvVar = "PBSEG_CONFIG";

/// Contents of a JSON config file. Every section is optional; keys are
/// checked strictly so typos fail loudly.
///   { "pipeline": {...}, "scene": {...}, "noise": {...}, "eval": {...} }
struct ConfigFile {
  PipelineConfig pipeline;
  SceneConfig scene;
  NoiseModel noise;
  EvalOptions eval;
};

ConfigFile parse_config(std::string_view json_text);
std::string config_to_json(const ConfigFile& config);
ConfigFile load_config(const std::filesystem::path& path);

/// The explicit path if given, else $PBSEG_CONFIG if set, else nullopt.
std::optional<std::filesystem::path> resolve_config_path(const std::string& explicit_path);

std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig parse_pipeline_config(std::string_view json_text);

}  // namespace pbseg::io
