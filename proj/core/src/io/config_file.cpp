#include "pbseg/io/config_file.hpp"

#include <cstdlib>

#include "json_convert.hpp"
#include "pbseg/io/cloud_file.hpp"

namespace pbseg::io {

ConfigFile parse_config(std::string_view text) {
  const detail::Json j = detail::parse_json(text, "config");
  detail::expect_keys(j, "config", {"pipeline", "scene", "noise", "eval"});
  ConfigFile c;
  if (j.contains("pipeline")) c.pipeline = detail::pipeline_from_json(j["pipeline"]);
  if (j.contains("scene")) c.scene = detail::scene_from_json(j["scene"]);
  if (j.contains("noise")) c.noise = detail::noise_from_json(j["noise"]);
  if (j.contains("eval")) c.eval = detail::eval_options_from_json(j["eval"]);
  return c;
}

std::string config_to_json(const ConfigFile& c) {
  const detail::Json j = {{"pipeline", detail::to_json(c.pipeline)},
                          {"scene", detail::to_json(c.scene)},
                          {"noise", detail::to_json(c.noise)},
                          {"eval", detail::to_json(c.eval)}};
  return j.dump(2) + "\n";
}

ConfigFile load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::optional<std::filesystem::path> resolve_config_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return std::filesystem::path(explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

std::string pipeline_config_to_json(const PipelineConfig& config) {
  return detail::to_json(config).dump(2) + "\n";
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  return detail::pipeline_from_json(detail::parse_json(text, "pipeline config"));
}

}  // namespace pbseg::io
