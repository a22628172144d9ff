#pragma once

// JSON conversions shared by the file formats. Private to pbseg_io.

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pbseg/evaluation.hpp"
#include "pbseg/io/cloud_file.hpp"
#include "pbseg/pipeline.hpp"
#include "pbseg/scene_synth.hpp"

namespace pbseg::io::detail {

using Json = nlohmann::json;

[[noreturn]] void malformed(const std::string& what);

/// Throws kMalformedFile when `j` is not an object or holds a key outside
/// `allowed`.
void expect_keys(const Json& j, std::string_view where,
                 std::initializer_list<std::string_view> allowed);

Json parse_json(std::string_view text, std::string_view where);

Json to_json(const Point3& p);
Point3 point_from_json(const Json& j, std::string_view where);

Json to_json(const ClassCatalog& catalog);
ClassCatalog catalog_from_json(const Json& j);

Json to_json(const Provenance& p);
Provenance provenance_from_json(const Json& j);

Json to_json(const PipelineConfig& c);
/// Missing keys keep the values already in `base`.
PipelineConfig pipeline_from_json(const Json& j, PipelineConfig base = {});

Json to_json(const ClassTemplate& t);
ClassTemplate class_template_from_json(const Json& j);

Json to_json(const SceneConfig& c);
SceneConfig scene_from_json(const Json& j, SceneConfig base = {});

Json to_json(const NoiseModel& n);
NoiseModel noise_from_json(const Json& j, NoiseModel base = {});

Json to_json(const EvalOptions& o);
EvalOptions eval_options_from_json(const Json& j, EvalOptions base = {});

Json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const Json& j);

Json to_json(const RunMetadata& m, bool include_timings);

/// Wraps a conversion so nlohmann type errors surface as kMalformedFile.
template <class Fn>
auto guarded(std::string_view where, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    malformed(std::string(where) + ": " + e.what());
  }
}

}  // namespace pbseg::io::detail
