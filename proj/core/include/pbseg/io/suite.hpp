#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pbseg/evaluation.hpp"
#include "pbseg/pipeline.hpp"
#include "pbseg/scene_synth.hpp"

namespace pbseg::io {

/// Seeded multi-scene benchmark description (JSON):
///   { "name", "seeds": [..], "scene": {...}, "noise_levels": [{...}, ..],
///     "pipeline": {...}, "modes": ["binary", "distance"],
///     "sweeps": { "density_radius": [..], "density_threshold": [..],
///                 "secondary_count": [..] },
///     "sweep_refiner": "merge_nearby", "eval": {...}, "threads": 0 }
struct SuiteSpec {
  std::string name = "default";
  std::vector<std::uint64_t> seeds;
  SceneConfig scene;
  std::vector<NoiseModel> noise_levels;
  PipelineConfig pipeline;
  std::vector<ClusteringMode> modes{ClusteringMode::kBinary, ClusteringMode::kDistance};
  std::vector<double> sweep_density_radius;
  std::vector<std::uint32_t> sweep_density_threshold;
  std::vector<std::size_t> sweep_secondary_count;
  /// Refiner used by the secondary_count sweep and the local-scene ablation;
  /// with the identity refiner K has no effect on the output.
  RefinerKind sweep_refiner = RefinerKind::kMergeNearby;
  EvalOptions eval;
  /// Scenes evaluated concurrently; 0 means hardware concurrency.
  unsigned threads = 0;
};

/// Contact-pair scenes, boundary-pull and gaussian noise levels, both
/// clustering modes, and sweeps over r_d, theta_d and K (6 and 7 included).
SuiteSpec default_suite();
SuiteSpec parse_suite(std::string_view json_text);
std::string suite_to_json(const SuiteSpec& suite);

struct BenchRow {
  /// "compare", "sweep" or "ablate".
  std::string experiment;
  /// Variant label, e.g. "binary", "distance", "voting_off".
  std::string variant;
  std::size_t noise_index = 0;
  std::string noise;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  /// Swept parameter name and value; empty for other experiments.
  std::string parameter;
  double value = 0.0;
  double map = 0.0;
  double ap50 = 0.0;
  double ap25 = 0.0;
  double coverage = 0.0;
  std::size_t proposals = 0;
  std::size_t gt_instances = 0;
  /// Wall time of segment; reported separately from the rows.
  double milliseconds = 0.0;
};

struct BenchReport {
  std::string suite;
  std::vector<BenchRow> rows;
};

/// Binary vs distance comparison plus parameter sweeps.
BenchReport run_bench(const SuiteSpec& suite);

/// Stage toggles: "voting" (on/off), "local_scene" (off / on with the sweep
/// refiner), "clustering" (binary/distance) or "all".
BenchReport run_ablation(const SuiteSpec& suite, std::string_view stage);

/// Rows plus per-group means; wall times go to a separate "timings" array.
std::string bench_report_to_json(const BenchReport& report, bool include_timings = true);

}  // namespace pbseg::io
