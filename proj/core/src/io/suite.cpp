#include "pbseg/io/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <tuple>

#include "json_convert.hpp"
#include "pbseg/geometry.hpp"
#include "pbseg/io/results_file.hpp"
#include "pbseg/parallel.hpp"
#include "pbseg/random.hpp"

namespace pbseg::io {
namespace {

using detail::Json;

std::string noise_label(const NoiseModel& n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%.3f", std::string(to_string(n.kind)).c_str(), n.sigma);
  return buf;
}

struct Variant {
  std::string experiment;
  std::string label;
  std::string parameter;
  double value = 0.0;
  PipelineConfig config;
};

struct Task {
  std::size_t noise_index;
  std::uint64_t seed;
};

std::vector<BenchRow> run_task(const SuiteSpec& suite, const Task& task,
                               const std::vector<Variant>& variants) {
  SceneConfig scene_config = suite.scene;
  scene_config.seed = task.seed;
  SynthScene scene = generate_scene(scene_config);
  NoiseModel noise = suite.noise_levels[task.noise_index];
  noise.seed = derive_seed(task.seed, 100 + task.noise_index);
  apply_noise(scene, noise);
  const GroundTruthInstances gt = ground_truth_instances(scene.cloud);

  std::vector<BenchRow> rows;
  for (const Variant& v : variants) {
    PipelineConfig config = v.config;
    config.threads = 1;
    const auto start = std::chrono::steady_clock::now();
    const SegmentResult result = segment(scene.cloud, scene.catalog, config);
    const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
    const EvalReport report = average_precision(result.proposals, gt, scene.catalog, suite.eval);

    BenchRow row;
    row.experiment = v.experiment;
    row.variant = v.label;
    row.noise_index = task.noise_index;
    row.noise = noise_label(noise);
    row.sigma = noise.sigma;
    row.seed = task.seed;
    row.parameter = v.parameter;
    row.value = v.value;
    row.map = report.map;
    row.ap50 = report.ap50;
    row.ap25 = report.ap25;
    row.coverage = foreground_coverage(result.proposals, scene.cloud, scene.catalog);
    row.proposals = result.proposals.size();
    row.gt_instances = gt.instance_ids.size();
    row.milliseconds = ms.count();
    rows.push_back(std::move(row));
  }
  return rows;
}

BenchReport run_variants(const SuiteSpec& suite, const std::vector<Variant>& variants) {
  if (suite.noise_levels.empty() || suite.seeds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "suite needs at least one seed and noise level");
  }
  std::vector<Task> tasks;
  for (std::size_t n = 0; n < suite.noise_levels.size(); ++n) {
    for (std::uint64_t seed : suite.seeds) tasks.push_back({n, seed});
  }
  std::vector<std::vector<BenchRow>> per_task(tasks.size());
  parallel_for(tasks.size(), suite.threads,
               [&](std::size_t t) { per_task[t] = run_task(suite, tasks[t], variants); });
  BenchReport report;
  report.suite = suite.name;
  for (auto& rows : per_task) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace

SuiteSpec default_suite() {
  SuiteSpec s;
  s.name = "default";
  s.seeds = {0, 1, 2, 3, 4};
  s.scene.adjacency_probability = 1.0;
  NoiseModel pull;
  pull.kind = OffsetNoiseKind::kBoundaryPull;
  pull.sigma = 0.01;
  NoiseModel low;
  low.sigma = 0.01;
  NoiseModel moderate;
  moderate.sigma = 0.03;
  s.noise_levels = {pull, low, moderate};
  s.sweep_density_radius = {0.02, 0.03, 0.04, 0.05, 0.06};
  s.sweep_density_threshold = {10, 20, 30, 40, 50};
  s.sweep_secondary_count = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return s;
}

SuiteSpec parse_suite(std::string_view text) {
  const Json j = detail::parse_json(text, "suite");
  return detail::guarded("suite", [&] {
    detail::expect_keys(j, "suite",
                        {"name", "seeds", "scene", "noise_levels", "pipeline", "modes", "sweeps",
                         "sweep_refiner", "eval", "threads"});
    SuiteSpec s = default_suite();
    if (j.contains("name")) s.name = j["name"].get<std::string>();
    if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("scene")) s.scene = detail::scene_from_json(j["scene"], s.scene);
    if (j.contains("noise_levels")) {
      s.noise_levels.clear();
      for (const Json& n : j["noise_levels"]) s.noise_levels.push_back(detail::noise_from_json(n));
    }
    if (j.contains("pipeline")) s.pipeline = detail::pipeline_from_json(j["pipeline"]);
    if (j.contains("modes")) {
      s.modes.clear();
      for (const Json& m : j["modes"]) s.modes.push_back(parse_clustering_mode(m.get<std::string>()));
    }
    if (j.contains("sweeps")) {
      const Json& w = j["sweeps"];
      detail::expect_keys(w, "suite sweeps",
                          {"density_radius", "density_threshold", "secondary_count"});
      s.sweep_density_radius = w.value("density_radius", std::vector<double>{});
      s.sweep_density_threshold = w.value("density_threshold", std::vector<std::uint32_t>{});
      s.sweep_secondary_count = w.value("secondary_count", std::vector<std::size_t>{});
    }
    if (j.contains("sweep_refiner")) {
      s.sweep_refiner = parse_refiner(j["sweep_refiner"].get<std::string>());
    }
    if (j.contains("eval")) s.eval = detail::eval_options_from_json(j["eval"]);
    if (j.contains("threads")) s.threads = j["threads"].get<unsigned>();
    return s;
  });
}

std::string suite_to_json(const SuiteSpec& s) {
  Json noise = Json::array();
  for (const NoiseModel& n : s.noise_levels) noise.push_back(detail::to_json(n));
  Json modes = Json::array();
  for (ClusteringMode m : s.modes) modes.push_back(std::string(to_string(m)));
  const Json j = {{"name", s.name},
                  {"seeds", s.seeds},
                  {"scene", detail::to_json(s.scene)},
                  {"noise_levels", noise},
                  {"pipeline", detail::to_json(s.pipeline)},
                  {"modes", modes},
                  {"sweeps",
                   {{"density_radius", s.sweep_density_radius},
                    {"density_threshold", s.sweep_density_threshold},
                    {"secondary_count", s.sweep_secondary_count}}},
                  {"sweep_refiner", std::string(to_string(s.sweep_refiner))},
                  {"eval", detail::to_json(s.eval)},
                  {"threads", s.threads}};
  return j.dump(2) + "\n";
}

BenchReport run_bench(const SuiteSpec& suite) {
  std::vector<Variant> variants;
  for (ClusteringMode m : suite.modes) {
    PipelineConfig c = suite.pipeline;
    c.clustering = m;
    variants.push_back({"compare", std::string(to_string(m)), "", 0.0, c});
  }
  for (double r : suite.sweep_density_radius) {
    PipelineConfig c = suite.pipeline;
    c.density_radius = r;
    c.link_radius.reset();
    variants.push_back({"sweep", "binary", "density_radius", r, c});
  }
  for (std::uint32_t t : suite.sweep_density_threshold) {
    PipelineConfig c = suite.pipeline;
    c.density_threshold = t;
    c.min_proposal_points.reset();
    variants.push_back({"sweep", "binary", "density_threshold", static_cast<double>(t), c});
  }
  for (std::size_t k : suite.sweep_secondary_count) {
    PipelineConfig c = suite.pipeline;
    c.secondary_count = k;
    c.refiner = suite.sweep_refiner;
    variants.push_back({"sweep", "binary", "secondary_count", static_cast<double>(k), c});
  }
  return run_variants(suite, variants);
}

BenchReport run_ablation(const SuiteSpec& suite, std::string_view stage) {
  const bool all = stage == "all";
  if (!all && stage != "voting" && stage != "local_scene" && stage != "clustering") {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown ablation stage '" + std::string(stage) +
                    "' (expected voting, local_scene, clustering or all)");
  }
  std::vector<Variant> variants;
  PipelineConfig base = suite.pipeline;
  base.clustering = ClusteringMode::kBinary;
  if (all || stage == "clustering") {
    PipelineConfig d = base;
    d.clustering = ClusteringMode::kDistance;
    variants.push_back({"ablate", "distance", "", 0.0, d});
    variants.push_back({"ablate", "binary", "", 0.0, base});
  }
  if (all || stage == "voting") {
    PipelineConfig off = base;
    off.voting = false;
    variants.push_back({"ablate", "voting_off", "", 0.0, off});
    PipelineConfig on = base;
    on.voting = true;
    variants.push_back({"ablate", "voting_on", "", 0.0, on});
  }
  if (all || stage == "local_scene") {
    PipelineConfig off = base;
    off.local_scenes = false;
    variants.push_back({"ablate", "local_scene_off", "", 0.0, off});
    PipelineConfig on = base;
    on.local_scenes = true;
    on.refiner = suite.sweep_refiner;
    variants.push_back({"ablate", "local_scene_on", "", 0.0, on});
  }
  return run_variants(suite, variants);
}

std::string bench_report_to_json(const BenchReport& report, bool include_timings) {
  Json rows = Json::array();
  Json timings = Json::array();
  using Key = std::tuple<std::string, std::string, std::size_t, std::string, double>;
  struct Acc {
    std::size_t order = 0;
    std::string noise;
    std::size_t scenes = 0;
    double map = 0, ap50 = 0, ap25 = 0, coverage = 0;
  };
  std::map<Key, Acc> groups;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const BenchRow& r = report.rows[i];
    rows.push_back({{"experiment", r.experiment},
                    {"variant", r.variant},
                    {"noise", r.noise},
                    {"noise_index", r.noise_index},
                    {"sigma", r.sigma},
                    {"seed", r.seed},
                    {"parameter", r.parameter},
                    {"value", r.value},
                    {"map", r.map},
                    {"ap50", r.ap50},
                    {"ap25", r.ap25},
                    {"coverage", r.coverage},
                    {"proposals", r.proposals},
                    {"gt_instances", r.gt_instances}});
    timings.push_back({{"row", i}, {"milliseconds", r.milliseconds}});
    const Key key{r.experiment, r.variant, r.noise_index, r.parameter, r.value};
    auto [it, inserted] = groups.try_emplace(key);
    Acc& a = it->second;
    if (inserted) {
      a.order = groups.size() - 1;
      a.noise = r.noise;
    }
    ++a.scenes;
    a.map += r.map;
    a.ap50 += r.ap50;
    a.ap25 += r.ap25;
    a.coverage += r.coverage;
  }
  std::vector<std::pair<Key, Acc>> ordered(groups.begin(), groups.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.second.order < b.second.order; });
  Json summary = Json::array();
  for (const auto& [key, a] : ordered) {
    const double n = static_cast<double>(a.scenes);
    summary.push_back({{"experiment", std::get<0>(key)},
                       {"variant", std::get<1>(key)},
                       {"noise_index", std::get<2>(key)},
                       {"noise", a.noise},
                       {"parameter", std::get<3>(key)},
                       {"value", std::get<4>(key)},
                       {"scenes", a.scenes},
                       {"map", a.map / n},
                       {"ap50", a.ap50 / n},
                       {"ap25", a.ap25 / n},
                       {"coverage", a.coverage / n}});
  }
  Json j = {{"suite", report.suite}, {"rows", rows}, {"summary", summary}};
  if (include_timings) j["timings"] = timings;
  return j.dump(1) + "\n";
}

}  // namespace pbseg::io
