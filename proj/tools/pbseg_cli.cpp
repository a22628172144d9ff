// pbseg: synthesize scenes, segment clouds, evaluate results and run seeded
// benchmark suites. Errors are reported on stderr as one JSON line
//   {"error":"<code>","message":"..."}
// with a nonzero exit status.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pbseg/io/cloud_file.hpp"
#include "pbseg/io/config_file.hpp"
#include "pbseg/io/ply.hpp"
#include "pbseg/io/results_file.hpp"
#include "pbseg/io/suite.hpp"
#include "pbseg/pipeline.hpp"
#include "pbseg/random.hpp"
#include "pbseg/scene_synth.hpp"

namespace {

using namespace pbseg;

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

int report_error(const std::string& code, const std::string& message, int status) {
  std::cerr << "{\"error\":\"" << code << "\",\"message\":\"" << json_escape(message) << "\"}\n";
  return status;
}

// One override flag per PipelineConfig field.
struct PipelineFlags {
  std::optional<double> density_radius;
  std::optional<std::uint32_t> density_threshold;
  std::optional<double> link_radius;
  std::optional<std::size_t> secondary_count;
  std::optional<double> nms_iou;
  std::optional<std::uint32_t> min_proposal_points;
  std::optional<std::string> scorer;
  std::optional<std::string> clustering;
  std::optional<bool> voting;
  std::optional<std::string> voting_mode;
  std::optional<bool> local_scenes;
  std::optional<std::string> refiner;
  std::optional<double> merge_reach;
  std::optional<std::uint32_t> distance_min_points;

  void add_to(CLI::App* app) {
    app->add_option("--density-radius", density_radius, "Density radius r_d in meters");
    app->add_option("--density-threshold", density_threshold, "HP density threshold");
    app->add_option("--link-radius", link_radius, "HP grouping radius (default r_d)");
    app->add_option("-k,--secondary-count", secondary_count, "Secondaries per local scene");
    app->add_option("--nms-iou", nms_iou, "NMS suppression IoU");
    app->add_option("--min-proposal-points", min_proposal_points,
                    "Minimum proposal size (default: density threshold)");
    app->add_option("--scorer", scorer, "heuristic | oracle | constant");
    app->add_option("--clustering", clustering, "binary | distance");
    app->add_flag("--voting,!--no-voting", voting, "Vote LPs into instances");
    app->add_option("--voting-mode", voting_mode, "frozen | multi_round");
    app->add_flag("--local-scenes,!--no-local-scenes", local_scenes, "Build local scenes");
    app->add_option("--refiner", refiner, "identity | merge_nearby");
    app->add_option("--merge-reach", merge_reach, "merge_nearby reach as a fraction of r_m");
    app->add_option("--distance-min-points", distance_min_points,
                    "Component size filter of distance clustering");
  }

  void apply(PipelineConfig& c) const {
    if (density_radius) c.density_radius = *density_radius;
    if (density_threshold) c.density_threshold = *density_threshold;
    if (link_radius) c.link_radius = *link_radius;
    if (secondary_count) c.secondary_count = *secondary_count;
    if (nms_iou) c.nms_iou = *nms_iou;
    if (min_proposal_points) c.min_proposal_points = *min_proposal_points;
    if (scorer) c.scorer = parse_scorer(*scorer);
    if (clustering) c.clustering = parse_clustering_mode(*clustering);
    if (voting) c.voting = *voting;
    if (voting_mode) c.voting_mode = parse_voting_mode(*voting_mode);
    if (local_scenes) c.local_scenes = *local_scenes;
    if (refiner) c.refiner = parse_refiner(*refiner);
    if (merge_reach) c.merge_reach = *merge_reach;
    if (distance_min_points) c.distance_min_points = *distance_min_points;
    c.validate();
  }
};

io::ConfigFile load_config_or_default(const std::string& explicit_path) {
  if (auto path = io::resolve_config_path(explicit_path)) return io::load_config(*path);
  return {};
}

void write_cloud_any(const std::string& path, const io::CloudDocument& doc) {
  if (std::filesystem::path(path).extension() == ".ply") {
    io::write_ply(path, doc);
  } else {
    io::write_cloud_file(path, doc);
  }
}

void print_summary(const EvalReport& r) {
  std::printf("mAP %.3f AP50 %.3f AP25 %.3f (gt %zu, pred %zu)\n", r.map, r.ap50, r.ap25,
              r.gt_instances, r.pred_instances);
}

struct SynthArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> num_objects;
  std::optional<double> adjacency;
  std::optional<std::string> noise;
  std::optional<double> sigma;
  std::optional<double> semantic_error;
};

void run_synth(const SynthArgs& a) {
  io::ConfigFile cfg = load_config_or_default(a.config);
  if (a.seed) cfg.scene.seed = *a.seed;
  if (a.num_objects) cfg.scene.num_objects = *a.num_objects;
  if (a.adjacency) cfg.scene.adjacency_probability = *a.adjacency;
  if (a.noise) cfg.noise.kind = parse_noise_kind(*a.noise);
  if (a.sigma) cfg.noise.sigma = *a.sigma;
  if (a.semantic_error) cfg.noise.semantic_error_rate = *a.semantic_error;
  if (a.seed) cfg.noise.seed = derive_seed(*a.seed, 1);

  SynthScene scene = generate_scene(cfg.scene);
  apply_noise(scene, cfg.noise);
  io::CloudDocument doc{std::move(scene.cloud), std::move(scene.catalog),
                        io::Provenance{"pbseg synth", std::string(Rng::kName), cfg.scene.seed}};
  write_cloud_any(a.out, doc);
  std::printf("wrote %zu points, %zu objects to %s\n", doc.cloud.size(), scene.objects.size(),
              a.out.c_str());
}

struct SegmentArgs {
  std::string cloud, config, out;
  bool no_timings = false;
  std::optional<unsigned> threads;
  PipelineFlags flags;
};

void run_segment(const SegmentArgs& a) {
  io::ConfigFile cfg = load_config_or_default(a.config);
  a.flags.apply(cfg.pipeline);
  if (a.threads) cfg.pipeline.threads = *a.threads;
  const io::CloudDocument doc = io::read_any_cloud(a.cloud);
  const SegmentResult result = segment(doc.cloud, doc.catalog, cfg.pipeline);

  io::ResultsDocument out;
  out.config = cfg.pipeline;
  out.cloud = {a.cloud, doc.cloud.size(), io::cloud_checksum(io::encode_cloud(doc))};
  out.instances = result.proposals;
  out.meta = result.meta;
  io::write_results(a.out, out, doc.catalog, !a.no_timings);
  std::printf("%zu proposals (%zu HPs, %zu LPs) written to %s\n", out.instances.size(),
              result.meta.hp_count, result.meta.lp_count, a.out.c_str());
}

struct EvalArgs {
  std::string results, cloud, config, out, integration;
  bool no_write = false;
};

void run_eval(const EvalArgs& a) {
  io::ConfigFile cfg = load_config_or_default(a.config);
  if (!a.integration.empty()) cfg.eval.integration = parse_integration(a.integration);
  io::ResultsDocument results = io::read_results(a.results);
  const io::CloudDocument doc = io::read_any_cloud(a.cloud);
  if (results.cloud.points != doc.cloud.size() ||
      results.cloud.checksum != io::cloud_checksum(io::encode_cloud(doc))) {
    throw Error(ErrorCode::kInvalidArgument, "results were produced from a different cloud");
  }
  results.eval = io::evaluate(results.instances, doc.cloud, doc.catalog, cfg.eval);
  print_summary(*results.eval);
  if (!a.no_write) {
    const std::string target = a.out.empty() ? a.results : a.out;
    io::write_results(target, results, doc.catalog, !results.meta.timings.empty());
  }
}

struct BenchArgs {
  std::string suite, out, stage;
  std::optional<unsigned> threads;
  std::optional<std::size_t> seeds;
  bool no_timings = false;
};

io::SuiteSpec load_suite(const BenchArgs& a) {
  io::SuiteSpec suite = a.suite.empty() ? io::default_suite()
                                        : io::parse_suite(io::read_file(a.suite));
  if (a.threads) suite.threads = *a.threads;
  if (a.seeds) {
    suite.seeds.clear();
    for (std::size_t s = 0; s < *a.seeds; ++s) suite.seeds.push_back(s);
  }
  return suite;
}

void print_report_summary(const io::BenchReport& report) {
  std::printf("%zu rows written\n", report.rows.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary-clustering point cloud instance segmentation toolkit", "pbseg"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled scene");
  synth_cmd->add_option("--config", synth.config, "JSON config (scene and noise sections)");
  synth_cmd->add_option("--seed", synth.seed, "Scene seed");
  synth_cmd->add_option("--out", synth.out, "Output cloud (.ply for PLY)")->required();
  synth_cmd->add_option("--num-objects", synth.num_objects, "Objects per scene");
  synth_cmd->add_option("--adjacency", synth.adjacency, "Same-class contact probability");
  synth_cmd->add_option("--noise", synth.noise, "gaussian | heavy_tail | boundary_pull");
  synth_cmd->add_option("--sigma", synth.sigma, "Offset noise scale");
  synth_cmd->add_option("--semantic-error", synth.semantic_error, "Semantic flip rate");

  SegmentArgs seg;
  auto* seg_cmd = app.add_subcommand("segment", "Segment a cloud into instance proposals");
  seg_cmd->add_option("--cloud", seg.cloud, "Input cloud")->required();
  seg_cmd->add_option("--config", seg.config, "JSON config (pipeline section)");
  seg_cmd->add_option("--out", seg.out, "Output results JSON")->required();
  seg_cmd->add_option("--threads", seg.threads, "Worker threads (0 = all cores)");
  seg_cmd->add_flag("--no-timings", seg.no_timings, "Omit the timings field");
  seg.flags.add_to(seg_cmd);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a results file against ground truth");
  eval_cmd->add_option("--results", ev.results, "Results JSON")->required();
  eval_cmd->add_option("--cloud", ev.cloud, "Cloud with ground truth")->required();
  eval_cmd->add_option("--config", ev.config, "JSON config (eval section)");
  eval_cmd->add_option("--integration", ev.integration, "scannet | all_point");
  eval_cmd->add_option("--out", ev.out, "Write results with eval here instead of in place");
  eval_cmd->add_flag("--no-write", ev.no_write, "Only print the report");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Seeded binary vs distance comparison and sweeps");
  bench_cmd->add_option("--suite", bench.suite, "Suite JSON (default suite if omitted)");
  bench_cmd->add_option("--out", bench.out, "Report JSON")->required();
  bench_cmd->add_option("--threads", bench.threads, "Concurrent scenes (0 = all cores)");
  bench_cmd->add_option("--seeds", bench.seeds, "Use seeds 0..n-1");
  bench_cmd->add_flag("--no-timings", bench.no_timings, "Omit the timings field");

  BenchArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Toggle pipeline stages over a suite");
  ablate_cmd->add_option("--stage", ablate.stage, "voting | local_scene | clustering | all")
      ->required();
  ablate_cmd->add_option("--suite", ablate.suite, "Suite JSON (default suite if omitted)");
  ablate_cmd->add_option("--out", ablate.out, "Report JSON")->required();
  ablate_cmd->add_option("--threads", ablate.threads, "Concurrent scenes (0 = all cores)");
  ablate_cmd->add_option("--seeds", ablate.seeds, "Use seeds 0..n-1");
  ablate_cmd->add_flag("--no-timings", ablate.no_timings, "Omit the timings field");

  std::string convert_in, convert_out;
  auto* convert_cmd = app.add_subcommand("convert", "Convert between the cloud format and PLY");
  convert_cmd->add_option("--in", convert_in, "Input cloud")->required();
  convert_cmd->add_option("--out", convert_out, "Output cloud (.ply for PLY)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 64);
  }

  try {
    if (*synth_cmd) {
      run_synth(synth);
    } else if (*seg_cmd) {
      run_segment(seg);
    } else if (*eval_cmd) {
      run_eval(ev);
    } else if (*bench_cmd) {
      const io::BenchReport report = io::run_bench(load_suite(bench));
      io::write_file_atomic(bench.out, io::bench_report_to_json(report, !bench.no_timings));
      print_report_summary(report);
    } else if (*ablate_cmd) {
      const io::BenchReport report = io::run_ablation(load_suite(ablate), ablate.stage);
      io::write_file_atomic(ablate.out, io::bench_report_to_json(report, !ablate.no_timings));
      print_report_summary(report);
    } else if (*convert_cmd) {
      write_cloud_any(convert_out, io::read_any_cloud(convert_in));
    }
  } catch (const Error& e) {
    return report_error(to_string(e.code()), e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
