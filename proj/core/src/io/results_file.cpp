#include "pbseg/io/results_file.hpp"

#include "json_convert.hpp"
#include "pbseg/geometry.hpp"
#include "pbseg/io/cloud_file.hpp"

namespace pbseg::io {
namespace {

using detail::Json;
using detail::malformed;

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return s;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) malformed("results: checksum must be 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else malformed("results: bad checksum digit");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

}  // namespace

std::vector<Run> run_length_encode(std::span<const PointIndex> sorted) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[j - 1] + 1) ++j;
    runs.emplace_back(sorted[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return runs;
}

std::vector<PointIndex> run_length_decode(std::span<const Run> runs) {
  std::vector<PointIndex> out;
  for (const auto& [start, length] : runs) {
    if (length == 0) malformed("results: zero-length run");
    if (!out.empty() && start <= out.back()) malformed("results: runs not ascending");
    if (static_cast<std::uint64_t>(start) + length > (std::uint64_t{1} << 32)) {
      malformed("results: run exceeds index range");
    }
    for (std::uint32_t k = 0; k < length; ++k) out.push_back(start + k);
  }
  return out;
}

std::string results_to_json(const ResultsDocument& doc, const ClassCatalog& catalog,
                            bool include_timings) {
  Json instances = Json::array();
  for (std::size_t id = 0; id < doc.instances.size(); ++id) {
    const InstanceProposal& p = doc.instances[id];
    Json runs = Json::array();
    for (const auto& [start, length] : run_length_encode(p.point_indices)) {
      runs.push_back(Json::array({start, length}));
    }
    instances.push_back({{"id", id},
                         {"class_id", p.class_id},
                         {"class", catalog.valid_id(p.class_id) ? catalog.at(p.class_id).name : ""},
                         {"score", p.score},
                         {"size", p.size()},
                         {"centroid", detail::to_json(p.centroid)},
                         {"mask_rle", runs}});
  }
  Json j = {{"schema_version", kResultsSchemaVersion},
            {"config", detail::to_json(doc.config)},
            {"cloud",
             {{"path", doc.cloud.path},
              {"points", doc.cloud.points},
              {"checksum", hex64(doc.cloud.checksum)}}},
            {"counts", detail::to_json(doc.meta, false)},
            {"instances", instances}};
  if (doc.eval) j["eval"] = detail::to_json(*doc.eval);
  if (include_timings) {
    Json t = Json::object();
    for (const StageTiming& s : doc.meta.timings) t[s.stage] = s.milliseconds;
    j["timings"] = t;
  }
  return j.dump(1) + "\n";
}

ResultsDocument parse_results(std::string_view text) {
  const Json j = detail::parse_json(text, "results");
  return detail::guarded("results", [&] {
    detail::expect_keys(j, "results",
                        {"schema_version", "config", "cloud", "counts", "instances", "eval",
                         "timings"});
    if (j.at("schema_version").get<int>() != kResultsSchemaVersion) {
      malformed("results: unsupported schema_version");
    }
    ResultsDocument doc;
    doc.config = detail::pipeline_from_json(j.at("config"));
    const Json& cloud = j.at("cloud");
    detail::expect_keys(cloud, "results cloud", {"path", "points", "checksum"});
    doc.cloud.path = cloud.at("path").get<std::string>();
    doc.cloud.points = cloud.at("points").get<std::uint64_t>();
    doc.cloud.checksum = parse_hex64(cloud.at("checksum").get<std::string>());

    const Json& counts = j.at("counts");
    RunMetadata& m = doc.meta;
    m.points = counts.at("points").get<std::size_t>();
    m.foreground_points = counts.at("foreground_points").get<std::size_t>();
    m.hp_count = counts.at("hp_count").get<std::size_t>();
    m.lp_count = counts.at("lp_count").get<std::size_t>();
    m.ignored_points = counts.at("ignored_points").get<std::size_t>();
    m.fallback_lps = counts.at("fallback_lps").get<std::size_t>();
    m.unassignable_lps = counts.at("unassignable_lps").get<std::size_t>();
    m.preliminary_instances = counts.at("preliminary_instances").get<std::size_t>();
    m.small_proposals_dropped = counts.at("small_proposals_dropped").get<std::size_t>();
    m.proposals_before_nms = counts.at("proposals_before_nms").get<std::size_t>();
    m.proposals_after_nms = counts.at("proposals_after_nms").get<std::size_t>();
    if (j.contains("timings")) {
      for (const auto& [stage, ms] : j["timings"].items()) {
        m.timings.push_back({stage, ms.get<double>()});
      }
    }

    for (const Json& inst : j.at("instances")) {
      detail::expect_keys(inst, "results instance",
                          {"id", "class_id", "class", "score", "size", "centroid", "mask_rle"});
      std::vector<Run> runs;
      for (const Json& r : inst.at("mask_rle")) {
        if (!r.is_array() || r.size() != 2) malformed("results: run must be [start, length]");
        runs.emplace_back(r[0].get<std::uint32_t>(), r[1].get<std::uint32_t>());
      }
      InstanceProposal p;
      p.point_indices = run_length_decode(runs);
      if (p.point_indices.empty()) malformed("results: empty instance mask");
      if (p.point_indices.back() >= doc.cloud.points) {
        malformed("results: instance index outside the referenced cloud");
      }
      if (inst.at("size").get<std::size_t>() != p.point_indices.size()) {
        malformed("results: instance size does not match its mask");
      }
      p.class_id = inst.at("class_id").get<ClassId>();
      p.score = inst.at("score").get<double>();
      p.centroid = detail::point_from_json(inst.at("centroid"), "centroid");
      doc.instances.push_back(std::move(p));
    }
    if (j.contains("eval")) doc.eval = detail::eval_report_from_json(j["eval"]);
    return doc;
  });
}

void write_results(const std::filesystem::path& path, const ResultsDocument& doc,
                   const ClassCatalog& catalog, bool include_timings) {
  write_file_atomic(path, results_to_json(doc, catalog, include_timings));
}

ResultsDocument read_results(const std::filesystem::path& path) {
  return parse_results(read_file(path));
}

std::string eval_report_to_json(const EvalReport& report) {
  return detail::to_json(report).dump(1) + "\n";
}

double foreground_coverage(std::span<const InstanceProposal> proposals,
                           const LabeledCloud& cloud, const ClassCatalog& catalog) {
  std::vector<std::uint8_t> covered(cloud.size(), 0);
  for (const InstanceProposal& p : proposals) {
    for (PointIndex i : p.point_indices) {
      if (i < covered.size()) covered[i] = 1;
    }
  }
  std::size_t fg = 0, hit = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (catalog.is_background(cloud.semantic[i])) continue;
    ++fg;
    hit += covered[i];
  }
  return fg == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(fg);
}

EvalReport evaluate(std::span<const InstanceProposal> proposals, const LabeledCloud& cloud,
                    const ClassCatalog& catalog, const EvalOptions& options) {
  if (!cloud.has_ground_truth()) {
    throw Error(ErrorCode::kMissingGroundTruth, "evaluation needs ground-truth instances");
  }
  for (const InstanceProposal& p : proposals) {
    if (!p.point_indices.empty() && p.point_indices.back() >= cloud.size()) {
      throw Error(ErrorCode::kInvalidArgument, "proposal index outside the cloud");
    }
  }
  const GroundTruthInstances gt = ground_truth_instances(cloud);
  EvalReport report = average_precision(proposals, gt, catalog, options);

  if (cloud.offsets.size() == cloud.size() && cloud.size() > 0) {
    const std::vector<Point3> target = ground_truth_offsets(cloud);
    std::vector<std::uint8_t> mask(cloud.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if ((*cloud.gt_instance)[i] != kBackgroundInstance) {
        mask[i] = 1;
        any = true;
      }
    }
    if (any) {
      report.offset_distance = offset_distance_metric(cloud.offsets, target, mask);
      try {
        report.offset_direction = offset_direction_metric(cloud.offsets, target, mask);
      } catch (const Error&) {
        // Every masked offset is zero; direction is undefined.
      }
    }
  }
  if (!gt.instance_ids.empty()) report.mean_dice = mean_dice(proposals, gt);
  return report;
}

}  // namespace pbseg::io
