#include "json_convert.hpp"

#include <algorithm>

namespace pbseg::io::detail {

void malformed(const std::string& what) { throw Error(ErrorCode::kMalformedFile, what); }

void expect_keys(const Json& j, std::string_view where,
                 std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) malformed(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      malformed(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

Json parse_json(std::string_view text, std::string_view where) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    malformed(std::string(where) + ": " + e.what());
  }
}

namespace {

template <class T>
void read_if(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

Json to_json(const Point3& p) { return Json::array({p.x, p.y, p.z}); }

Point3 point_from_json(const Json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 3) malformed(std::string(where) + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json to_json(const ClassCatalog& catalog) {
  Json classes = Json::array();
  for (const ClassInfo& c : catalog.classes()) {
    classes.push_back({{"name", c.name},
                       {"background", c.background},
                       {"mean_size", c.mean_size},
                       {"mean_points", c.mean_points}});
  }
  return classes;
}

ClassCatalog catalog_from_json(const Json& j) {
  return guarded("catalog", [&] {
    if (!j.is_array()) malformed("catalog: expected an array of classes");
    std::vector<ClassInfo> classes;
    for (const Json& c : j) {
      expect_keys(c, "catalog class", {"name", "background", "mean_size", "mean_points"});
      ClassInfo info;
      info.name = c.at("name").get<std::string>();
      read_if(c, "background", info.background);
      read_if(c, "mean_size", info.mean_size);
      read_if(c, "mean_points", info.mean_points);
      classes.push_back(std::move(info));
    }
    return ClassCatalog(std::move(classes));
  });
}

Json to_json(const Provenance& p) {
  return {{"generator", p.generator}, {"rng", p.rng}, {"seed", p.seed}};
}

Provenance provenance_from_json(const Json& j) {
  return guarded("provenance", [&] {
    expect_keys(j, "provenance", {"generator", "rng", "seed"});
    Provenance p;
    read_if(j, "generator", p.generator);
    read_if(j, "rng", p.rng);
    read_if(j, "seed", p.seed);
    return p;
  });
}

Json to_json(const PipelineConfig& c) {
  Json j = {{"density_radius", c.density_radius},
            {"density_threshold", c.density_threshold},
            {"link_radius", c.effective_link_radius()},
            {"secondary_count", c.secondary_count},
            {"nms_iou", c.nms_iou},
            {"min_proposal_points", c.effective_min_proposal_points()},
            {"scorer", std::string(to_string(c.scorer))},
            {"clustering", std::string(to_string(c.clustering))},
            {"voting", c.voting},
            {"voting_mode", std::string(to_string(c.voting_mode))},
            {"local_scenes", c.local_scenes},
            {"refiner", std::string(to_string(c.refiner))},
            {"merge_reach", c.merge_reach},
            {"distance_min_points", c.distance_min_points},
            {"threads", c.threads}};
  return j;
}

PipelineConfig pipeline_from_json(const Json& j, PipelineConfig c) {
  return guarded("pipeline", [&] {
    expect_keys(j, "pipeline",
                {"density_radius", "density_threshold", "link_radius", "secondary_count",
                 "nms_iou", "min_proposal_points", "scorer", "clustering", "voting",
                 "voting_mode", "local_scenes", "refiner", "merge_reach",
                 "distance_min_points", "threads"});
    read_if(j, "density_radius", c.density_radius);
    read_if(j, "density_threshold", c.density_threshold);
    if (j.contains("link_radius")) c.link_radius = j["link_radius"].get<double>();
    read_if(j, "secondary_count", c.secondary_count);
    read_if(j, "nms_iou", c.nms_iou);
    if (j.contains("min_proposal_points")) {
      c.min_proposal_points = j["min_proposal_points"].get<std::uint32_t>();
    }
    if (j.contains("scorer")) c.scorer = parse_scorer(j["scorer"].get<std::string>());
    if (j.contains("clustering")) {
      c.clustering = parse_clustering_mode(j["clustering"].get<std::string>());
    }
    read_if(j, "voting", c.voting);
    if (j.contains("voting_mode")) {
      c.voting_mode = parse_voting_mode(j["voting_mode"].get<std::string>());
    }
    read_if(j, "local_scenes", c.local_scenes);
    if (j.contains("refiner")) c.refiner = parse_refiner(j["refiner"].get<std::string>());
    read_if(j, "merge_reach", c.merge_reach);
    read_if(j, "distance_min_points", c.distance_min_points);
    read_if(j, "threads", c.threads);
    c.validate();
    return c;
  });
}

Json to_json(const ClassTemplate& t) {
  return {{"name", t.name},
          {"shape", std::string(to_string(t.shape))},
          {"size_min", to_json(t.size_min)},
          {"size_max", to_json(t.size_max)},
          {"weight", t.weight}};
}

ClassTemplate class_template_from_json(const Json& j) {
  expect_keys(j, "class template", {"name", "shape", "size_min", "size_max", "weight"});
  ClassTemplate t;
  t.name = j.at("name").get<std::string>();
  t.shape = parse_shape(j.at("shape").get<std::string>());
  t.size_min = point_from_json(j.at("size_min"), "size_min");
  t.size_max = point_from_json(j.at("size_max"), "size_max");
  read_if(j, "weight", t.weight);
  return t;
}

Json to_json(const SceneConfig& c) {
  Json classes = Json::array();
  for (const ClassTemplate& t : c.classes) classes.push_back(to_json(t));
  return {{"num_objects", c.num_objects},
          {"classes", classes},
          {"surface_density", c.surface_density},
          {"min_points_per_instance", c.min_points_per_instance},
          {"adjacency_probability", c.adjacency_probability},
          {"adjacency_gap", c.adjacency_gap},
          {"room_extent", c.room_extent},
          {"clearance", c.clearance},
          {"floor_density", c.floor_density},
          {"seed", c.seed},
          {"max_placement_attempts", c.max_placement_attempts}};
}

SceneConfig scene_from_json(const Json& j, SceneConfig c) {
  return guarded("scene", [&] {
    expect_keys(j, "scene",
                {"num_objects", "classes", "surface_density", "min_points_per_instance",
                 "adjacency_probability", "adjacency_gap", "room_extent", "clearance",
                 "floor_density", "seed", "max_placement_attempts"});
    read_if(j, "num_objects", c.num_objects);
    if (j.contains("classes")) {
      c.classes.clear();
      for (const Json& t : j["classes"]) c.classes.push_back(class_template_from_json(t));
    }
    read_if(j, "surface_density", c.surface_density);
    read_if(j, "min_points_per_instance", c.min_points_per_instance);
    read_if(j, "adjacency_probability", c.adjacency_probability);
    read_if(j, "adjacency_gap", c.adjacency_gap);
    read_if(j, "room_extent", c.room_extent);
    read_if(j, "clearance", c.clearance);
    read_if(j, "floor_density", c.floor_density);
    read_if(j, "seed", c.seed);
    read_if(j, "max_placement_attempts", c.max_placement_attempts);
    c.validate();
    return c;
  });
}

Json to_json(const NoiseModel& n) {
  return {{"kind", std::string(to_string(n.kind))},
          {"sigma", n.sigma},
          {"boundary_pull", n.boundary_pull},
          {"boundary_band", n.boundary_band},
          {"boundary_points_per_meter", n.boundary_points_per_meter},
          {"pull_jitter", n.pull_jitter},
          {"semantic_error_rate", n.semantic_error_rate},
          {"seed", n.seed}};
}

NoiseModel noise_from_json(const Json& j, NoiseModel n) {
  return guarded("noise", [&] {
    expect_keys(j, "noise",
                {"kind", "sigma", "boundary_pull", "boundary_band", "boundary_points_per_meter",
                 "pull_jitter", "semantic_error_rate", "seed"});
    if (j.contains("kind")) n.kind = parse_noise_kind(j["kind"].get<std::string>());
    read_if(j, "sigma", n.sigma);
    read_if(j, "boundary_pull", n.boundary_pull);
    read_if(j, "boundary_band", n.boundary_band);
    read_if(j, "boundary_points_per_meter", n.boundary_points_per_meter);
    read_if(j, "pull_jitter", n.pull_jitter);
    read_if(j, "semantic_error_rate", n.semantic_error_rate);
    read_if(j, "seed", n.seed);
    n.validate();
    return n;
  });
}

Json to_json(const EvalOptions& o) {
  return {{"overlaps", o.overlaps}, {"integration", to_string(o.integration)}};
}

EvalOptions eval_options_from_json(const Json& j, EvalOptions o) {
  return guarded("eval", [&] {
    expect_keys(j, "eval", {"overlaps", "integration"});
    read_if(j, "overlaps", o.overlaps);
    if (j.contains("integration")) {
      o.integration = parse_integration(j["integration"].get<std::string>());
    }
    if (o.overlaps.empty()) malformed("eval: overlaps must not be empty");
    return o;
  });
}

Json to_json(const EvalReport& r) {
  Json classes = Json::array();
  for (const ClassAp& c : r.classes) {
    classes.push_back({{"class_id", c.class_id},
                       {"name", c.name},
                       {"gt_count", c.gt_count},
                       {"pred_count", c.pred_count},
                       {"ap", c.ap},
                       {"map", c.map},
                       {"ap50", c.ap50},
                       {"ap25", c.ap25},
                       {"precision50", c.precision50},
                       {"recall50", c.recall50}});
  }
  Json j = {{"overlaps", r.overlaps},
            {"integration", to_string(r.integration)},
            {"classes", classes},
            {"map", r.map},
            {"ap50", r.ap50},
            {"ap25", r.ap25},
            {"mean_precision50", r.mean_precision50},
            {"mean_recall50", r.mean_recall50},
            {"gt_instances", r.gt_instances},
            {"pred_instances", r.pred_instances}};
  if (r.offset_distance) j["offset_distance"] = *r.offset_distance;
  if (r.offset_direction) {
    j["offset_direction"] = {{"value", r.offset_direction->value},
                             {"included", r.offset_direction->included},
                             {"excluded", r.offset_direction->excluded}};
  }
  if (r.mean_dice) j["mean_dice"] = *r.mean_dice;
  return j;
}

EvalReport eval_report_from_json(const Json& j) {
  return guarded("eval report", [&] {
    EvalReport r;
    r.overlaps = j.at("overlaps").get<std::vector<double>>();
    r.integration = parse_integration(j.at("integration").get<std::string>());
    for (const Json& c : j.at("classes")) {
      ClassAp a;
      a.class_id = c.at("class_id").get<ClassId>();
      a.name = c.at("name").get<std::string>();
      a.gt_count = c.at("gt_count").get<std::size_t>();
      a.pred_count = c.at("pred_count").get<std::size_t>();
      a.ap = c.at("ap").get<std::vector<double>>();
      a.map = c.at("map").get<double>();
      a.ap50 = c.at("ap50").get<double>();
      a.ap25 = c.at("ap25").get<double>();
      a.precision50 = c.at("precision50").get<double>();
      a.recall50 = c.at("recall50").get<double>();
      r.classes.push_back(std::move(a));
    }
    r.map = j.at("map").get<double>();
    r.ap50 = j.at("ap50").get<double>();
    r.ap25 = j.at("ap25").get<double>();
    r.mean_precision50 = j.at("mean_precision50").get<double>();
    r.mean_recall50 = j.at("mean_recall50").get<double>();
    r.gt_instances = j.at("gt_instances").get<std::size_t>();
    r.pred_instances = j.at("pred_instances").get<std::size_t>();
    if (j.contains("offset_distance")) r.offset_distance = j["offset_distance"].get<double>();
    if (j.contains("offset_direction")) {
      const Json& d = j["offset_direction"];
      r.offset_direction = OffsetDirection{d.at("value").get<double>(),
                                           d.at("included").get<std::size_t>(),
                                           d.at("excluded").get<std::size_t>()};
    }
    if (j.contains("mean_dice")) r.mean_dice = j["mean_dice"].get<double>();
    return r;
  });
}

Json to_json(const RunMetadata& m, bool include_timings) {
  Json j = {{"points", m.points},
            {"foreground_points", m.foreground_points},
            {"hp_count", m.hp_count},
            {"lp_count", m.lp_count},
            {"ignored_points", m.ignored_points},
            {"fallback_lps", m.fallback_lps},
            {"unassignable_lps", m.unassignable_lps},
            {"preliminary_instances", m.preliminary_instances},
            {"small_proposals_dropped", m.small_proposals_dropped},
            {"proposals_before_nms", m.proposals_before_nms},
            {"proposals_after_nms", m.proposals_after_nms}};
  if (include_timings) {
    Json t = Json::array();
    for (const StageTiming& s : m.timings) {
      t.push_back({{"stage", s.stage}, {"milliseconds", s.milliseconds}});
    }
    j["timings"] = t;
  }
  return j;
}

}  // namespace pbseg::io::detail
