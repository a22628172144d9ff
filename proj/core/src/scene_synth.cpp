#include "pbseg/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>

#include "pbseg/geometry.hpp"
#include "pbseg/random.hpp"
#include "pbseg/spatial_index.hpp"

namespace pbseg {

Shape parse_shape(std::string_view name) {
  if (name == "box") return Shape::kBox;
  if (name == "sphere") return Shape::kSphere;
  if (name == "cylinder") return Shape::kCylinder;
  if (name == "l_shape") return Shape::kLShape;
  throw Error(ErrorCode::kInvalidArgument, "unknown shape '" + std::string(name) + "'");
}

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::kBox:
      return "box";
    case Shape::kSphere:
      return "sphere";
    case Shape::kCylinder:
      return "cylinder";
    case Shape::kLShape:
      return "l_shape";
  }
  return "box";
}

OffsetNoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian") return OffsetNoiseKind::kGaussian;
  if (name == "heavy_tail") return OffsetNoiseKind::kHeavyTail;
  if (name == "boundary_pull") return OffsetNoiseKind::kBoundaryPull;
  throw Error(ErrorCode::kInvalidArgument, "unknown noise kind '" + std::string(name) + "'");
}

std::string_view to_string(OffsetNoiseKind kind) {
  switch (kind) {
    case OffsetNoiseKind::kGaussian:
      return "gaussian";
    case OffsetNoiseKind::kHeavyTail:
      return "heavy_tail";
    case OffsetNoiseKind::kBoundaryPull:
      return "boundary_pull";
  }
  return "gaussian";
}

std::vector<ClassTemplate> default_class_templates() {
  return {
      {"chair", Shape::kLShape, {0.45, 0.45, 0.80}, {0.55, 0.55, 1.00}, 3.0},
      {"table", Shape::kBox, {0.90, 0.60, 0.70}, {1.40, 0.90, 0.80}, 2.0},
      {"sofa", Shape::kLShape, {1.50, 0.80, 0.70}, {2.00, 1.00, 0.90}, 1.0},
      {"cabinet", Shape::kBox, {0.50, 0.40, 0.90}, {0.90, 0.60, 1.30}, 1.5},
      {"bin", Shape::kCylinder, {0.15, 0.0, 0.40}, {0.22, 0.0, 0.60}, 1.0},
      {"ball", Shape::kSphere, {0.15, 0.0, 0.0}, {0.25, 0.0, 0.0}, 1.0},
  };
}

void SceneConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (classes.empty()) fail("scene config needs at least one class");
  if (!(surface_density > 0.0)) fail("surface_density must be > 0");
  if (floor_density < 0.0) fail("floor_density must be >= 0");
  if (!(adjacency_probability >= 0.0 && adjacency_probability <= 1.0)) {
    fail("adjacency_probability outside [0,1]");
  }
  if (clearance < 0.0) fail("clearance must be >= 0");
  if (room_extent < 0.0) fail("room_extent must be >= 0");
  if (max_placement_attempts == 0) fail("max_placement_attempts must be > 0");
  for (const auto& c : classes) {
    if (c.name.empty()) fail("class template without a name");
    if (!(c.weight >= 0.0)) fail("class weight must be >= 0");
    const bool radius_only = c.shape == Shape::kSphere;
    const bool needs_depth = c.shape == Shape::kBox || c.shape == Shape::kLShape;
    if (!(c.size_min.x > 0.0) || c.size_max.x < c.size_min.x) fail("bad size range for " + c.name);
    if (needs_depth && (!(c.size_min.y > 0.0) || c.size_max.y < c.size_min.y)) {
      fail("bad depth range for " + c.name);
    }
    if (!radius_only && (!(c.size_min.z > 0.0) || c.size_max.z < c.size_min.z)) {
      fail("bad height range for " + c.name);
    }
  }
}

void NoiseModel::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (!(sigma >= 0.0)) fail("noise sigma must be >= 0");
  if (!(boundary_pull >= 0.0)) fail("boundary_pull must be >= 0");
  if (!(boundary_band >= 0.0)) fail("boundary_band must be >= 0");
  if (!(boundary_points_per_meter >= 0.0)) fail("boundary_points_per_meter must be >= 0");
  if (!(pull_jitter >= 0.0)) fail("pull_jitter must be >= 0");
  if (!(semantic_error_rate >= 0.0 && semantic_error_rate <= 1.0)) {
    fail("semantic_error_rate outside [0,1]");
  }
}

namespace {

// Surface element in object-local coordinates (footprint at [0,w]x[0,d]).
struct Patch {
  enum class Kind { kRect, kCylinderSide, kDisk, kSphere } kind;
  Point3 origin;  // rect corner or circle/sphere center
  Point3 u;       // rect edges; for round patches u.x = radius, u.z = height
  Point3 v;
  double area;
};

void add_box(std::vector<Patch>& out, Point3 o, double w, double d, double h) {
  using K = Patch::Kind;
  out.push_back({K::kRect, {o.x, o.y, o.z + h}, {w, 0, 0}, {0, d, 0}, w * d});  // top
  out.push_back({K::kRect, o, {w, 0, 0}, {0, 0, h}, w * h});                    // y = y0
  out.push_back({K::kRect, {o.x, o.y + d, o.z}, {w, 0, 0}, {0, 0, h}, w * h});  // y = y1
  out.push_back({K::kRect, o, {0, d, 0}, {0, 0, h}, d * h});                    // x = x0
  out.push_back({K::kRect, {o.x + w, o.y, o.z}, {0, d, 0}, {0, 0, h}, d * h});  // x = x1
}

std::vector<Patch> object_patches(Shape shape, const Point3& size) {
  using K = Patch::Kind;
  constexpr double pi = std::numbers::pi;
  std::vector<Patch> out;
  switch (shape) {
    case Shape::kBox:
      add_box(out, {0, 0, 0}, size.x, size.y, size.z);
      break;
    case Shape::kLShape: {
      const double base_h = 0.45 * size.z;
      const double back_d = std::max(0.05, 0.2 * size.y);
      add_box(out, {0, 0, 0}, size.x, size.y, base_h);
      add_box(out, {0, size.y - back_d, base_h}, size.x, back_d, size.z - base_h);
      break;
    }
    case Shape::kCylinder: {
      const double r = size.x, h = size.z;
      out.push_back({K::kCylinderSide, {r, r, 0}, {r, 0, h}, {}, 2 * pi * r * h});
      out.push_back({K::kDisk, {r, r, h}, {r, 0, 0}, {}, pi * r * r});
      break;
    }
    case Shape::kSphere: {
      const double r = size.x;
      out.push_back({K::kSphere, {r, r, r}, {r, 0, 0}, {}, 4 * pi * r * r});
      break;
    }
  }
  return out;
}

Point3 sample_patch(const Patch& p, Rng& rng) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  switch (p.kind) {
    case Patch::Kind::kRect: {
      const double a = rng.uniform(), b = rng.uniform();
      return p.origin + p.u * a + p.v * b;
    }
    case Patch::Kind::kCylinderSide: {
      const double theta = two_pi * rng.uniform();
      const double z = p.u.z * rng.uniform();
      return {p.origin.x + p.u.x * std::cos(theta), p.origin.y + p.u.x * std::sin(theta),
              p.origin.z + z};
    }
    case Patch::Kind::kDisk: {
      const double rho = p.u.x * std::sqrt(rng.uniform());
      const double theta = two_pi * rng.uniform();
      return {p.origin.x + rho * std::cos(theta), p.origin.y + rho * std::sin(theta),
              p.origin.z};
    }
    case Patch::Kind::kSphere: {
      const double z = 2.0 * rng.uniform() - 1.0;
      const double theta = two_pi * rng.uniform();
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      return {p.origin.x + p.u.x * s * std::cos(theta), p.origin.y + p.u.x * s * std::sin(theta),
              p.origin.z + p.u.x * z};
    }
  }
  return p.origin;
}

// Local footprint extent before rotation.
std::pair<double, double> local_footprint(Shape shape, const Point3& size) {
  if (shape == Shape::kBox || shape == Shape::kLShape) return {size.x, size.y};
  return {2 * size.x, 2 * size.x};
}

double nominal_diameter(const ClassTemplate& t) {
  const Point3 s = (t.size_min + t.size_max) * 0.5;
  switch (t.shape) {
    case Shape::kBox:
    case Shape::kLShape:
      return std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z);
    case Shape::kCylinder:
      return std::sqrt(4 * s.x * s.x + s.z * s.z);
    case Shape::kSphere:
      return 2 * s.x;
  }
  return 1.0;
}

double nominal_area(const ClassTemplate& t) {
  const Point3 s = (t.size_min + t.size_max) * 0.5;
  double a = 0.0;
  for (const auto& p : object_patches(t.shape, s)) a += p.area;
  return a;
}

struct Rect {
  double x0, y0, x1, y1;
};

double rect_gap(const Rect& a, const Rect& b) {
  const double dx = std::max({0.0, a.x0 - b.x1, b.x0 - a.x1});
  const double dy = std::max({0.0, a.y0 - b.y1, b.y0 - a.y1});
  return std::sqrt(dx * dx + dy * dy);
}

struct ObjectPlan {
  std::size_t template_id;
  Point3 size;
  int rotation;
  double fw, fd;  // footprint after rotation
  int partner;    // index of the object to stand against, or -1
};

}  // namespace

SynthScene generate_scene(const SceneConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, 0));

  std::vector<double> weights;
  for (const auto& t : config.classes) weights.push_back(t.weight);

  std::vector<ObjectPlan> plans;
  std::vector<std::uint8_t> has_partner;
  for (std::size_t k = 0; k < config.num_objects; ++k) {
    int partner = -1;
    if (k > 0 && rng.uniform() < config.adjacency_probability) {
      std::vector<int> free;
      for (std::size_t j = 0; j < plans.size(); ++j) {
        if (!has_partner[j]) free.push_back(static_cast<int>(j));
      }
      if (!free.empty()) partner = free[rng.below(free.size())];
    }
    const std::size_t tid =
        partner >= 0 ? plans[static_cast<std::size_t>(partner)].template_id : rng.weighted(weights);
    const ClassTemplate& t = config.classes[tid];
    const Point3 size{rng.uniform(t.size_min.x, t.size_max.x),
                      rng.uniform(t.size_min.y, t.size_max.y),
                      rng.uniform(t.size_min.z, t.size_max.z)};
    const int rotation = static_cast<int>(rng.below(4));
    auto [w, d] = local_footprint(t.shape, size);
    if (rotation % 2 == 1) std::swap(w, d);
    plans.push_back({tid, size, rotation, w, d, partner});
    has_partner.push_back(partner >= 0 ? 1 : 0);
    if (partner >= 0) has_partner[static_cast<std::size_t>(partner)] = 1;
  }

  double extent = config.room_extent;
  if (extent == 0.0) {
    double area = 0.0, largest = 0.0;
    for (const auto& s : plans) {
      area += (s.fw + config.clearance) * (s.fd + config.clearance);
      largest = std::max({largest, s.fw, s.fd});
    }
    extent = std::max(std::sqrt(3.0 * area), 2.0 * largest + config.clearance);
  }

  std::vector<Rect> placed;
  auto fits = [&](const Rect& r, int ignore) {
    if (r.x0 < 0.0 || r.y0 < 0.0 || r.x1 > extent || r.y1 > extent) return false;
    for (std::size_t j = 0; j < placed.size(); ++j) {
      if (static_cast<int>(j) == ignore) continue;
      if (rect_gap(r, placed[j]) < config.clearance) return false;
    }
    return true;
  };

  SynthScene scene;
  scene.seed = config.seed;
  scene.room_extent = extent;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    ObjectPlan& s = plans[k];
    bool ok = false;
    Rect r{};
    if (s.partner >= 0) {
      const Rect& a = placed[static_cast<std::size_t>(s.partner)];
      for (std::size_t attempt = 0; attempt < config.max_placement_attempts && !ok; ++attempt) {
        const int side = static_cast<int>(rng.below(4));
        const double gap = config.adjacency_gap;
        if (side < 2) {
          const double slack = 0.25 * std::min(a.y1 - a.y0, s.fd);
          const double y0 = 0.5 * (a.y0 + a.y1 - s.fd) + rng.uniform(-slack, slack);
          const double x0 = side == 0 ? a.x1 + gap : a.x0 - gap - s.fw;
          r = {x0, y0, x0 + s.fw, y0 + s.fd};
        } else {
          const double slack = 0.25 * std::min(a.x1 - a.x0, s.fw);
          const double x0 = 0.5 * (a.x0 + a.x1 - s.fw) + rng.uniform(-slack, slack);
          const double y0 = side == 2 ? a.y1 + gap : a.y0 - gap - s.fd;
          r = {x0, y0, x0 + s.fw, y0 + s.fd};
        }
        ok = fits(r, s.partner);
      }
      if (!ok) s.partner = -1;  // no room next to it; place freely
    }
    for (std::size_t attempt = 0; attempt < config.max_placement_attempts && !ok; ++attempt) {
      const double x0 = rng.uniform(0.0, std::max(0.0, extent - s.fw));
      const double y0 = rng.uniform(0.0, std::max(0.0, extent - s.fd));
      r = {x0, y0, x0 + s.fw, y0 + s.fd};
      ok = fits(r, -1);
    }
    if (!ok) {
      throw Error(ErrorCode::kInfeasiblePlacement,
                  "could not place object " + std::to_string(k) + " of " +
                      std::to_string(plans.size()) + " (" + config.classes[s.template_id].name +
                      ", footprint " + std::to_string(s.fw) + " x " + std::to_string(s.fd) +
                      ") in a " + std::to_string(extent) + " m room after " +
                      std::to_string(config.max_placement_attempts) + " attempts");
    }
    placed.push_back(r);
    scene.objects.push_back(SceneObject{static_cast<InstanceId>(k),
                                        static_cast<ClassId>(s.template_id + 1),
                                        config.classes[s.template_id].shape, s.size, r.x0, r.y0,
                                        s.fw, s.fd, static_cast<InstanceId>(s.partner)});
  }

  LabeledCloud& cloud = scene.cloud;
  std::vector<InstanceId> gt_instance;
  std::vector<ClassId> gt_semantic;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const ObjectPlan& s = plans[k];
    const auto patches = object_patches(config.classes[s.template_id].shape, s.size);
    std::vector<double> areas;
    double area = 0.0;
    for (const auto& p : patches) {
      areas.push_back(p.area);
      area += p.area;
    }
    const auto n = std::max<std::size_t>(config.min_points_per_instance,
                                         static_cast<std::size_t>(std::llround(area * config.surface_density)));
    const auto [lw, ld] = local_footprint(config.classes[s.template_id].shape, s.size);
    const SceneObject& obj = scene.objects[k];
    for (std::size_t i = 0; i < n; ++i) {
      const Point3 l = sample_patch(patches[rng.weighted(areas)], rng);
      double x = l.x, y = l.y;
      switch (s.rotation) {
        case 1: x = ld - l.y; y = l.x; break;
        case 2: x = lw - l.x; y = ld - l.y; break;
        case 3: x = l.y; y = lw - l.x; break;
        default: break;
      }
      cloud.points.push_back({obj.x0 + x, obj.y0 + y, l.z});
      gt_instance.push_back(static_cast<InstanceId>(k));
      gt_semantic.push_back(obj.class_id);
    }
  }
  const auto floor_n = static_cast<std::size_t>(std::llround(extent * extent * config.floor_density));
  for (std::size_t i = 0; i < floor_n; ++i) {
    cloud.points.push_back({rng.uniform(0.0, extent), rng.uniform(0.0, extent), 0.0});
    gt_instance.push_back(kBackgroundInstance);
    gt_semantic.push_back(0);
  }
  cloud.semantic = gt_semantic;
  cloud.gt_instance = std::move(gt_instance);
  cloud.gt_semantic = std::move(gt_semantic);
  cloud.offsets = ground_truth_offsets(cloud);

  std::vector<ClassInfo> infos{{"floor", true, 0.0, 0.0}};
  for (const auto& t : config.classes) {
    infos.push_back({t.name, false, nominal_diameter(t),
                     std::max<double>(static_cast<double>(config.min_points_per_instance),
                                      nominal_area(t) * config.surface_density)});
  }
  scene.catalog = measure_catalog(cloud, ClassCatalog(std::move(infos)));
  return scene;
}

ClassCatalog measure_catalog(const LabeledCloud& cloud, const ClassCatalog& fallback) {
  const auto gt = ground_truth_instances(cloud);
  std::map<ClassId, std::pair<double, double>> sums;  // diameter, points
  std::map<ClassId, std::size_t> counts;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const Point3 c = centroid(cloud.points, gt.members[k]);
    double r2 = 0.0;
    for (PointIndex i : gt.members[k]) r2 = std::max(r2, squared_distance(cloud.points[i], c));
    auto& [dsum, psum] = sums[gt.class_ids[k]];
    dsum += 2.0 * std::sqrt(r2);
    psum += static_cast<double>(gt.members[k].size());
    ++counts[gt.class_ids[k]];
  }
  std::vector<ClassInfo> infos = fallback.classes();
  for (const auto& [cls, s] : sums) {
    if (!fallback.valid_id(cls) || infos[static_cast<std::size_t>(cls)].background) continue;
    const double n = static_cast<double>(counts[cls]);
    auto& info = infos[static_cast<std::size_t>(cls)];
    // A single degenerate instance would give r_m = 0; keep the fallback.
    if (s.first > 0.0) info.mean_size = s.first / n;
    info.mean_points = s.second / n;
  }
  return ClassCatalog(std::move(infos));
}

std::vector<std::pair<InstanceId, InstanceId>> contact_pairs(const LabeledCloud& cloud,
                                                             double band) {
  const auto gt = ground_truth_instances(cloud);
  std::vector<SpatialIndex::Box> boxes(gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k) {
    Point3 lo = cloud.points[gt.members[k].front()], hi = lo;
    for (PointIndex i : gt.members[k]) {
      const Point3& p = cloud.points[i];
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    boxes[k] = {lo, hi};
  }
  auto box_gap2 = [](const SpatialIndex::Box& a, const SpatialIndex::Box& b) {
    const double dx = std::max({0.0, a.lo.x - b.hi.x, b.lo.x - a.hi.x});
    const double dy = std::max({0.0, a.lo.y - b.hi.y, b.lo.y - a.hi.y});
    const double dz = std::max({0.0, a.lo.z - b.hi.z, b.lo.z - a.hi.z});
    return dx * dx + dy * dy + dz * dz;
  };

  std::vector<std::pair<InstanceId, InstanceId>> out;
  for (std::size_t a = 0; a < gt.size(); ++a) {
    std::optional<SpatialIndex> tree;
    for (std::size_t b = a + 1; b < gt.size(); ++b) {
      if (gt.class_ids[a] != gt.class_ids[b]) continue;
      if (box_gap2(boxes[a], boxes[b]) > band * band) continue;
      if (!tree) {
        std::vector<Point3> pts;
        for (PointIndex i : gt.members[a]) pts.push_back(cloud.points[i]);
        tree.emplace(pts);
      }
      bool touching = false;
      for (PointIndex i : gt.members[b]) {
        if (tree->knn_query(cloud.points[i], 1).front().distance <= band) {
          touching = true;
          break;
        }
      }
      if (touching) out.emplace_back(gt.instance_ids[a], gt.instance_ids[b]);
    }
  }
  return out;
}

namespace {

// Per-point pull targets for boundary points; unset entries keep gt offsets.
std::vector<std::optional<Point3>> pull_targets(const LabeledCloud& cloud, const NoiseModel& noise) {
  std::vector<std::optional<Point3>> targets(cloud.size());
  if (noise.boundary_pull == 0.0 || noise.boundary_points_per_meter == 0.0) return targets;
  const auto gt = ground_truth_instances(cloud);
  std::map<InstanceId, std::size_t> slot;
  for (std::size_t k = 0; k < gt.size(); ++k) slot[gt.instance_ids[k]] = k;
  std::vector<Point3> centroids(gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k) centroids[k] = centroid(cloud.points, gt.members[k]);

  struct Candidate {
    double d;
    PointIndex point;
    std::size_t partner;
  };
  // Closest contact partner per point. The band only decides which pairs
  // touch; each side then pulls its points nearest the partner, so a small
  // contact patch still yields a chain with the full density.
  std::map<PointIndex, Candidate> best;
  auto scan = [&](std::size_t own, std::size_t other) {
    std::vector<Point3> pts;
    for (PointIndex i : gt.members[other]) pts.push_back(cloud.points[i]);
    const SpatialIndex tree(pts);
    for (PointIndex i : gt.members[own]) {
      const double d = tree.knn_query(cloud.points[i], 1).front().distance;
      auto it = best.find(i);
      if (it == best.end() || d < it->second.d) best[i] = Candidate{d, i, other};
    }
  };
  for (const auto& [a, b] : contact_pairs(cloud, noise.boundary_band)) {
    scan(slot[a], slot[b]);
    scan(slot[b], slot[a]);
  }

  std::map<std::pair<std::size_t, std::size_t>, std::vector<Candidate>> groups;
  for (const auto& [i, c] : best) {
    groups[{slot[(*cloud.gt_instance)[i]], c.partner}].push_back(c);
  }
  for (auto& [key, cands] : groups) {
    const auto [own, partner] = key;
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
      return x.d < y.d || (x.d == y.d && x.point < y.point);
    });
    const Point3 mid = (centroids[own] + centroids[partner]) * 0.5;
    const Point3 path = mid - centroids[own];
    const double length = noise.boundary_pull * norm(path);
    const auto budget = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(noise.boundary_points_per_meter * length)));
    const std::size_t m = std::min(budget, cands.size());
    for (std::size_t r = 0; r < m; ++r) {
      const double t = noise.boundary_pull * (1.0 - static_cast<double>(r) / static_cast<double>(m));
      targets[cands[r].point] = centroids[own] + path * t;
    }
  }
  return targets;
}

double heavy_tail(Rng& rng) {
  // Student t with 3 degrees of freedom.
  const double z = rng.normal();
  double chi2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double g = rng.normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / 3.0);
}

}  // namespace

std::vector<Point3> perturb_offsets(const LabeledCloud& cloud, const NoiseModel& noise) {
  noise.validate();
  std::vector<Point3> offsets = ground_truth_offsets(cloud);
  const auto& gt = *cloud.gt_instance;
  std::vector<std::optional<Point3>> targets(cloud.size());
  if (noise.kind == OffsetNoiseKind::kBoundaryPull) targets = pull_targets(cloud, noise);

  Rng base(derive_seed(noise.seed, 1));
  Rng jitter(derive_seed(noise.seed, 2));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (gt[i] == kBackgroundInstance) {
      offsets[i] = {};
      continue;
    }
    Point3 e;
    if (noise.kind == OffsetNoiseKind::kHeavyTail) {
      e = {heavy_tail(base), heavy_tail(base), heavy_tail(base)};
    } else {
      e = {base.normal(), base.normal(), base.normal()};
    }
    if (targets[i]) {
      offsets[i] = *targets[i] - cloud.points[i];
      offsets[i] += Point3{jitter.normal(), jitter.normal(), jitter.normal()} * noise.pull_jitter;
    }
    offsets[i] += e * noise.sigma;
  }
  return offsets;
}

std::vector<ClassId> perturb_semantics(const LabeledCloud& cloud, const ClassCatalog& catalog,
                                       double error_rate, std::uint64_t seed) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "semantic error rate outside [0,1]");
  }
  const std::vector<ClassId>& truth = cloud.gt_semantic ? *cloud.gt_semantic : cloud.semantic;
  const auto fg = catalog.foreground_ids();
  std::vector<ClassId> out = truth;
  Rng rng(derive_seed(seed, 3));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (catalog.is_background(truth[i])) continue;
    const double u = rng.uniform();
    if (fg.size() < 2 || !(u < error_rate)) continue;
    std::size_t pick = rng.below(fg.size() - 1);
    const auto own = std::find(fg.begin(), fg.end(), truth[i]) - fg.begin();
    if (pick >= static_cast<std::size_t>(own)) ++pick;
    out[i] = fg[pick];
  }
  return out;
}

void apply_noise(SynthScene& scene, const NoiseModel& noise) {
  scene.cloud.offsets = perturb_offsets(scene.cloud, noise);
  scene.cloud.semantic = perturb_semantics(scene.cloud, scene.catalog, noise.semantic_error_rate,
                                           derive_seed(noise.seed, 7));
}

}  // namespace pbseg
