#include "rsrf/scenes.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rsrf/error.hpp"

namespace rsrf {
namespace {

// Blobs are Gaussians lowered to reach exactly zero at kBlobCutoff radii, so
// the scene has compact support and a known bounding box.
constexpr double kBlobCutoff = 3.0;
const double kBlobFloor = std::exp(-0.5 * kBlobCutoff * kBlobCutoff);

Vec3 vec3_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError("expected a 3-vector, got " + j.dump());
  return {v[0], v[1], v[2]};
}

Vec6 vec6_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 6) throw ConfigError("expected a 6-vector, got " + j.dump());
  Vec6 out;
  for (int i = 0; i < 6; ++i) out[i] = v[i];
  return out;
}

}  // namespace

FieldSample ColorCubeScene::query(const Vec3& x, const Vec3&) const {
  if (!cube_.contains(x)) return {};
  return {(x - cube_.min).cwiseQuotient(cube_.extent()), density_};
}

double PlaneGridScene::pattern(double x, double y) const {
  const double k = std::numbers::pi / p_.cell;
  const double sx = std::tanh(p_.sharpness * std::sin(k * x) / (1.0 - std::exp(-p_.sharpness)));
  const double sy = std::tanh(p_.sharpness * std::sin(k * y) / (1.0 - std::exp(-p_.sharpness)));
  return 0.5 + 0.5 * sx * sy;
}

FieldSample PlaneGridScene::query(const Vec3& x, const Vec3&) const {
  if (x.z() < p_.depth || x.z() > p_.depth + p_.thickness) return {};
  if (std::abs(x.x()) > p_.half_extent || std::abs(x.y()) > p_.half_extent) return {};
  const double v = pattern(x.x(), x.y());
  return {v * p_.color_a + (1.0 - v) * p_.color_b, p_.density};
}

BlobFieldScene BlobFieldScene::random(int count, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> radius(0.18 * extent, 0.35 * extent);
  std::uniform_real_distribution<double> peak(6.0, 14.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Blob> blobs;
  for (int i = 0; i < count; ++i) {
    Blob b;
    b.center = Vec3(pos(rng), pos(rng), pos(rng)) * 0.75;
    b.radius = radius(rng);
    b.peak_density = peak(rng) / extent;
    // Saturated colors: one strong channel, the others mixed.
    Vec3 c(unit(rng), unit(rng), unit(rng));
    c[i % 3] = 0.85 + 0.15 * c[i % 3];
    c[(i + 1) % 3] *= 0.4;
    b.color = c;
    blobs.push_back(b);
  }
  return BlobFieldScene(std::move(blobs));
}

FieldSample BlobFieldScene::query(const Vec3& x, const Vec3&) const {
  double sigma = 0.0;
  Vec3 weighted = Vec3::Zero();
  for (const auto& b : blobs_) {
    const double r2 = (x - b.center).squaredNorm() / (b.radius * b.radius);
    if (r2 >= kBlobCutoff * kBlobCutoff) continue;
    const double s = b.peak_density * (std::exp(-0.5 * r2) - kBlobFloor) / (1.0 - kBlobFloor);
    sigma += s;
    weighted += s * b.color;
  }
  if (sigma <= 0.0) return {};
  return {weighted / sigma, sigma};
}

std::unique_ptr<RadianceField> make_scene(const nlohmann::json& spec) {
  try {
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "color_cube") {
      const double half = spec.value("half_size", 0.5);
      const Vec3 c = spec.contains("center") ? vec3_from(spec["center"]) : Vec3::Zero();
      return std::make_unique<ColorCubeScene>(Aabb{c - Vec3::Constant(half), c + Vec3::Constant(half)},
                                              spec.value("density", 1e3));
    }
    if (kind == "plane_grid") {
      PlaneGridScene::Params p;
      p.depth = spec.value("depth", p.depth);
      p.thickness = spec.value("thickness", p.thickness);
      p.cell = spec.value("cell", p.cell);
      p.sharpness = spec.value("sharpness", p.sharpness);
      p.density = spec.value("density", p.density);
      p.half_extent = spec.value("half_extent", p.half_extent);
      if (spec.contains("color_a")) p.color_a = vec3_from(spec["color_a"]);
      if (spec.contains("color_b")) p.color_b = vec3_from(spec["color_b"]);
      if (!(p.cell > 0.0) || !(p.thickness > 0.0) || !(p.sharpness > 0.0)) {
        throw ConfigError("plane_grid: cell, thickness and sharpness must be positive");
      }
      return std::make_unique<PlaneGridScene>(p);
    }
    if (kind == "blob_field") {
      if (spec.contains("blobs")) {
        std::vector<BlobFieldScene::Blob> blobs;
        for (const auto& b : spec["blobs"]) {
          blobs.push_back({vec3_from(b.at("center")), b.at("radius"), b.at("peak_density"),
                           vec3_from(b.at("color"))});
        }
        return std::make_unique<BlobFieldScene>(std::move(blobs));
      }
      auto blobs = BlobFieldScene::random(spec.value("count", 8), spec.value("extent", 1.0),
                                          spec.value("seed", std::uint64_t{0}))
                       .blobs();
      const double scale = spec.value("density_scale", 1.0);
      if (!(scale > 0.0)) throw ConfigError("blob_field: density_scale must be positive");
      const double rscale = spec.value("radius_scale", 1.0);
      if (!(rscale > 0.0)) throw ConfigError("blob_field: radius_scale must be positive");
      for (auto& b : blobs) {
        b.peak_density *= scale;
        b.radius *= rscale;
      }
      return std::make_unique<BlobFieldScene>(std::move(blobs));
    }
    throw ConfigError("unknown scene kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

Aabb scene_bounds(const nlohmann::json& spec) {
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "color_cube") {
    const double half = spec.value("half_size", 0.5) * 1.1;
    const Vec3 c = spec.contains("center") ? vec3_from(spec["center"]) : Vec3::Zero();
    return {c - Vec3::Constant(half), c + Vec3::Constant(half)};
  }
  if (kind == "plane_grid") {
    const double depth = spec.value("depth", 2.0);
    const double thick = spec.value("thickness", 0.5);
    const double half = std::min(spec.value("half_extent", 1e3), 4.0 * depth);
    return {Vec3(-half, -half, depth), Vec3(half, half, depth + thick)};
  }
  if (kind == "blob_field") {
    const auto scene = make_scene(spec);
    Aabb box{Vec3::Constant(std::numeric_limits<double>::infinity()),
             Vec3::Constant(-std::numeric_limits<double>::infinity())};
    for (const auto& b : static_cast<const BlobFieldScene&>(*scene).blobs()) {
      box.min = box.min.cwiseMin(b.center - Vec3::Constant(kBlobCutoff * b.radius));
      box.max = box.max.cwiseMax(b.center + Vec3::Constant(kBlobCutoff * b.radius));
    }
    if (!(box.min.array() < box.max.array()).all()) throw ConfigError("blob_field: no blobs");
    return box;
  }
  throw ConfigError("unknown scene kind '" + kind + "'");
}

Pose SinusoidalMotion::pose(double t) const {
  Twist xi;
  for (int i = 0; i < 6; ++i) xi[i] = amp_[i] * std::sin(2.0 * std::numbers::pi * freq_[i] * t + phase_[i]);
  return base_ * exp_se3(xi);
}

nlohmann::json pose_to_json(const Pose& p) {
  const auto q = p.quaternion();
  const Vec3& t = p.translation();
  return {{"t", {t.x(), t.y(), t.z()}}, {"q", {q.x(), q.y(), q.z(), q.w()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  if (j.contains("eye")) {
    const Vec3 target = j.contains("target") ? vec3_from(j["target"]) : Vec3::Zero();
    return look_at(vec3_from(j["eye"]), target);
  }
  const Vec3 t = j.contains("t") ? vec3_from(j["t"]) : Vec3::Zero();
  if (!j.contains("q")) return Pose::from_translation(t);
  const auto q = j["q"].get<std::vector<double>>();
  if (q.size() != 4) throw ConfigError("pose quaternion must be [qx, qy, qz, qw]");
  return Pose::from_quaternion(Eigen::Quaterniond(q[3], q[0], q[1], q[2]), t);
}

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-9) x = z.cross(Vec3::UnitX());
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return {r, eye};
}

std::unique_ptr<Motion> make_motion(const nlohmann::json& spec) {
  try {
    const auto kind = spec.at("kind").get<std::string>();
    const Pose base = spec.contains("base") ? pose_from_json(spec["base"]) : Pose::identity();
    if (kind == "static") return std::make_unique<StaticMotion>(base);
    if (kind == "screw") {
      return std::make_unique<ScrewMotion>(base, vec6_from(spec.at("twist")), spec.value("t_ref", 0.0));
    }
    if (kind == "sinusoidal") {
      return std::make_unique<SinusoidalMotion>(base, vec6_from(spec.at("amplitude")),
                                                vec6_from(spec.at("frequency")),
                                                spec.contains("phase") ? vec6_from(spec["phase"]) : Vec6::Zero());
    }
    throw ConfigError("unknown motion kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("motion: ") + e.what());
  }
}

}  // namespace rsrf
