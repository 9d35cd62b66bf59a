#pragma once

// Analytic scenes and camera motions with exact answers, used to generate
// ground-truth datasets and as reference fields in tests.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsrf/field.hpp"
#include "rsrf/trajectory.hpp"

namespace rsrf {

/// Opaque cube whose color encodes the normalized position inside it.
class ColorCubeScene final : public RadianceField {
 public:
  ColorCubeScene(Aabb cube, double density) : cube_(cube), density_(density) {}
  FieldSample query(const Vec3& x, const Vec3& d) const override;
  const Aabb& cube() const { return cube_; }

 private:
  Aabb cube_;
  double density_;
};

/// Slab z in [depth, depth + thickness] carrying a checkerboard of period
/// `cell`. Edges are smoothed with a tanh profile of `sharpness`; the 50%
/// crossings sit exactly on x = m * cell and y = m * cell.
class PlaneGridScene final : public RadianceField {
 public:
  struct Params {
    double depth = 2.0;
    double thickness = 0.5;
    double cell = 0.5;
    double sharpness = 1.0;
    double density = 1e3;
    Vec3 color_a = Vec3::Ones();
    Vec3 color_b = Vec3::Zero();
    double half_extent = 1e3;  ///< lateral half size of the slab
  };
  explicit PlaneGridScene(const Params& p) : p_(p) {}
  FieldSample query(const Vec3& x, const Vec3& d) const override;
  /// Blend factor in [0, 1] between color_b and color_a at (x, y).
  double pattern(double x, double y) const;
  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Sum of isotropic Gaussian density blobs, each truncated continuously to
/// zero at 3 radii; color is the density-weighted mix.
class BlobFieldScene final : public RadianceField {
 public:
  struct Blob {
    Vec3 center = Vec3::Zero();
    double radius = 0.3;
    double peak_density = 10.0;
    Vec3 color = Vec3::Constant(0.5);
  };
  explicit BlobFieldScene(std::vector<Blob> blobs) : blobs_(std::move(blobs)) {}
  /// `count` blobs inside [-extent, extent]^3 drawn from `seed`.
  static BlobFieldScene random(int count, double extent, std::uint64_t seed);
  FieldSample query(const Vec3& x, const Vec3& d) const override;
  const std::vector<Blob>& blobs() const { return blobs_; }

 private:
  std::vector<Blob> blobs_;
};

/// JSON description: {"kind": "color_cube" | "plane_grid" | "blob_field", ...}.
/// Random blob fields accept count, extent, seed, density_scale and radius_scale.
std::unique_ptr<RadianceField> make_scene(const nlohmann::json& spec);
/// Bounding box of the content (blob fields: exact, every blob to 3 radii),
/// used for field bounds and noise scale.
Aabb scene_bounds(const nlohmann::json& spec);

/// Analytic camera motion (camera-to-world pose as a C1 function of time).
class Motion {
 public:
  virtual ~Motion() = default;
  virtual Pose pose(double t) const = 0;
};

class StaticMotion final : public Motion {
 public:
  explicit StaticMotion(Pose p) : p_(p) {}
  Pose pose(double) const override { return p_; }

 private:
  Pose p_;
};

/// base * exp((t - t_ref) * xi): constant body-frame twist.
class ScrewMotion final : public Motion {
 public:
  ScrewMotion(Pose base, Twist xi, double t_ref = 0.0) : base_(base), xi_(xi), t_ref_(t_ref) {}
  Pose pose(double t) const override { return base_ * exp_se3((t - t_ref_) * xi_); }

 private:
  Pose base_;
  Twist xi_;
  double t_ref_;
};

/// base * exp(xi(t)) with xi_i(t) = amplitude_i * sin(2 pi freq_i t + phase_i).
class SinusoidalMotion final : public Motion {
 public:
  SinusoidalMotion(Pose base, Vec6 amplitude, Vec6 frequency, Vec6 phase)
      : base_(base), amp_(amplitude), freq_(frequency), phase_(phase) {}
  Pose pose(double t) const override;

 private:
  Pose base_;
  Vec6 amp_, freq_, phase_;
};

/// Motion given by an existing trajectory model.
class SplineMotion final : public Motion {
 public:
  explicit SplineMotion(Trajectory traj) : traj_(std::move(traj)) {}
  Pose pose(double t) const override { return traj_.query_pose(t); }

 private:
  Trajectory traj_;
};

/// JSON description: {"kind": "static" | "screw" | "sinusoidal", "base": {...}, ...}.
std::unique_ptr<Motion> make_motion(const nlohmann::json& spec);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

/// Camera at `eye` looking at `target` (camera +z forward, +y down).
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0.0, -1.0, 0.0));

}  // namespace rsrf
