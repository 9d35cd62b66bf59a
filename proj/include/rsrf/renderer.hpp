#pragma once

// Emission-absorption volume rendering along camera rays, its backward pass,
// and rolling-shutter image assembly where row r is rendered at the pose of
// its own capture time.

#include <cstdint>
#include <span>
#include <vector>

#include "rsrf/camera.hpp"
#include "rsrf/field.hpp"
#include "rsrf/image.hpp"
#include "rsrf/trajectory.hpp"

namespace rsrf {

/// Length assigned to the last sample interval so the final sample absorbs
/// whatever transmittance is left.
inline constexpr double kFarDelta = 1e10;

struct SamplingConfig {
  double near = 0.1;
  double far = 6.0;
  int n_samples = 64;
  bool stratified = false;
  std::uint64_t rng_seed = 0;
  Vec3 background = Vec3::Zero();

  void validate() const;
  bool operator==(const SamplingConfig&) const = default;
};

struct RaySamples {
  std::vector<double> depths;
  std::vector<double> deltas;
  std::vector<double> densities;
  std::vector<Vec3> colors;
  std::vector<double> transmittance;  ///< T_1..T_N
  std::vector<double> weights;
  double final_transmittance = 1.0;   ///< T_{N+1}
  Vec3 background = Vec3::Zero();
};

struct RenderResult {
  Vec3 color = Vec3::Zero();
  RaySamples samples;
};

struct RayGradient {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::Zero();
  Vec6 pose = Vec6::Zero();  ///< left perturbation of the camera pose, (omega, v)
};

/// Bin midpoints, or one uniform draw per bin when stratified. `stream`
/// selects an independent random stream under cfg.rng_seed.
std::vector<double> sample_depths(const SamplingConfig& cfg, std::uint64_t stream = 0);

/// Composites precomputed samples (used by render_ray and by tests that feed
/// densities and colors directly).
RenderResult composite(std::vector<double> depths, std::vector<double> densities,
                       std::vector<Vec3> colors, const Vec3& background);

RenderResult render_ray(const RadianceField& field, const Ray& ray, const SamplingConfig& cfg,
                        std::uint64_t stream = 0);

/// Backpropagates d(loss)/d(color) through a forward result of render_ray with
/// the depths held fixed. Field gradients are added into `param_grad`.
RayGradient render_ray_backward(const TrainableField& field, const Ray& ray,
                                const RenderResult& forward, const Vec3& grad_color,
                                std::span<double> param_grad);

Image render_gs_image(const RadianceField& field, const Pose& pose, const Intrinsics& intr,
                      const SamplingConfig& cfg, int threads = 1);

/// Row r uses traj.query_pose(row_time(frame, r)). Throws TimeOutOfRange.
Image render_rs_image(const RadianceField& field, const Trajectory& traj, const RsCamera& camera,
                      std::size_t frame, const SamplingConfig& cfg, int threads = 1);

/// Per-row poses version used by data generation with analytic trajectories.
Image render_rows(const RadianceField& field, std::span<const Pose> row_poses,
                  const Intrinsics& intr, const SamplingConfig& cfg, int threads = 1);

}  // namespace rsrf
