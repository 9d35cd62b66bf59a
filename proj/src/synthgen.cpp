#include "rsrf/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rsrf/error.hpp"

namespace rsrf {
namespace {

Image store_as(const Image& img, ImageFormat format) {
  return format == ImageFormat::Png ? quantize8(img) : round_to_float(img);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

Image round_to_float(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = static_cast<double>(static_cast<float>(v));
  return out;
}

Dataset generate_dataset(const RadianceField& scene, const Motion& motion, const RsCamera& camera,
                         const SamplingConfig& sampling, ImageFormat format, int threads,
                         nlohmann::json info) {
  camera.validate();
  sampling.validate();
  Dataset ds;
  ds.camera = camera;
  ds.format = format;
  ds.info = std::move(info);
  const int h = camera.intrinsics.height;
  std::vector<Pose> rows(static_cast<std::size_t>(h));
  for (std::size_t f = 0; f < camera.num_frames(); ++f) {
    for (int r = 0; r < h; ++r) {
      const double t = camera.row_time(f, static_cast<std::size_t>(r));
      rows[static_cast<std::size_t>(r)] = motion.pose(t);
      ds.gt_rows.push_back({t, rows[static_cast<std::size_t>(r)]});
    }
    ds.gt_frames.push_back({camera.timing.frame_starts[f], rows[0]});
    ds.rs_images.push_back(store_as(render_rows(scene, rows, camera.intrinsics, sampling, threads), format));
    ds.gs_images.push_back(
        store_as(render_gs_image(scene, rows[0], camera.intrinsics, sampling, threads), format));
  }
  return ds;
}

std::vector<Pose> perturb_trajectory(std::span<const Pose> knots, double rot_noise_deg,
                                     double trans_noise_frac, double scene_extent,
                                     std::uint64_t seed) {
  if (rot_noise_deg < 0.0 || trans_noise_frac < 0.0 || scene_extent < 0.0) {
    throw ConfigError("perturb_trajectory: noise levels must be >= 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double max_rot = rot_noise_deg * std::numbers::pi / 180.0;
  const double max_trans = trans_noise_frac * scene_extent;
  std::vector<Pose> out;
  out.reserve(knots.size());
  for (const Pose& k : knots) {
    const Vec3 w = random_unit(rng) * (max_rot * unit(rng));
    const Vec3 v = random_unit(rng) * (max_trans * unit(rng));
    out.push_back(exp_se3(make_twist(w, v)) * k);
  }
  return out;
}

void fit_grid_to_scene(VoxelGrid& grid, const RadianceField& scene) {
  const auto& res = grid.config().resolution;
  for (int k = 0; k < res[2]; ++k) {
    for (int j = 0; j < res[1]; ++j) {
      for (int i = 0; i < res[0]; ++i) {
        const FieldSample s = scene.query(grid.vertex_position(i, j, k), Vec3::UnitZ());
        const Vec3 c = s.color.cwiseMax(1e-4).cwiseMin(1.0 - 1e-4);
        grid.set_vertex(i, j, k, c, std::max(s.density, 1e-6));
      }
    }
  }
}

}  // namespace rsrf
