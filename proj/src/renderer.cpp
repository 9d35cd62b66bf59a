#include "rsrf/renderer.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rsrf/error.hpp"
#include "rsrf/parallel.hpp"

namespace rsrf {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

void SamplingConfig::validate() const {
  if (!(near > 0.0) || !(far > near)) throw ConfigError("sampling: need 0 < near < far");
  if (n_samples < 2) throw ConfigError("sampling: n_samples must be >= 2");
}

std::vector<double> sample_depths(const SamplingConfig& cfg, std::uint64_t stream) {
  const int n = cfg.n_samples;
  const double bin = (cfg.far - cfg.near) / n;
  std::vector<double> depths(n);
  if (!cfg.stratified) {
    for (int i = 0; i < n; ++i) depths[i] = cfg.near + (i + 0.5) * bin;
    return depths;
  }
  std::mt19937_64 rng(splitmix64(cfg.rng_seed ^ splitmix64(stream)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) depths[i] = cfg.near + (i + unit(rng)) * bin;
  return depths;
}

RenderResult composite(std::vector<double> depths, std::vector<double> densities,
                       std::vector<Vec3> colors, const Vec3& background) {
  const std::size_t n = depths.size();
  RenderResult r;
  RaySamples& s = r.samples;
  s.deltas.resize(n);
  s.transmittance.resize(n);
  s.weights.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) s.deltas[i] = depths[i + 1] - depths[i];
  if (n > 0) s.deltas[n - 1] = kFarDelta;
  double t = 1.0;
  double optical_depth = 0.0;
  Vec3 color = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    s.transmittance[i] = t;
    optical_depth += densities[i] * s.deltas[i];
    const double t_next = std::exp(-optical_depth);
    s.weights[i] = t - t_next;
    color += s.weights[i] * colors[i];
    t = t_next;
  }
  s.final_transmittance = t;
  s.background = background;
  r.color = color + t * background;
  s.depths = std::move(depths);
  s.densities = std::move(densities);
  s.colors = std::move(colors);
  return r;
}

RenderResult render_ray(const RadianceField& field, const Ray& ray, const SamplingConfig& cfg,
                        std::uint64_t stream) {
  std::vector<double> depths = sample_depths(cfg, stream);
  std::vector<double> densities(depths.size());
  std::vector<Vec3> colors(depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const FieldSample fs = field.query(ray.origin + depths[i] * ray.direction, ray.direction);
    densities[i] = fs.density;
    colors[i] = fs.color;
  }
  return composite(std::move(depths), std::move(densities), std::move(colors), cfg.background);
}

RayGradient render_ray_backward(const TrainableField& field, const Ray& ray,
                                const RenderResult& forward, const Vec3& grad_color,
                                std::span<double> param_grad) {
  const RaySamples& s = forward.samples;
  const std::size_t n = s.depths.size();
  RayGradient out;
  if (grad_color.isZero(0.0)) return out;
  // suffix = sum_{j > i} w_j c_j + T_{N+1} bg, walked from the back.
  Vec3 suffix = s.final_transmittance * s.background;
  for (std::size_t i = n; i-- > 0;) {
    const double t_next = i + 1 < n ? s.transmittance[i + 1] : s.final_transmittance;
    const Vec3 dc_dsigma = s.deltas[i] * (t_next * s.colors[i] - suffix);
    const double g_sigma = grad_color.dot(dc_dsigma);
    const Vec3 g_color = s.weights[i] * grad_color;
    suffix += s.weights[i] * s.colors[i];
    if (g_sigma == 0.0 && g_color.isZero(0.0)) continue;
    const double depth = s.depths[i];
    const SpatialGrad sg = field.query_with_grads(ray.origin + depth * ray.direction, ray.direction,
                                                  g_color, g_sigma, param_grad);
    out.origin += sg.position;
    out.direction += depth * sg.position + sg.direction;
  }
  out.pose = ray_pose_gradient(ray, out.origin, out.direction);
  return out;
}

Image render_rows(const RadianceField& field, std::span<const Pose> row_poses,
                  const Intrinsics& intr, const SamplingConfig& cfg, int threads) {
  intr.validate();
  cfg.validate();
  if (row_poses.size() != static_cast<std::size_t>(intr.height)) {
    throw DimensionMismatch("render_rows: need one pose per row (" + std::to_string(intr.height) +
                            "), got " + std::to_string(row_poses.size()));
  }
  Image img(intr.width, intr.height);
  parallel_chunks(static_cast<std::size_t>(intr.height), threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t y = begin; y < end; ++y) {
                      for (int x = 0; x < intr.width; ++x) {
                        const Ray ray = pixel_ray(intr, row_poses[y], x, static_cast<double>(y));
                        const std::uint64_t stream = y * intr.width + x;
                        img.set(x, static_cast<int>(y), render_ray(field, ray, cfg, stream).color);
                      }
                    }
                  });
  return img;
}

Image render_gs_image(const RadianceField& field, const Pose& pose, const Intrinsics& intr,
                      const SamplingConfig& cfg, int threads) {
  const std::vector<Pose> rows(static_cast<std::size_t>(std::max(intr.height, 0)), pose);
  return render_rows(field, rows, intr, cfg, threads);
}

Image render_rs_image(const RadianceField& field, const Trajectory& traj, const RsCamera& camera,
                      std::size_t frame, const SamplingConfig& cfg, int threads) {
  const int h = camera.intrinsics.height;
  std::vector<Pose> rows;
  rows.reserve(static_cast<std::size_t>(h));
  for (int r = 0; r < h; ++r) rows.push_back(traj.query_pose(camera.row_time(frame, r)));
  return render_rows(field, rows, camera.intrinsics, cfg, threads);
}

}  // namespace rsrf
