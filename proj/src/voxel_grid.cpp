#include "rsrf/voxel_grid.hpp"

#include <cmath>

#include "rsrf/error.hpp"

namespace rsrf {

VoxelGrid::VoxelGrid(const VoxelGridConfig& cfg) : cfg_(cfg) {
  for (int a = 0; a < 3; ++a) {
    if (cfg.resolution[a] < 2) throw ConfigError("voxel grid resolution must be >= 2 per axis");
    if (!(cfg.bounds.max[a] > cfg.bounds.min[a])) throw ConfigError("voxel grid bounds are degenerate");
  }
  if (!(cfg.init_color > 0.0 && cfg.init_color < 1.0) || !(cfg.init_density > 0.0)) {
    throw ConfigError("voxel grid init color must be in (0,1) and init density > 0");
  }
  for (int a = 0; a < 3; ++a) scale_[a] = (cfg.resolution[a] - 1) / (cfg.bounds.max[a] - cfg.bounds.min[a]);
  const std::size_t n =
      static_cast<std::size_t>(cfg.resolution[0]) * cfg.resolution[1] * cfg.resolution[2];
  params_.resize(n * kChannels);
  const double c = logit(cfg.init_color);
  const double s = softplus_inverse(cfg.init_density);
  for (std::size_t v = 0; v < n; ++v) {
    params_[v * kChannels + 0] = c;
    params_[v * kChannels + 1] = c;
    params_[v * kChannels + 2] = c;
    params_[v * kChannels + 3] = s;
  }
}

Vec3 VoxelGrid::vertex_position(int i, int j, int k) const {
  return cfg_.bounds.min + Vec3(i / scale_[0], j / scale_[1], k / scale_[2]);
}

void VoxelGrid::set_vertex(int i, int j, int k, const Vec3& color, double density) {
  double* p = params_.data() + vertex_index(i, j, k) * kChannels;
  for (int c = 0; c < 3; ++c) p[c] = logit(std::clamp(color[c], 1e-6, 1.0 - 1e-6));
  p[3] = softplus_inverse(std::max(density, 1e-12));
}

bool VoxelGrid::corners(const Vec3& x, Corners& out) const {
  if (!cfg_.bounds.contains(x)) return false;
  std::array<int, 3> base{};
  std::array<double, 3> f{};
  for (int a = 0; a < 3; ++a) {
    const double g = (x[a] - cfg_.bounds.min[a]) * scale_[a];
    const int i = std::min(static_cast<int>(std::floor(g)), cfg_.resolution[a] - 2);
    base[a] = std::max(i, 0);
    f[a] = g - base[a];
  }
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const double wx = dx ? f[0] : 1.0 - f[0];
    const double wy = dy ? f[1] : 1.0 - f[1];
    const double wz = dz ? f[2] : 1.0 - f[2];
    out.index[c] = vertex_index(base[0] + dx, base[1] + dy, base[2] + dz);
    out.weight[c] = wx * wy * wz;
    const double sx = dx ? scale_[0] : -scale_[0];
    const double sy = dy ? scale_[1] : -scale_[1];
    const double sz = dz ? scale_[2] : -scale_[2];
    out.weight_grad[c] = Vec3(sx * wy * wz, wx * sy * wz, wx * wy * sz);
  }
  return true;
}

FieldSample VoxelGrid::query(const Vec3& x, const Vec3& /*d*/) const {
  Corners cn;
  if (!corners(x, cn)) return {};
  double raw[kChannels] = {0.0, 0.0, 0.0, 0.0};
  for (int c = 0; c < 8; ++c) {
    const double* p = params_.data() + cn.index[c] * kChannels;
    const double w = cn.weight[c];
    for (int ch = 0; ch < kChannels; ++ch) raw[ch] += w * p[ch];
  }
  return {Vec3(sigmoid(raw[0]), sigmoid(raw[1]), sigmoid(raw[2])), softplus(raw[3])};
}

SpatialGrad VoxelGrid::query_with_grads(const Vec3& x, const Vec3& /*d*/, const Vec3& grad_color,
                                        double grad_density, std::span<double> param_grad) const {
  Corners cn;
  if (!corners(x, cn)) return {};
  double raw[kChannels] = {0.0, 0.0, 0.0, 0.0};
  for (int c = 0; c < 8; ++c) {
    const double* p = params_.data() + cn.index[c] * kChannels;
    for (int ch = 0; ch < kChannels; ++ch) raw[ch] += cn.weight[c] * p[ch];
  }
  double g_raw[kChannels];
  for (int ch = 0; ch < 3; ++ch) {
    const double s = sigmoid(raw[ch]);
    g_raw[ch] = grad_color[ch] * s * (1.0 - s);
  }
  g_raw[3] = grad_density * sigmoid(raw[3]);

  SpatialGrad out;
  for (int c = 0; c < 8; ++c) {
    const double* p = params_.data() + cn.index[c] * kChannels;
    double dot = 0.0;
    for (int ch = 0; ch < kChannels; ++ch) dot += g_raw[ch] * p[ch];
    out.position += dot * cn.weight_grad[c];
    if (!param_grad.empty()) {
      double* g = param_grad.data() + cn.index[c] * kChannels;
      for (int ch = 0; ch < kChannels; ++ch) g[ch] += cn.weight[c] * g_raw[ch];
    }
  }
  return out;
}

std::unique_ptr<TrainableField> VoxelGrid::clone() const { return std::make_unique<VoxelGrid>(*this); }

}  // namespace rsrf
