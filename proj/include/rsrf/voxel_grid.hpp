#pragma once

// Dense trilinear voxel grid. Values live on grid vertices; each vertex holds
// three color logits and one density pre-activation. Interpolation happens on
// the raw values, then color goes through a sigmoid and density through softplus.

#include <array>
#include <cstdint>
#include <vector>

#include "rsrf/field.hpp"

namespace rsrf {

struct VoxelGridConfig {
  std::array<int, 3> resolution{32, 32, 32};
  Aabb bounds;
  double init_density = 0.1;             ///< density after activation at init
  double init_color = 0.5;               ///< per-channel color at init
  bool operator==(const VoxelGridConfig&) const = default;
};

class VoxelGrid final : public TrainableField {
 public:
  static constexpr int kChannels = 4;

  explicit VoxelGrid(const VoxelGridConfig& cfg);

  std::string backend() const override { return "voxel"; }
  std::span<double> params() override { return params_; }
  std::span<const double> params() const override { return params_; }

  FieldSample query(const Vec3& x, const Vec3& d) const override;
  SpatialGrad query_with_grads(const Vec3& x, const Vec3& d, const Vec3& grad_color,
                               double grad_density, std::span<double> param_grad) const override;
  std::unique_ptr<TrainableField> clone() const override;

  const VoxelGridConfig& config() const { return cfg_; }
  std::size_t vertex_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * cfg_.resolution[1] + j) * cfg_.resolution[0] + i;
  }
  /// World position of a grid vertex.
  Vec3 vertex_position(int i, int j, int k) const;
  /// Sets the raw parameters of one vertex from activated values.
  void set_vertex(int i, int j, int k, const Vec3& color, double density);

  struct Corners {
    std::array<std::size_t, 8> index{};
    std::array<double, 8> weight{};
    std::array<Vec3, 8> weight_grad{};  ///< d(weight)/d(world position)
  };
  /// Trilinear corners of x; false when x lies outside the bounds.
  bool corners(const Vec3& x, Corners& out) const;

 private:
  VoxelGridConfig cfg_;
  Vec3 scale_;  // grid units per world unit
  std::vector<double> params_;
};

}  // namespace rsrf
