#pragma once

// Small fully connected radiance field:
//   gamma(x) -> 4 hidden ReLU layers (gamma(x) re-injected before the third)
//   -> softplus density, and [features, gamma(d)] -> ReLU -> sigmoid color.
// Positions are mapped from `bounds` to [-1, 1]^3 before encoding, and the
// position bands follow the coarse-to-fine window set by set_encoding_progress.

#include <cstdint>
#include <vector>

#include "rsrf/field.hpp"

namespace rsrf {

struct MlpConfig {
  int hidden = 64;
  int color_hidden = 32;
  int pos_order = 10;
  int dir_order = 4;
  Aabb bounds;
  std::uint64_t seed = 0;
  double init_density = 0.1;
  bool operator==(const MlpConfig&) const = default;
};

class MlpField final : public TrainableField {
 public:
  explicit MlpField(const MlpConfig& cfg);

  std::string backend() const override { return "mlp"; }
  std::span<double> params() override { return params_; }
  std::span<const double> params() const override { return params_; }

  FieldSample query(const Vec3& x, const Vec3& d) const override;
  SpatialGrad query_with_grads(const Vec3& x, const Vec3& d, const Vec3& grad_color,
                               double grad_density, std::span<double> param_grad) const override;
  std::unique_ptr<TrainableField> clone() const override;

  void set_encoding_progress(double alpha) override;
  double encoding_progress() const override { return alpha_; }
  double max_encoding_progress() const override { return cfg_.pos_order; }

  const MlpConfig& config() const { return cfg_; }
  /// Re-draws the weights from cfg.seed (He-uniform, zero biases).
  void initialize();

  struct Layer {
    std::size_t weight = 0;  // offset of the rows x cols column-major matrix
    std::size_t bias = 0;
    int rows = 0;
    int cols = 0;
  };

 private:
  template <bool kBackward>
  FieldSample run(const Vec3& x, const Vec3& d, const Vec3* grad_color, double grad_density,
                  std::span<double> param_grad, SpatialGrad* spatial) const;

  MlpConfig cfg_;
  double alpha_;
  int pos_dim_;
  int dir_dim_;
  Layer l1_, l2_, l3_, l4_, density_, color1_, color2_;
  std::vector<double> params_;
};

}  // namespace rsrf
