#pragma once

// Radiance field query contract: (position, view direction) -> (color, density).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include "rsrf/lie.hpp"

namespace rsrf {

struct FieldSample {
  Vec3 color = Vec3::Zero();  ///< RGB in [0, 1]
  double density = 0.0;       ///< >= 0, per world unit
};

struct SpatialGrad {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::Zero();
};

/// Axis-aligned box; fields are empty (black, zero density) outside it.
struct Aabb {
  Vec3 min = Vec3::Constant(-1.0);
  Vec3 max = Vec3::Constant(1.0);

  bool contains(const Vec3& x) const {
    return (x.array() >= min.array()).all() && (x.array() <= max.array()).all();
  }
  Vec3 extent() const { return max - min; }
  bool operator==(const Aabb&) const = default;
};

class RadianceField {
 public:
  virtual ~RadianceField() = default;
  virtual FieldSample query(const Vec3& x, const Vec3& d) const = 0;
};

/// A field with a flat parameter vector and analytic gradients.
class TrainableField : public RadianceField {
 public:
  virtual std::string backend() const = 0;
  virtual std::span<double> params() = 0;
  virtual std::span<const double> params() const = 0;
  std::size_t num_params() const { return params().size(); }

  /// Evaluates the field and adds d(loss)/d(params) into `param_grad`
  /// (size num_params()), given upstream gradients on the outputs. Returns
  /// the gradients with respect to x and d. Pass an empty span to skip the
  /// parameter accumulation.
  virtual SpatialGrad query_with_grads(const Vec3& x, const Vec3& d, const Vec3& grad_color,
                                       double grad_density, std::span<double> param_grad) const = 0;

  /// Coarse-to-fine frequency progress; backends without an encoding ignore it.
  virtual void set_encoding_progress(double /*alpha*/) {}
  virtual double encoding_progress() const { return 0.0; }
  /// Maximum meaningful progress (the positional-encoding order), 0 if none.
  virtual double max_encoding_progress() const { return 0.0; }

  virtual std::unique_ptr<TrainableField> clone() const = 0;
};

/// Checkpoint: one JSON header line, a newline, then num_params raw
/// little-endian float64 values. Round-trips bit-exactly.
void save_field(const std::filesystem::path& path, const TrainableField& field);
std::unique_ptr<TrainableField> load_field(const std::filesystem::path& path);

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}
/// Inverse of softplus for y > 0.
inline double softplus_inverse(double y) {
  return y > 30.0 ? y : std::log(std::expm1(y));
}
inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace rsrf
