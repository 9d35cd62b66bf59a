#pragma once

// Joint photometric optimization of a radiance field and a camera trajectory
// from rolling-shutter images.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rsrf/dataset.hpp"
#include "rsrf/field.hpp"
#include "rsrf/optim.hpp"
#include "rsrf/renderer.hpp"
#include "rsrf/trajectory.hpp"

namespace rsrf {

struct TrainConfig {
  std::size_t steps = 20000;
  std::size_t pixels_per_step = 1024;
  double lr_field_init = 5e-4;
  double lr_field_final = 5e-5;
  double lr_pose_init = 1e-3;
  double lr_pose_final = 1e-5;
  AdamConfig adam;
  /// Coarse-to-fine window over steps; ignored by fields without an encoding.
  bool c2f = true;
  std::size_t c2f_start = 2000;
  std::size_t c2f_end = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
  /// When false every row is rendered at its frame-start time (a global
  /// shutter model, the baseline that ignores rolling shutter).
  bool rolling_shutter = true;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct PhotometricLoss {
  double loss = 0.0;
  std::vector<Vec3> grad;  ///< d(loss)/d(rendered pixel)
};

/// Mean squared error over all channels of the batch.
PhotometricLoss photometric_loss(std::span<const Vec3> rendered, std::span<const Vec3> observed);

struct TrainLogEntry {
  std::size_t step = 0;
  double loss = 0.0;
  double lr_field = 0.0;
  double lr_pose = 0.0;
  double alpha = 0.0;
};

struct TrainResult {
  std::vector<double> loss_history;
};

using TrainCallback = std::function<void(const TrainLogEntry&)>;

/// Runs cfg.steps optimization steps in place on `field` and `traj`.
/// Throws NonFiniteLoss when the loss or a gradient stops being finite.
TrainResult train(const Dataset& dataset, TrainableField& field, Trajectory& traj,
                  const TrainConfig& cfg, const SamplingConfig& sampling,
                  const TrainCallback& on_step = {});

/// The capture time assigned to a row under the given shutter model.
double training_row_time(const RsCamera& camera, std::size_t frame, std::size_t row,
                         bool rolling_shutter);

}  // namespace rsrf
