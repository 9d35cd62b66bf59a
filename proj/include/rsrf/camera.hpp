#pragma once

// Pinhole rolling-shutter camera: intrinsics, per-pixel rays and row timing.
// Rows are read out top to bottom; row r of frame m is captured instantly at
// frame_starts[m] + r * line_readout.

#include <cstddef>
#include <vector>

#include "rsrf/lie.hpp"

namespace rsrf {

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws ConfigError on non-positive focal lengths or image size.
  void validate() const;
  Mat3 matrix() const;
  bool operator==(const Intrinsics&) const = default;
};

struct RsTiming {
  double line_readout = 0.0;  ///< seconds per row
  std::vector<double> frame_starts;

  /// Checks monotone frame starts and that a full readout of `height` rows
  /// fits inside every frame interval.
  void validate(int height) const;
  /// Mean spacing between frame starts (0 for a single frame).
  double frame_interval() const;
  /// True when consecutive frame starts are evenly spaced within rel. 1e-6.
  bool uniform() const;
  bool operator==(const RsTiming&) const = default;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  double px = 0.0;
  double py = 0.0;
};

/// Unnormalized camera-frame direction K^-1 (x + 0.5, y + 0.5, 1).
Vec3 camera_direction(const Intrinsics& intr, double x, double y);

/// Ray through the centre of pixel (x = column, y = row).
Ray pixel_ray(const Intrinsics& intr, const Pose& pose, double x, double y);

/// Capture time of a row. Throws IndexOutOfRange for a bad frame index.
double row_time(const RsTiming& timing, std::size_t frame, std::size_t row);

struct RsCamera {
  Intrinsics intrinsics;
  RsTiming timing;

  void validate() const {
    intrinsics.validate();
    timing.validate(intrinsics.height);
  }
  std::size_t num_frames() const { return timing.frame_starts.size(); }
  /// Also range-checks the row against the image height.
  double row_time(std::size_t frame, std::size_t row) const;
  /// Duration of one full readout, H * line_readout.
  double readout_span() const { return intrinsics.height * timing.line_readout; }
};

/// Chains ray-space gradients into a left-perturbation gradient of the camera
/// pose, ordered (omega, v). Holds for any pose since x' = exp(d) x.
Vec6 ray_pose_gradient(const Ray& ray, const Vec3& grad_origin, const Vec3& grad_direction);

}  // namespace rsrf
