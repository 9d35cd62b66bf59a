#include "rsrf/camera.hpp"

#include <cmath>
#include <string>

#include "rsrf/error.hpp"

namespace rsrf {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("intrinsics: fx and fy must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("intrinsics: width and height must be positive");
}

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void RsTiming::validate(int height) const {
  if (!(line_readout >= 0.0)) throw ConfigError("timing.line_readout must be >= 0");
  if (frame_starts.empty()) throw ConfigError("timing.frame_starts must not be empty");
  const double readout = height * line_readout;
  for (std::size_t i = 1; i < frame_starts.size(); ++i) {
    const double gap = frame_starts[i] - frame_starts[i - 1];
    if (!(gap > 0.0)) throw ConfigError("timing.frame_starts must be strictly increasing");
    if (readout > gap * (1.0 + 1e-12)) {
      throw ConfigError("timing: readout of " + std::to_string(height) + " rows (" +
                        std::to_string(readout) + " s) exceeds frame interval " +
                        std::to_string(gap) + " s at frame " + std::to_string(i));
    }
  }
}

double RsTiming::frame_interval() const {
  if (frame_starts.size() < 2) return 0.0;
  return (frame_starts.back() - frame_starts.front()) /
         static_cast<double>(frame_starts.size() - 1);
}

bool RsTiming::uniform() const {
  const double mean = frame_interval();
  for (std::size_t i = 1; i < frame_starts.size(); ++i) {
    if (std::abs(frame_starts[i] - frame_starts[i - 1] - mean) > 1e-6 * mean) return false;
  }
  return true;
}

Vec3 camera_direction(const Intrinsics& intr, double x, double y) {
  return {(x + 0.5 - intr.cx) / intr.fx, (y + 0.5 - intr.cy) / intr.fy, 1.0};
}

Ray pixel_ray(const Intrinsics& intr, const Pose& pose, double x, double y) {
  Ray ray;
  ray.origin = pose.translation();
  ray.direction = (pose.rotation() * camera_direction(intr, x, y)).normalized();
  ray.px = x;
  ray.py = y;
  return ray;
}

double row_time(const RsTiming& timing, std::size_t frame, std::size_t row) {
  if (frame >= timing.frame_starts.size()) {
    throw IndexOutOfRange("frame " + std::to_string(frame) + " out of range (" +
                          std::to_string(timing.frame_starts.size()) + " frames)");
  }
  return timing.frame_starts[frame] + static_cast<double>(row) * timing.line_readout;
}

double RsCamera::row_time(std::size_t frame, std::size_t row) const {
  if (row >= static_cast<std::size_t>(intrinsics.height)) {
    throw IndexOutOfRange("row " + std::to_string(row) + " out of range (height " +
                          std::to_string(intrinsics.height) + ")");
  }
  return rsrf::row_time(timing, frame, row);
}

Vec6 ray_pose_gradient(const Ray& ray, const Vec3& grad_origin, const Vec3& grad_direction) {
  Vec6 g;
  g.head<3>() = ray.origin.cross(grad_origin) + ray.direction.cross(grad_direction);
  g.tail<3>() = grad_origin;
  return g;
}

}  // namespace rsrf
