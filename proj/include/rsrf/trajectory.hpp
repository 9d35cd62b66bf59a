#pragma once

// Continuous-time camera trajectories built from SE(3) control knots.
//
// The cumulative cubic B-spline evaluates
//
//   T(u) = T_k * exp(B1(u) * W_k) * exp(B2(u) * W_{k+1}) * exp(B3(u) * W_{k+2}),
//   W_j  = log(T_j^-1 * T_{j+1}),
//
// with (B0..B3) = C * (1, u, u^2, u^3). The linear model is the same product
// truncated to one relative twist with weight u. The "nodep" kinds hold an
// independent knot group per frame, so neighbouring frames share nothing.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rsrf/lie.hpp"

namespace rsrf {

enum class TrajectoryKind { CubicDep, LinearDep, CubicNodep, LinearNodep };

std::string_view to_string(TrajectoryKind kind);
/// Accepts "cubic_dep", "linear_dep", "cubic_nodep", "linear_nodep".
TrajectoryKind trajectory_kind_from_string(std::string_view name);

/// Knots that influence one query: 4 for cubic kinds, 2 for linear kinds.
inline std::size_t knots_per_segment(TrajectoryKind kind) {
  return (kind == TrajectoryKind::CubicDep || kind == TrajectoryKind::CubicNodep) ? 4 : 2;
}
inline bool is_nodep(TrajectoryKind kind) {
  return kind == TrajectoryKind::CubicNodep || kind == TrajectoryKind::LinearNodep;
}

struct SegmentLocation {
  std::size_t k = 0;
  double u = 0.0;
};

/// Locates t on a uniform knot grid. `support` is the number of knots one
/// segment depends on (4 cubic, 2 linear). u == 1 is only produced at the
/// right end of the final segment. Throws TimeOutOfRange outside the window.
SegmentLocation segment_index(double t, double t0, double dt, std::size_t n_knots,
                              std::size_t support = 4);

/// Returns C * (1, u, u^2, u^3).
std::array<double, 4> cumulative_basis(double u);

/// Appends `count` knots continuing the last relative motion:
/// T_{n+i} = T_n * (T_{n-1}^-1 T_n)^i.
std::vector<Pose> pad_virtual_knots(std::span<const Pose> knots, std::size_t count = 3);

struct KnotSensitivity {
  std::size_t knot = 0;
  /// d(left perturbation of the output) / d(left perturbation of the knot).
  Mat6 jacobian = Mat6::Zero();
};

struct PoseJacobians {
  Pose pose;
  std::array<KnotSensitivity, 4> terms{};
  std::size_t count = 0;

  std::span<const KnotSensitivity> sensitivities() const { return {terms.data(), count}; }
};

class Trajectory {
 public:
  /// Knots at t0 + i*dt. Requires >= 4 knots.
  static Trajectory cubic_dep(std::vector<Pose> knots, double t0, double dt);
  /// Knots at t0 + i*dt. Requires >= 2 knots.
  static Trajectory linear_dep(std::vector<Pose> knots, double t0, double dt);
  /// One knot group per frame (4 cubic, 2 linear); frame m is valid on
  /// [frame_starts[m], frame_starts[m] + frame_span].
  static Trajectory nodep(TrajectoryKind kind, std::vector<Pose> knots,
                          std::vector<double> frame_starts, double frame_span);

  TrajectoryKind kind() const { return kind_; }
  std::span<const Pose> knots() const { return knots_; }
  std::size_t num_knots() const { return knots_.size(); }
  void set_knot(std::size_t i, const Pose& p);
  /// Applies knot_i <- exp(delta_i) * knot_i for every knot; deltas.size() == 6 * num_knots().
  void retract(std::span<const double> deltas);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  const std::vector<double>& frame_starts() const { return frame_starts_; }
  double frame_span() const { return frame_span_; }

  /// Inclusive [begin, end] of times the model can evaluate.
  std::pair<double, double> valid_window() const;
  bool supports(double t) const;

  Pose query_pose(double t) const;
  PoseJacobians query_pose_with_jacobians(double t) const;

 private:
  struct Local {
    std::size_t first_knot;
    double u;
  };
  Local locate(double t) const;

  TrajectoryKind kind_ = TrajectoryKind::CubicDep;
  std::vector<Pose> knots_;
  double t0_ = 0.0;
  double dt_ = 1.0;
  std::vector<double> frame_starts_;
  double frame_span_ = 0.0;
};

/// Evaluates K0 * prod_j exp(w_j * log(K_j^-1 K_{j+1})) with weights.size() ==
/// knots.size() - 1, optionally filling per-knot left-perturbation Jacobians.
Pose evaluate_cumulative(std::span<const Pose> knots, std::span<const double> weights,
                         std::span<Mat6> jacobians = {});

struct StampedPose {
  double timestamp = 0.0;
  Pose pose;
};

/// TUM text format: `timestamp tx ty tz qx qy qz qw`, 9 significant digits.
void write_tum(const std::filesystem::path& path, std::span<const StampedPose> poses);
std::vector<StampedPose> read_tum(const std::filesystem::path& path);
std::string format_tum_line(const StampedPose& p);

/// Full-precision JSON round trip of the model (kind, timing, knots).
std::string trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(std::string_view text);

/// Where each knot of a model lives in time. For the cumulative cubic spline
/// a constant-twist motion sampled at knot times tau_i is reproduced exactly
/// when tau_i = t0 + (i - 1) * dt, so the frame-m first-row knot has index
/// m + 1, one virtual knot precedes the first frame and two follow the last.
/// Linear models interpolate their knots, so tau_i = t0 + i * dt. Nodep kinds
/// place their group over the frame readout window the same way.
struct TrajectoryLayout {
  TrajectoryKind kind = TrajectoryKind::CubicDep;
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> frame_starts;
  double frame_span = 0.0;
  std::vector<double> knot_times;
};

/// `frame_span` is the readout duration H * line_readout. Dep kinds require
/// evenly spaced frame starts (ConfigError otherwise).
TrajectoryLayout make_layout(TrajectoryKind kind, std::span<const double> frame_starts,
                             double frame_span);

Trajectory build_trajectory(const TrajectoryLayout& layout, std::vector<Pose> knots);

/// Samples a pose function at the layout's knot times.
template <typename PoseFn>
Trajectory fit_trajectory(const TrajectoryLayout& layout, PoseFn&& pose_at) {
  std::vector<Pose> knots;
  knots.reserve(layout.knot_times.size());
  for (const double t : layout.knot_times) knots.push_back(pose_at(t));
  return build_trajectory(layout, std::move(knots));
}

/// Builds a dep model from per-frame first-row poses, extrapolating the
/// virtual knots at constant velocity (pad_virtual_knots).
Trajectory trajectory_from_frame_poses(TrajectoryKind kind, std::span<const Pose> frame_poses,
                                       std::span<const double> frame_starts);

}  // namespace rsrf
