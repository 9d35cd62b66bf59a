#include "rsrf/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsrf/error.hpp"

namespace rsrf {
namespace {

// Times within this many knot intervals of a grid point snap onto it, so frame
// start times computed as t0 + m*dt land on u == 0 instead of u ~= 1 - eps.
constexpr double kGridSnap = 1e-9;

std::string window_message(double t, double begin, double end) {
  std::ostringstream os;
  os.precision(12);
  os << "time " << t << " outside trajectory window [" << begin << ", " << end << "]";
  return os.str();
}

}  // namespace

std::string_view to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::CubicDep: return "cubic_dep";
    case TrajectoryKind::LinearDep: return "linear_dep";
    case TrajectoryKind::CubicNodep: return "cubic_nodep";
    case TrajectoryKind::LinearNodep: return "linear_nodep";
  }
  return "unknown";
}

TrajectoryKind trajectory_kind_from_string(std::string_view name) {
  if (name == "cubic_dep") return TrajectoryKind::CubicDep;
  if (name == "linear_dep") return TrajectoryKind::LinearDep;
  if (name == "cubic_nodep") return TrajectoryKind::CubicNodep;
  if (name == "linear_nodep") return TrajectoryKind::LinearNodep;
  throw ConfigError("unknown trajectory kind '" + std::string(name) + "'");
}

SegmentLocation segment_index(double t, double t0, double dt, std::size_t n_knots,
                              std::size_t support) {
  if (!(dt > 0.0)) throw ConfigError("segment_index: dt must be positive");
  if (n_knots < support) throw ConfigError("segment_index: not enough knots for one segment");
  const auto n_segments = static_cast<double>(n_knots - support + 1);
  double s = (t - t0) / dt;
  const double nearest = std::round(s);
  if (std::abs(s - nearest) < kGridSnap) s = nearest;
  if (!(s >= 0.0) || s > n_segments) {
    throw TimeOutOfRange(window_message(t, t0, t0 + n_segments * dt));
  }
  double k = std::floor(s);
  if (k == n_segments) k -= 1.0;  // right-endpoint closure
  return {static_cast<std::size_t>(k), s - k};
}

std::array<double, 4> cumulative_basis(double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return {1.0, (5.0 + 3.0 * u - 3.0 * u2 + u3) / 6.0, (1.0 + 3.0 * u + 3.0 * u2 - 2.0 * u3) / 6.0,
          u3 / 6.0};
}

std::vector<Pose> pad_virtual_knots(std::span<const Pose> knots, std::size_t count) {
  if (knots.size() < 2) throw ConfigError("pad_virtual_knots: need at least 2 knots");
  std::vector<Pose> out(knots.begin(), knots.end());
  const Pose step = knots[knots.size() - 2].inverse() * knots.back();
  for (std::size_t i = 0; i < count; ++i) out.push_back(out.back() * step);
  return out;
}

Pose evaluate_cumulative(std::span<const Pose> knots, std::span<const double> weights,
                         std::span<Mat6> jacobians) {
  const std::size_t n = weights.size();
  Pose pose = knots[0];
  const bool want_jac = !jacobians.empty();
  std::array<Mat6, 3> m{};
  for (std::size_t j = 0; j < n; ++j) {
    // Identical knots give an exactly zero twist, keeping static segments bit-stable.
    const bool same = knots[j].rotation() == knots[j + 1].rotation() &&
                      knots[j].translation() == knots[j + 1].translation();
    const Twist omega = same ? Twist::Zero() : log_se3(knots[j].inverse() * knots[j + 1]);
    const Twist scaled = weights[j] * omega;
    pose = pose * exp_se3(scaled);
    if (want_jac) {
      // Right perturbation of factor j seen as a left perturbation of the output,
      // chained through d(log)/d(right end) of the relative motion.
      m[j] = adjoint(pose) * (weights[j] * se3_right_jacobian(scaled)) *
             se3_right_jacobian_inverse(omega) * adjoint(knots[j + 1].inverse());
    }
  }
  if (want_jac) {
    jacobians[0] = Mat6::Identity() - m[0];
    for (std::size_t i = 1; i < n; ++i) jacobians[i] = m[i - 1] - m[i];
    jacobians[n] = m[n - 1];
  }
  return pose;
}

Trajectory Trajectory::cubic_dep(std::vector<Pose> knots, double t0, double dt) {
  if (knots.size() < 4) throw ConfigError("cubic trajectory needs at least 4 knots");
  if (!(dt > 0.0)) throw ConfigError("trajectory dt must be positive");
  Trajectory tr;
  tr.kind_ = TrajectoryKind::CubicDep;
  tr.knots_ = std::move(knots);
  tr.t0_ = t0;
  tr.dt_ = dt;
  return tr;
}

Trajectory Trajectory::linear_dep(std::vector<Pose> knots, double t0, double dt) {
  if (knots.size() < 2) throw ConfigError("linear trajectory needs at least 2 knots");
  if (!(dt > 0.0)) throw ConfigError("trajectory dt must be positive");
  Trajectory tr;
  tr.kind_ = TrajectoryKind::LinearDep;
  tr.knots_ = std::move(knots);
  tr.t0_ = t0;
  tr.dt_ = dt;
  return tr;
}

Trajectory Trajectory::nodep(TrajectoryKind kind, std::vector<Pose> knots,
                             std::vector<double> frame_starts, double frame_span) {
  if (!is_nodep(kind)) throw ConfigError("Trajectory::nodep called with a dep kind");
  const std::size_t group = knots_per_segment(kind);
  if (frame_starts.empty()) throw ConfigError("nodep trajectory needs at least one frame");
  if (knots.size() != group * frame_starts.size()) {
    throw ConfigError("nodep trajectory needs " + std::to_string(group) + " knots per frame");
  }
  if (frame_span < 0.0) throw ConfigError("frame span must be non-negative");
  for (std::size_t i = 1; i < frame_starts.size(); ++i) {
    if (!(frame_starts[i] >= frame_starts[i - 1] + frame_span)) {
      throw ConfigError("nodep frame windows must be increasing and non-overlapping");
    }
  }
  Trajectory tr;
  tr.kind_ = kind;
  tr.knots_ = std::move(knots);
  tr.frame_starts_ = std::move(frame_starts);
  tr.frame_span_ = frame_span;
  tr.t0_ = tr.frame_starts_.front();
  return tr;
}

void Trajectory::set_knot(std::size_t i, const Pose& p) {
  if (i >= knots_.size()) throw IndexOutOfRange("knot index out of range");
  knots_[i] = p;
}

void Trajectory::retract(std::span<const double> deltas) {
  if (deltas.size() != 6 * knots_.size()) throw ShapeMismatch("retract: wrong delta size");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const Twist d = Eigen::Map<const Twist>(deltas.data() + 6 * i);
    knots_[i] = exp_se3(d) * knots_[i];
  }
}

std::pair<double, double> Trajectory::valid_window() const {
  if (is_nodep(kind_)) return {frame_starts_.front(), frame_starts_.back() + frame_span_};
  const std::size_t support = knots_per_segment(kind_);
  return {t0_, t0_ + static_cast<double>(knots_.size() - support + 1) * dt_};
}

bool Trajectory::supports(double t) const {
  try {
    (void)locate(t);
    return true;
  } catch (const TimeOutOfRange&) {
    return false;
  }
}

Trajectory::Local Trajectory::locate(double t) const {
  if (!is_nodep(kind_)) {
    const auto loc = segment_index(t, t0_, dt_, knots_.size(), knots_per_segment(kind_));
    return {loc.k, loc.u};
  }
  // Latest frame whose start is <= t, with the same grid snapping as the dep kinds.
  const double tol = kGridSnap * std::max(frame_span_, 1e-3);
  std::size_t frame = frame_starts_.size();
  for (std::size_t m = frame_starts_.size(); m-- > 0;) {
    if (t >= frame_starts_[m] - tol) {
      frame = m;
      break;
    }
  }
  if (frame == frame_starts_.size() || t > frame_starts_[frame] + frame_span_ + tol) {
    const auto [b, e] = valid_window();
    throw TimeOutOfRange(window_message(t, b, e) + " (between nodep frame windows)");
  }
  double u = frame_span_ > 0.0 ? (t - frame_starts_[frame]) / frame_span_ : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return {frame * knots_per_segment(kind_), u};
}

Pose Trajectory::query_pose(double t) const {
  const Local loc = locate(t);
  const std::span<const Pose> group(knots_.data() + loc.first_knot, knots_per_segment(kind_));
  if (group.size() == 4) {
    const auto b = cumulative_basis(loc.u);
    const std::array<double, 3> w{b[1], b[2], b[3]};
    return evaluate_cumulative(group, w);
  }
  const std::array<double, 1> w{loc.u};
  return evaluate_cumulative(group, w);
}

PoseJacobians Trajectory::query_pose_with_jacobians(double t) const {
  const Local loc = locate(t);
  const std::size_t n = knots_per_segment(kind_);
  const std::span<const Pose> group(knots_.data() + loc.first_knot, n);
  std::array<Mat6, 4> jac;
  PoseJacobians out;
  if (n == 4) {
    const auto b = cumulative_basis(loc.u);
    const std::array<double, 3> w{b[1], b[2], b[3]};
    out.pose = evaluate_cumulative(group, w, std::span<Mat6>(jac.data(), 4));
  } else {
    const std::array<double, 1> w{loc.u};
    out.pose = evaluate_cumulative(group, w, std::span<Mat6>(jac.data(), 2));
  }
  out.count = n;
  for (std::size_t i = 0; i < n; ++i) out.terms[i] = {loc.first_knot + i, jac[i]};
  return out;
}

std::string format_tum_line(const StampedPose& p) {
  const Vec3& t = p.pose.translation();
  const Eigen::Quaterniond q = p.pose.quaternion();
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g", p.timestamp, t.x(),
                t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
  return buf;
}

void write_tum(const std::filesystem::path& path, std::span<const StampedPose> poses) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# timestamp tx ty tz qx qy qz qw\n";
  for (const auto& p : poses) out << format_tum_line(p) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<StampedPose> read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<StampedPose> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(is >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed TUM line");
    }
    out.push_back({ts, Pose::from_quaternion(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz})});
  }
  return out;
}

std::string trajectory_to_json(const Trajectory& traj) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(traj.kind()));
  j["t0"] = traj.t0();
  j["dt"] = traj.dt();
  j["frame_starts"] = traj.frame_starts();
  j["frame_span"] = traj.frame_span();
  auto& knots = j["knots"] = nlohmann::json::array();
  for (const auto& k : traj.knots()) {
    std::vector<double> r(9);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) r[3 * a + b] = k.rotation()(a, b);
    const Vec3& t = k.translation();
    knots.push_back({{"R", r}, {"t", {t.x(), t.y(), t.z()}}});
  }
  return j.dump(1);
}

Trajectory trajectory_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto kind = trajectory_kind_from_string(j.at("kind").get<std::string>());
    std::vector<Pose> knots;
    for (const auto& k : j.at("knots")) {
      const auto r = k.at("R").get<std::vector<double>>();
      const auto t = k.at("t").get<std::vector<double>>();
      if (r.size() != 9 || t.size() != 3) throw ConfigError("malformed knot entry");
      Mat3 rot;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) rot(a, b) = r[3 * a + b];
      knots.emplace_back(rot, Vec3(t[0], t[1], t[2]));
    }
    switch (kind) {
      case TrajectoryKind::CubicDep:
        return Trajectory::cubic_dep(std::move(knots), j.at("t0"), j.at("dt"));
      case TrajectoryKind::LinearDep:
        return Trajectory::linear_dep(std::move(knots), j.at("t0"), j.at("dt"));
      default:
        return Trajectory::nodep(kind, std::move(knots),
                                 j.at("frame_starts").get<std::vector<double>>(),
                                 j.at("frame_span").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trajectory json: ") + e.what());
  }
}

TrajectoryLayout make_layout(TrajectoryKind kind, std::span<const double> frame_starts,
                             double frame_span) {
  if (frame_starts.empty()) throw ConfigError("trajectory layout needs at least one frame");
  TrajectoryLayout l;
  l.kind = kind;
  l.frame_starts.assign(frame_starts.begin(), frame_starts.end());
  l.frame_span = frame_span;
  l.t0 = frame_starts.front();
  const std::size_t m = frame_starts.size();
  if (is_nodep(kind)) {
    const std::size_t g = knots_per_segment(kind);
    const double offset = kind == TrajectoryKind::CubicNodep ? -1.0 : 0.0;
    for (const double s : frame_starts) {
      for (std::size_t j = 0; j < g; ++j) l.knot_times.push_back(s + (offset + j) * frame_span);
    }
    return l;
  }
  if (m == 1) {
    l.dt = frame_span > 0.0 ? frame_span : 1.0;
  } else {
    l.dt = (frame_starts.back() - frame_starts.front()) / static_cast<double>(m - 1);
    for (std::size_t i = 1; i < m; ++i) {
      if (std::abs(frame_starts[i] - frame_starts[i - 1] - l.dt) > 1e-6 * l.dt) {
        throw ConfigError("dep trajectories need uniformly spaced frame starts (frame " +
                          std::to_string(i) + " breaks the spacing)");
      }
    }
  }
  if (kind == TrajectoryKind::CubicDep) {
    for (std::size_t i = 0; i < m + 3; ++i) l.knot_times.push_back(l.t0 + (static_cast<double>(i) - 1.0) * l.dt);
  } else {
    for (std::size_t i = 0; i < m + 1; ++i) l.knot_times.push_back(l.t0 + static_cast<double>(i) * l.dt);
  }
  return l;
}

Trajectory build_trajectory(const TrajectoryLayout& layout, std::vector<Pose> knots) {
  if (knots.size() != layout.knot_times.size()) {
    throw ShapeMismatch("build_trajectory: expected " + std::to_string(layout.knot_times.size()) +
                        " knots, got " + std::to_string(knots.size()));
  }
  switch (layout.kind) {
    case TrajectoryKind::CubicDep: return Trajectory::cubic_dep(std::move(knots), layout.t0, layout.dt);
    case TrajectoryKind::LinearDep: return Trajectory::linear_dep(std::move(knots), layout.t0, layout.dt);
    default: return Trajectory::nodep(layout.kind, std::move(knots), layout.frame_starts, layout.frame_span);
  }
}

Trajectory trajectory_from_frame_poses(TrajectoryKind kind, std::span<const Pose> frame_poses,
                                       std::span<const double> frame_starts) {
  if (is_nodep(kind)) throw ConfigError("trajectory_from_frame_poses: dep kinds only");
  if (frame_poses.size() != frame_starts.size() || frame_poses.size() < 2) {
    throw ShapeMismatch("trajectory_from_frame_poses: need >= 2 frames with one pose each");
  }
  const TrajectoryLayout layout = make_layout(kind, frame_starts, 0.0);
  std::vector<Pose> knots;
  if (kind == TrajectoryKind::CubicDep) {
    const Pose back_step = frame_poses[1].inverse() * frame_poses[0];
    knots.push_back(frame_poses[0] * back_step);
    knots.insert(knots.end(), frame_poses.begin(), frame_poses.end());
    knots = pad_virtual_knots(knots, 2);
  } else {
    knots = pad_virtual_knots(frame_poses, 1);
  }
  return build_trajectory(layout, std::move(knots));
}

}  // namespace rsrf
