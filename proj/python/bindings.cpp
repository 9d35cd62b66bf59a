// Python bindings: Lie helpers, trajectory models, metrics and the four
// pipeline commands. Poses cross the boundary as 4x4 arrays, images as
// H x W x 3 float64 arrays, configs as JSON text.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rsrf/commands.hpp"
#include "rsrf/config.hpp"
#include "rsrf/error.hpp"
#include "rsrf/metrics.hpp"
#include "rsrf/trajectory.hpp"

namespace py = pybind11;
using namespace rsrf;

namespace {

Pose pose_from_matrix(const Mat4& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-9) {
    throw ConfigError("pose: last row must be [0, 0, 0, 1]");
  }
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

std::vector<Pose> poses_from(const std::vector<Mat4>& ms) {
  std::vector<Pose> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(pose_from_matrix(m));
  return out;
}

Image image_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw DimensionMismatch("image: expected an H x W x 3 array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

py::array_t<double> image_to(const Image& img) {
  py::array_t<double> a({img.height, img.width, 3});
  std::copy(img.data.begin(), img.data.end(), a.mutable_data());
  return a;
}

std::vector<StampedPose> stamped_from(const std::vector<double>& t, const std::vector<Mat4>& ms) {
  if (t.size() != ms.size()) throw DimensionMismatch("timestamps and poses differ in length");
  std::vector<StampedPose> out;
  for (std::size_t i = 0; i < t.size(); ++i) out.push_back({t[i], pose_from_matrix(ms[i])});
  return out;
}

RunConfig config_from(const std::string& json_text) {
  return run_config_from_json(nlohmann::json::parse(json_text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rolling-shutter radiance fields with continuous-time trajectories";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<TimeOutOfRange>(m, "TimeOutOfRange", base.ptr());
  py::register_exception<IndexOutOfRange>(m, "IndexOutOfRange", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<RotationNearPi>(m, "RotationNearPi", base.ptr());
  py::register_exception<TooFewSamples>(m, "TooFewSamples", base.ptr());
  py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", base.ptr());

  m.def("exp_se3", [](const Vec6& xi) { return exp_se3(xi).matrix(); }, py::arg("xi"),
        "Twist (omega, v) to a 4x4 pose.");
  m.def("log_se3", [](const Mat4& p) { return Twist(log_se3(pose_from_matrix(p))); }, py::arg("pose"));
  m.def("cumulative_basis", &cumulative_basis, py::arg("u"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_static(
          "create",
          [](const std::string& kind, const std::vector<Mat4>& knots, double t0, double dt) {
            const auto k = trajectory_kind_from_string(kind);
            if (k == TrajectoryKind::CubicDep) return Trajectory::cubic_dep(poses_from(knots), t0, dt);
            if (k == TrajectoryKind::LinearDep) return Trajectory::linear_dep(poses_from(knots), t0, dt);
            throw ConfigError("Trajectory.create: use create_nodep for '" + kind + "'");
          },
          py::arg("kind"), py::arg("knots"), py::arg("t0"), py::arg("dt"))
      .def_static(
          "create_nodep",
          [](const std::string& kind, const std::vector<Mat4>& knots, std::vector<double> frame_starts,
             double frame_span) {
            return Trajectory::nodep(trajectory_kind_from_string(kind), poses_from(knots), std::move(frame_starts),
                                     frame_span);
          },
          py::arg("kind"), py::arg("knots"), py::arg("frame_starts"), py::arg("frame_span"))
      .def_static("from_json", [](const std::string& s) { return trajectory_from_json(s); })
      .def("to_json", &trajectory_to_json)
      .def_property_readonly("kind", [](const Trajectory& t) { return std::string(to_string(t.kind())); })
      .def_property_readonly("knots",
                             [](const Trajectory& t) {
                               std::vector<Mat4> out;
                               for (const auto& k : t.knots()) out.push_back(k.matrix());
                               return out;
                             })
      .def("valid_window", &Trajectory::valid_window)
      .def("supports", &Trajectory::supports, py::arg("t"))
      .def("query_pose", [](const Trajectory& t, double time) { return t.query_pose(time).matrix(); },
           py::arg("t"));

  m.def("psnr", [](py::array_t<double> a, py::array_t<double> b) { return psnr(image_from(a), image_from(b)); });
  m.def("ssim", [](py::array_t<double> a, py::array_t<double> b) { return ssim(image_from(a), image_from(b)); });
  m.def(
      "ate",
      [](const std::vector<double>& est_t, const std::vector<Mat4>& est, const std::vector<double>& ref_t,
         const std::vector<Mat4>& ref, const std::string& alignment) {
        const AteResult r = ate(stamped_from(est_t, est), stamped_from(ref_t, ref), alignment_from_string(alignment));
        py::dict d;
        d["rmse"] = r.rmse;
        d["mean"] = r.mean;
        d["std"] = r.std;
        d["errors"] = r.errors;
        d["scale"] = r.scale;
        d["transform"] = r.transform;
        d["degenerate"] = r.degenerate;
        d["matched"] = r.matched;
        return d;
      },
      py::arg("est_times"), py::arg("est_poses"), py::arg("ref_times"), py::arg("ref_poses"),
      py::arg("alignment") = "sim3");
  m.def(
      "rpe_rot",
      [](const std::vector<double>& est_t, const std::vector<Mat4>& est, const std::vector<double>& ref_t,
         const std::vector<Mat4>& ref, std::size_t delta) {
        const RpeResult r = rpe_rot(stamped_from(est_t, est), stamped_from(ref_t, ref), delta);
        return py::make_tuple(r.mean, r.std);
      },
      py::arg("est_times"), py::arg("est_poses"), py::arg("ref_times"), py::arg("ref_poses"), py::arg("delta") = 1);

  m.def("read_image", [](const std::string& path) { return image_to(read_image(path)); }, py::arg("path"));
  m.def("read_tum",
        [](const std::string& path) {
          std::vector<double> t;
          std::vector<Mat4> p;
          for (const auto& s : read_tum(path)) {
            t.push_back(s.timestamp);
            p.push_back(s.pose.matrix());
          }
          return py::make_tuple(t, p);
        },
        py::arg("path"));

  m.def("default_config", [] { return to_json(RunConfig{}).dump(); });
  // Commands release the GIL; their logs are returned as text.
  m.def("synth",
        [](const std::string& cfg) {
          const RunConfig c = config_from(cfg);
          std::ostringstream log;
          py::gil_scoped_release nogil;
          cmd_synth(c, log);
          return log.str();
        },
        py::arg("config_json"));
  m.def("train",
        [](const std::string& cfg) {
          const RunConfig c = config_from(cfg);
          std::ostringstream log;
          py::gil_scoped_release nogil;
          cmd_train(c, log);
          return log.str();
        },
        py::arg("config_json"));
  m.def("render",
        [](const std::string& cfg) {
          const RunConfig c = config_from(cfg);
          std::ostringstream log;
          py::gil_scoped_release nogil;
          cmd_render(c, log);
          return log.str();
        },
        py::arg("config_json"));
  m.def("evaluate",
        [](const std::string& cfg) {
          const RunConfig c = config_from(cfg);
          std::ostringstream log;
          nlohmann::json report;
          {
            py::gil_scoped_release nogil;
            report = cmd_eval(c, log);
          }
          return report.dump();
        },
        py::arg("config_json"));
}
