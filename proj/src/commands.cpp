#include "rsrf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "rsrf/error.hpp"
#include "rsrf/metrics.hpp"
#include "rsrf/mlp_field.hpp"
#include "rsrf/scenes.hpp"
#include "rsrf/synthgen.hpp"
#include "rsrf/voxel_grid.hpp"

namespace rsrf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kInitNoiseStream = 0x9e3779b97f4a7c15ull;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string window_text(const Trajectory& traj) {
  const auto [b, e] = traj.valid_window();
  char buf[96];
  std::snprintf(buf, sizeof buf, "[%.9g, %.9g]", b, e);
  return buf;
}

fs::path image_dir(const fs::path& dir) {
  for (const char* sub : {"gs", "render"}) {
    if (fs::is_directory(dir / sub)) return dir / sub;
  }
  return dir;
}

std::map<std::string, fs::path> list_images(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".png" || ext == ".pfm")) out[e.path().filename().string()] = e.path();
  }
  return out;
}

fs::path find_first(const fs::path& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (fs::exists(dir / n)) return dir / n;
  }
  return {};
}

json number_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NonFiniteLoss*>(&e) || dynamic_cast<const RotationNearPi*>(&e) ||
      dynamic_cast<const TooFewSamples*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const Error*>(&e)) return 2;
  return 1;
}

RsCamera synth_camera(const SynthConfig& cfg) {
  RsCamera cam;
  cam.intrinsics = cfg.intrinsics;
  cam.timing.line_readout = cfg.line_readout;
  for (int m = 0; m < cfg.num_frames; ++m) cam.timing.frame_starts.push_back(cfg.t0 + m * cfg.frame_interval);
  cam.validate();
  return cam;
}

Dataset synthesize(const RunConfig& cfg) {
  const RsCamera cam = synth_camera(cfg.synth);
  const auto scene = make_scene(cfg.synth.scene);
  const auto motion = make_motion(cfg.synth.motion);
  json info{{"scene", cfg.synth.scene}, {"motion", cfg.synth.motion}};
  return generate_dataset(*scene, *motion, cam, cfg.synth.sampling, cfg.synth.format, cfg.threads,
                          std::move(info));
}

Aabb field_bounds(const RunConfig& cfg, const Dataset& ds) {
  if (cfg.field.has_bounds) return cfg.field.bounds;
  if (ds.info.contains("scene")) return scene_bounds(ds.info["scene"]);
  throw ConfigError("field.bounds: required when the dataset carries no scene description");
}

std::unique_ptr<TrainableField> make_field(const FieldConfig& cfg, const Aabb& bounds) {
  if (cfg.backend == "voxel") {
    VoxelGridConfig v;
    v.resolution = cfg.resolution;
    v.bounds = bounds;
    v.init_density = cfg.init_density;
    v.init_color = cfg.init_color;
    return std::make_unique<VoxelGrid>(v);
  }
  if (cfg.backend == "mlp") {
    MlpConfig m = cfg.mlp;
    m.bounds = bounds;
    return std::make_unique<MlpField>(m);
  }
  throw ConfigError("field.backend: unknown backend '" + cfg.backend + "'");
}

Trajectory ground_truth_trajectory(TrajectoryKind kind, const Dataset& ds) {
  const auto& starts = ds.camera.timing.frame_starts;
  const TrajectoryLayout layout = make_layout(kind, starts, ds.camera.readout_span());
  if (ds.info.contains("motion")) {
    const auto motion = make_motion(ds.info["motion"]);
    return fit_trajectory(layout, [&](double t) { return motion->pose(t); });
  }
  if (ds.gt_frames.size() != starts.size() || starts.size() < 2) {
    throw ConfigError("init: ground truth needs a motion description or per-frame poses for >= 2 frames");
  }
  std::vector<Pose> frames;
  for (const auto& p : ds.gt_frames) frames.push_back(p.pose);
  const Trajectory ref = trajectory_from_frame_poses(TrajectoryKind::CubicDep, frames, starts);
  const auto [b, e] = ref.valid_window();
  return fit_trajectory(layout, [&](double t) { return ref.query_pose(std::clamp(t, b, e)); });
}

Trajectory initial_trajectory(const RunConfig& cfg, const Dataset& ds, const Aabb& bounds) {
  if (cfg.init.mode == "identity") {
    const TrajectoryLayout layout =
        make_layout(cfg.trajectory, ds.camera.timing.frame_starts, ds.camera.readout_span());
    return fit_trajectory(layout, [](double) { return Pose::identity(); });
  }
  Trajectory gt = ground_truth_trajectory(cfg.trajectory, ds);
  if (cfg.init.mode == "gt") return gt;
  const double extent = cfg.init.scene_extent > 0.0 ? cfg.init.scene_extent : bounds.extent().norm();
  const auto noisy = perturb_trajectory(gt.knots(), cfg.init.rot_noise_deg, cfg.init.trans_noise_frac,
                                        extent, cfg.seed ^ kInitNoiseStream);
  for (std::size_t i = 0; i < noisy.size(); ++i) gt.set_knot(i, noisy[i]);
  return gt;
}

std::vector<StampedPose> sample_frames(const Trajectory& traj, const RsCamera& camera) {
  std::vector<StampedPose> out;
  for (const double t : camera.timing.frame_starts) out.push_back({t, traj.query_pose(t)});
  return out;
}

std::vector<StampedPose> sample_rows(const Trajectory& traj, const RsCamera& camera) {
  std::vector<StampedPose> out;
  for (std::size_t f = 0; f < camera.num_frames(); ++f) {
    for (int r = 0; r < camera.intrinsics.height; ++r) {
      const double t = camera.row_time(f, static_cast<std::size_t>(r));
      out.push_back({t, traj.query_pose(t)});
    }
  }
  return out;
}

std::vector<double> render_schedule(const RenderConfig& cfg, const Trajectory& traj) {
  if (!cfg.times.empty()) return cfg.times;
  if (cfg.fps <= 0.0) return {};
  const auto [wb, we] = traj.valid_window();
  const double b = cfg.has_range ? cfg.start : wb;
  const double e = cfg.has_range ? cfg.end : we;
  std::vector<double> times;
  const double step = 1.0 / cfg.fps;
  const auto n = static_cast<std::size_t>(std::floor((e - b) / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) times.push_back(b + static_cast<double>(k) * step);
  return times;
}

std::vector<Image> render_times(const TrainableField& field, const Trajectory& traj, const Intrinsics& intr,
                                const SamplingConfig& sampling, const std::vector<double>& times,
                                int threads) {
  for (const double t : times) {
    if (!traj.supports(t)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9g", t);
      throw TimeOutOfRange(std::string("render: time ") + buf + " outside the valid window " + window_text(traj));
    }
  }
  std::vector<Image> out;
  out.reserve(times.size());
  for (const double t : times) out.push_back(render_gs_image(field, traj.query_pose(t), intr, sampling, threads));
  return out;
}

void cmd_synth(const RunConfig& cfg, std::ostream& log) {
  if (cfg.output.empty()) throw ConfigError("synth: output directory is required");
  const Dataset ds = synthesize(cfg);
  save_dataset(cfg.output, ds);
  log << "synth: wrote " << ds.num_frames() << " frames (" << ds.camera.intrinsics.width << "x"
      << ds.camera.intrinsics.height << ", readout " << ds.camera.readout_span() << " s) to "
      << cfg.output << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  if (cfg.dataset.empty()) throw ConfigError("train: dataset path is required");
  if (!fs::is_directory(cfg.dataset)) throw ConfigError("train: dataset directory " + cfg.dataset + " does not exist");
  if (cfg.output.empty()) throw ConfigError("train: output directory is required");
  const Dataset ds = load_dataset(cfg.dataset);
  const Aabb bounds = field_bounds(cfg, ds);
  auto field = make_field(cfg.field, bounds);
  Trajectory traj = initial_trajectory(cfg, ds, bounds);

  const fs::path out(cfg.output);
  fs::create_directories(out);
  save_run_config(out / "config.json", cfg);
  write_tum(out / "traj_init.txt", sample_frames(traj, ds.camera));

  std::ofstream train_log(out / "train_log.jsonl");
  if (!train_log) throw IoError("cannot write " + (out / "train_log.jsonl").string());
  const TrainConfig tcfg = cfg.effective_train();
  if (tcfg.steps > 0) {
    const std::size_t every = std::max<std::size_t>(1, tcfg.steps / 20);
    train(ds, *field, traj, tcfg, cfg.sampling, [&](const TrainLogEntry& e) {
      train_log << json{{"step", e.step},
                        {"loss", e.loss},
                        {"lr_field", e.lr_field},
                        {"lr_pose", e.lr_pose},
                        {"alpha", e.alpha}}
                       .dump()
                << '\n';
      if (e.step % every == 0 || e.step + 1 == tcfg.steps) {
        log << "train: step " << e.step << " loss " << e.loss << "\n";
      }
    });
  }

  save_field(out / "field.ckpt", *field);
  write_text(out / "trajectory.json", trajectory_to_json(traj));
  write_tum(out / "traj_est.txt", sample_frames(traj, ds.camera));
  if (cfg.write_row_trajectory) write_tum(out / "traj_est_rows.txt", sample_rows(traj, ds.camera));
  const json model{{"intrinsics", intrinsics_to_json(ds.camera.intrinsics)},
                   {"timing", timing_to_json(ds.camera.timing)},
                   {"sampling", sampling_to_json(cfg.sampling)}};
  write_text(out / "model.json", model.dump(2) + "\n");
  log << "train: wrote model to " << out.string() << "\n";
}

void cmd_render(const RunConfig& cfg, std::ostream& log) {
  if (cfg.render.checkpoint.empty()) throw ConfigError("render: checkpoint directory is required");
  const fs::path ck(cfg.render.checkpoint);
  if (!fs::exists(ck / "model.json")) throw ConfigError("render: " + ck.string() + " has no model.json");
  json model;
  try {
    model = json::parse(read_text(ck / "model.json"));
  } catch (const json::exception& e) {
    throw ConfigError("render: bad model.json: " + std::string(e.what()));
  }
  const Trajectory traj = trajectory_from_json(read_text(ck / "trajectory.json"));
  const std::vector<double> times = render_schedule(cfg.render, traj);
  if (times.empty()) {
    log << "render: no times requested\n";
    return;
  }
  const auto field = load_field(ck / "field.ckpt");
  const Intrinsics intr = intrinsics_from_json(model.at("intrinsics"));
  const SamplingConfig sampling = sampling_from_json(model.at("sampling"));
  const auto images = render_times(*field, traj, intr, sampling, times, cfg.threads);

  const fs::path out(cfg.output);
  fs::create_directories(out);
  std::ostringstream index;
  index << std::setprecision(17);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string name = frame_filename(i, ImageFormat::Png);
    write_png(out / name, images[i]);
    index << name << ' ' << times[i] << '\n';
  }
  write_text(out / "times.txt", index.str());
  log << "render: wrote " << images.size() << " images to " << out.string() << "\n";
}

json cmd_eval(const RunConfig& cfg, std::ostream& log) {
  if (cfg.eval.estimate.empty() || cfg.eval.reference.empty()) {
    throw ConfigError("eval: both estimate and reference directories are required");
  }
  const fs::path est(cfg.eval.estimate);
  const fs::path ref(cfg.eval.reference);
  for (const auto& d : {est, ref}) {
    if (!fs::is_directory(d)) throw ConfigError("eval: " + d.string() + " is not a directory");
  }

  json report;
  const auto est_images = list_images(image_dir(est));
  const auto ref_images = list_images(image_dir(ref));
  json per_image = json::array();
  double psnr_sum = 0.0, ssim_sum = 0.0;
  std::size_t n = 0;
  for (const auto& [name, ref_path] : ref_images) {
    const auto it = est_images.find(name);
    if (it == est_images.end()) continue;
    const Image a = read_image(it->second);
    const Image b = read_image(ref_path);
    double p, s;
    try {
      p = psnr(a, b);
      s = ssim(a, b);
    } catch (const DimensionMismatch& e) {
      throw DimensionMismatch("eval: " + it->second.string() + " vs " + ref_path.string() + ": " + e.what());
    }
    per_image.push_back({{"name", name}, {"psnr", number_or_inf(p)}, {"ssim", s}});
    psnr_sum += p;
    ssim_sum += s;
    ++n;
  }
  report["images"] = {{"matched", n},
                      {"unmatched_reference", ref_images.size() - n},
                      {"per_image", per_image}};
  if (n > 0) {
    report["images"]["psnr_mean"] = number_or_inf(psnr_sum / static_cast<double>(n));
    report["images"]["ssim_mean"] = ssim_sum / static_cast<double>(n);
  }

  const bool rows = cfg.eval.ate_samples == "rows";
  const fs::path est_traj = rows ? find_first(est, {"traj_est_rows.txt", "traj_gt_rows.txt"})
                                 : find_first(est, {"traj_est.txt", "traj_gt_frames.txt"});
  const fs::path ref_traj = rows ? find_first(ref, {"traj_gt_rows.txt", "traj_est_rows.txt"})
                                 : find_first(ref, {"traj_gt_frames.txt", "traj_est.txt"});
  if (!est_traj.empty() && !ref_traj.empty()) {
    const auto e = read_tum(est_traj);
    const auto r = read_tum(ref_traj);
    try {
      const AteResult a = ate(e, r, cfg.eval.alignment);
      const RpeResult rp = rpe_rot(e, r, cfg.eval.rpe_delta);
      report["trajectory"] = {{"estimate", est_traj.string()},
                              {"reference", ref_traj.string()},
                              {"alignment", to_string(cfg.eval.alignment)},
                              {"ate_rmse", a.rmse},
                              {"ate_mean", a.mean},
                              {"ate_std", a.std},
                              {"scale", a.scale},
                              {"degenerate", a.degenerate},
                              {"matched", a.matched},
                              {"dropped", a.dropped},
                              {"rpe_rot_mean_deg", rp.mean},
                              {"rpe_rot_std_deg", rp.std}};
      if (a.degenerate) log << "eval: warning: collinear trajectory, translation-only alignment used\n";
    } catch (const TooFewSamples& ex) {
      throw TooFewSamples("eval: " + est_traj.string() + " vs " + ref_traj.string() + ": " + ex.what());
    }
  }

  log << std::left << std::setw(24) << "metric" << "value\n";
  auto row = [&](const std::string& k, const json& v) {
    log << std::left << std::setw(24) << k << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  };
  row("images matched", report["images"]["matched"]);
  if (n > 0) {
    row("psnr mean (dB)", report["images"]["psnr_mean"]);
    row("ssim mean", report["images"]["ssim_mean"]);
  }
  if (report.contains("trajectory")) {
    const auto& t = report["trajectory"];
    row("ate rmse (m)", t["ate_rmse"]);
    row("rpe rot (deg/frame)", t["rpe_rot_mean_deg"]);
  }
  if (!cfg.output.empty()) {
    fs::create_directories(cfg.output);
    write_text(fs::path(cfg.output) / "eval.json", report.dump(2) + "\n");
  }
  return report;
}

}  // namespace rsrf
