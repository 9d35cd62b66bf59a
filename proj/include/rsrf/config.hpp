#pragma once

// Run configuration shared by all CLI commands: one JSON file per run.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsrf/camera.hpp"
#include "rsrf/dataset.hpp"
#include "rsrf/metrics.hpp"
#include "rsrf/mlp_field.hpp"
#include "rsrf/renderer.hpp"
#include "rsrf/train.hpp"
#include "rsrf/voxel_grid.hpp"

namespace rsrf {

struct FieldConfig {
  std::string backend = "voxel";  ///< "voxel" or "mlp"
  /// Scene bounds; when absent the dataset's scene description decides.
  bool has_bounds = false;
  Aabb bounds;
  std::array<int, 3> resolution{32, 32, 32};
  double init_density = 0.1;
  double init_color = 0.5;
  MlpConfig mlp;
  bool operator==(const FieldConfig&) const = default;
};

struct InitConfig {
  /// "noisy_gt": ground truth perturbed by the noise below; "gt": exact
  /// ground truth; "identity": every knot at the origin.
  std::string mode = "noisy_gt";
  double rot_noise_deg = 1.0;
  double trans_noise_frac = 0.01;
  /// Length scale for the translation noise; <= 0 uses the field bounds diagonal.
  double scene_extent = 0.0;
  bool operator==(const InitConfig&) const = default;
};

struct SynthConfig {
  nlohmann::json scene = {{"kind", "blob_field"}, {"count", 8}, {"extent", 1.0}, {"seed", 0}};
  nlohmann::json motion = {{"kind", "static"}, {"base", {{"eye", {0.0, 0.0, -3.0}}}}};
  Intrinsics intrinsics{60.0, 60.0, 32.0, 24.0, 64, 48};
  int num_frames = 15;
  double t0 = 0.0;
  double frame_interval = 0.1;
  double line_readout = 0.06 / 48.0;
  ImageFormat format = ImageFormat::Png;
  SamplingConfig sampling;
  bool operator==(const SynthConfig&) const = default;
};

struct RenderConfig {
  std::string checkpoint;  ///< directory written by `train`
  std::vector<double> times;
  /// When > 0, renders uniformly spaced times at this rate over [start, end]
  /// (default: the trajectory's valid window).
  double fps = 0.0;
  bool has_range = false;
  double start = 0.0;
  double end = 0.0;
  bool operator==(const RenderConfig&) const = default;
};

struct EvalConfig {
  std::string estimate;
  std::string reference;
  Alignment alignment = Alignment::Sim3;
  std::size_t rpe_delta = 1;
  /// "frames" (frame-start poses) or "rows" (every row time).
  std::string ate_samples = "frames";
  bool operator==(const EvalConfig&) const = default;
};

struct RunConfig {
  std::string dataset;
  std::string output = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  TrajectoryKind trajectory = TrajectoryKind::CubicDep;
  FieldConfig field;
  SamplingConfig sampling;
  TrainConfig train;
  InitConfig init;
  SynthConfig synth;
  RenderConfig render;
  EvalConfig eval;
  /// Also write the estimate at every row time (traj_est_rows.txt).
  bool write_row_trajectory = false;
  bool operator==(const RunConfig&) const = default;

  /// Train settings with the run-level seed and thread count applied.
  TrainConfig effective_train() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults. Throws ConfigError naming the bad field.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Reads a config file; relative paths are resolved against its directory.
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);

nlohmann::json sampling_to_json(const SamplingConfig& s);
SamplingConfig sampling_from_json(const nlohmann::json& j);

}  // namespace rsrf
