#pragma once

// Rolling-shutter image sequences with their camera model, on disk as
//
//   meta.json             intrinsics, timing, frame list, free-form "scene"/"motion"
//   rs/frame_%04d.png     rolling-shutter captures
//   gs/frame_%04d.png     global-shutter references at the frame-start pose
//   traj_gt_rows.txt      ground truth at every row time (TUM)
//   traj_gt_frames.txt    ground truth at every frame start (TUM)
//
// Only meta.json and rs/ are required.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsrf/camera.hpp"
#include "rsrf/image.hpp"
#include "rsrf/trajectory.hpp"

namespace rsrf {

enum class ImageFormat { Png, Pfm };

struct Dataset {
  RsCamera camera;
  std::vector<Image> rs_images;
  std::vector<Image> gs_images;
  std::vector<StampedPose> gt_rows;
  std::vector<StampedPose> gt_frames;
  nlohmann::json info = nlohmann::json::object();  ///< scene/motion description
  ImageFormat format = ImageFormat::Png;

  std::size_t num_frames() const { return rs_images.size(); }
  /// Checks image count and sizes against the camera; throws ConfigError.
  void validate() const;
};

std::string frame_filename(std::size_t index, ImageFormat format);

/// Writes the directory layout above; images are written in `dataset.format`.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

nlohmann::json intrinsics_to_json(const Intrinsics& intr);
Intrinsics intrinsics_from_json(const nlohmann::json& j);
nlohmann::json timing_to_json(const RsTiming& timing);
RsTiming timing_from_json(const nlohmann::json& j);

}  // namespace rsrf
