#pragma once

// Synthetic rolling-shutter datasets rendered from analytic scenes and motions
// by simulating the row-by-row capture.

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsrf/dataset.hpp"
#include "rsrf/renderer.hpp"
#include "rsrf/scenes.hpp"
#include "rsrf/voxel_grid.hpp"

namespace rsrf {

/// Renders every frame: the RS image row by row at motion.pose(row time) and
/// the GS image at the frame-start pose. Images are quantized to what the
/// chosen format stores (8-bit for PNG, float32 for PFM), so the returned
/// dataset equals what load_dataset reads back. `info` is stored verbatim.
Dataset generate_dataset(const RadianceField& scene, const Motion& motion, const RsCamera& camera,
                         const SamplingConfig& sampling, ImageFormat format = ImageFormat::Png,
                         int threads = 1, nlohmann::json info = nlohmann::json::object());

/// Left-multiplies each knot by exp(xi) with a uniformly oriented rotation of
/// angle uniform in [0, rot_noise_deg] degrees and a translation of length
/// uniform in [0, trans_noise_frac * scene_extent].
std::vector<Pose> perturb_trajectory(std::span<const Pose> knots, double rot_noise_deg,
                                     double trans_noise_frac, double scene_extent,
                                     std::uint64_t seed);

/// Sets every vertex of the grid to the scene's value at that vertex.
void fit_grid_to_scene(VoxelGrid& grid, const RadianceField& scene);

/// Stores the value through float32, as a PFM file would.
Image round_to_float(const Image& img);

}  // namespace rsrf
