#pragma once

// The four pipeline commands behind the CLI (synth, train, render, eval) and
// the helpers they share. Each takes a resolved RunConfig and reports
// progress on `log`.

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsrf/config.hpp"
#include "rsrf/dataset.hpp"
#include "rsrf/field.hpp"
#include "rsrf/trajectory.hpp"

namespace rsrf {

/// Exit status for a failure: 2 for configuration and input errors, 3 for
/// numerical failures, 1 for anything unexpected.
int exit_code_for(const std::exception& e);

/// Camera described by the synth section (frame k starts at t0 + k * interval).
RsCamera synth_camera(const SynthConfig& cfg);
/// Renders the synth section's dataset in memory.
Dataset synthesize(const RunConfig& cfg);

/// Field bounds from the config, or from the dataset's scene description.
Aabb field_bounds(const RunConfig& cfg, const Dataset& ds);
std::unique_ptr<TrainableField> make_field(const FieldConfig& cfg, const Aabb& bounds);

/// Ground-truth knots for the configured model kind: sampled from the analytic
/// motion recorded in the dataset, or from a spline through the ground-truth
/// frame poses when no motion description is present.
Trajectory ground_truth_trajectory(TrajectoryKind kind, const Dataset& ds);
/// Starting point of the optimization per cfg.init.
Trajectory initial_trajectory(const RunConfig& cfg, const Dataset& ds, const Aabb& bounds);

/// Estimated pose at every frame start (and at every row time when `rows`).
std::vector<StampedPose> sample_frames(const Trajectory& traj, const RsCamera& camera);
std::vector<StampedPose> sample_rows(const Trajectory& traj, const RsCamera& camera);

/// Global-shutter renders at each time; TimeOutOfRange names the valid window.
std::vector<Image> render_times(const TrainableField& field, const Trajectory& traj,
                                const Intrinsics& intr, const SamplingConfig& sampling,
                                const std::vector<double>& times, int threads);
/// Times requested by the render section for a given trajectory.
std::vector<double> render_schedule(const RenderConfig& cfg, const Trajectory& traj);

void cmd_synth(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_render(const RunConfig& cfg, std::ostream& log);
/// Returns the JSON report; also written to <output>/eval.json when output is set.
nlohmann::json cmd_eval(const RunConfig& cfg, std::ostream& log);

}  // namespace rsrf
