#include "rsrf/train.hpp"

#include <cmath>
#include <random>
#include <string>
#include <unordered_map>

#include "rsrf/error.hpp"
#include "rsrf/parallel.hpp"

namespace rsrf {

void TrainConfig::validate() const {
  if (pixels_per_step == 0) throw ConfigError("train.pixels_per_step must be positive");
  if (!(lr_field_init > 0.0) || !(lr_field_final > 0.0)) throw ConfigError("train: field learning rates must be > 0");
  if (lr_pose_init < 0.0 || lr_pose_final < 0.0) throw ConfigError("train: pose learning rates must be >= 0");
  if ((lr_pose_init == 0.0) != (lr_pose_final == 0.0)) {
    throw ConfigError("train: pose learning rates must both be zero (frozen poses) or both positive");
  }
  // A window reaching past the last step leaves the schedule unfinished.
  if (c2f && !(c2f_start < c2f_end)) {
    throw ConfigError("train: c2f window needs start < end");
  }
  if (threads < 1) throw ConfigError("train.threads must be >= 1");
}

PhotometricLoss photometric_loss(std::span<const Vec3> rendered, std::span<const Vec3> observed) {
  if (rendered.size() != observed.size()) throw ShapeMismatch("photometric_loss: batch sizes differ");
  PhotometricLoss out;
  out.grad.resize(rendered.size());
  if (rendered.empty()) return out;
  const double n = 3.0 * static_cast<double>(rendered.size());
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    const Vec3 diff = rendered[i] - observed[i];
    out.loss += diff.squaredNorm();
    out.grad[i] = (2.0 / n) * diff;
  }
  out.loss /= n;
  return out;
}

double training_row_time(const RsCamera& camera, std::size_t frame, std::size_t row,
                         bool rolling_shutter) {
  return rolling_shutter ? camera.row_time(frame, row) : camera.row_time(frame, 0);
}

TrainResult train(const Dataset& dataset, TrainableField& field, Trajectory& traj,
                  const TrainConfig& cfg, const SamplingConfig& sampling,
                  const TrainCallback& on_step) {
  cfg.validate();
  sampling.validate();
  dataset.validate();
  if (dataset.num_frames() == 0) throw ConfigError("train: dataset has no frames");

  const RsCamera& cam = dataset.camera;
  const std::size_t width = static_cast<std::size_t>(cam.intrinsics.width);
  const std::size_t height = static_cast<std::size_t>(cam.intrinsics.height);
  const std::size_t frames = dataset.num_frames();
  for (std::size_t f = 0; f < frames; ++f) {
    for (const std::size_t r : {std::size_t{0}, height - 1}) {
      const double t = training_row_time(cam, f, r, cfg.rolling_shutter);
      if (!traj.supports(t)) {
        const auto [b, e] = traj.valid_window();
        throw TimeOutOfRange("train: row time " + std::to_string(t) + " of frame " +
                             std::to_string(f) + " outside trajectory window [" +
                             std::to_string(b) + ", " + std::to_string(e) + "]");
      }
    }
  }

  const std::size_t n_params = field.num_params();
  const std::size_t n_pose = 6 * traj.num_knots();
  const bool optimize_pose = cfg.lr_pose_init > 0.0;
  Adam field_adam(n_params, cfg.adam);
  Adam pose_adam(n_pose, cfg.adam);
  std::vector<double> field_grad(n_params);
  std::vector<double> pose_grad(n_pose);
  std::vector<double> pose_delta(n_pose);

  const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cfg.pixels_per_step)));
  std::vector<std::vector<double>> worker_grads(static_cast<std::size_t>(workers - 1),
                                                std::vector<double>(n_params));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, frames * height * width - 1);

  struct RowSlot {
    std::size_t frame;
    std::size_t row;
    PoseJacobians pose;
    Vec6 grad = Vec6::Zero();
  };
  std::vector<std::size_t> pixel_index(cfg.pixels_per_step);
  std::vector<std::size_t> pixel_slot(cfg.pixels_per_step);
  std::vector<Vec3> observed(cfg.pixels_per_step);
  std::vector<Vec3> rendered(cfg.pixels_per_step);
  std::vector<RenderResult> forward(cfg.pixels_per_step);
  std::vector<Ray> rays(cfg.pixels_per_step);
  std::vector<Vec6> pixel_pose_grad(cfg.pixels_per_step);

  TrainResult result;
  result.loss_history.reserve(cfg.steps);
  const double order = field.max_encoding_progress();

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const double alpha = cfg.c2f ? c2f_alpha(step, cfg.c2f_start, cfg.c2f_end, order) : order;
    field.set_encoding_progress(alpha);
    const double lr_field = lr_schedule(step, cfg.steps, cfg.lr_field_init, cfg.lr_field_final);
    const double lr_pose =
        optimize_pose ? lr_schedule(step, cfg.steps, cfg.lr_pose_init, cfg.lr_pose_final) : 0.0;

    // Draw pixels; group them by (frame, row) so each row pose is evaluated once.
    std::vector<RowSlot> slots;
    std::unordered_map<std::size_t, std::size_t> slot_of_row;
    for (std::size_t i = 0; i < cfg.pixels_per_step; ++i) {
      const std::size_t idx = pick(rng);
      pixel_index[i] = idx;
      const std::size_t row_key = idx / width;
      auto [it, inserted] = slot_of_row.try_emplace(row_key, slots.size());
      if (inserted) slots.push_back({row_key / height, row_key % height, {}, Vec6::Zero()});
      pixel_slot[i] = it->second;
    }
    for (auto& s : slots) {
      const double t = training_row_time(cam, s.frame, s.row, cfg.rolling_shutter);
      if (optimize_pose) {
        s.pose = traj.query_pose_with_jacobians(t);
      } else {
        s.pose.pose = traj.query_pose(t);
      }
    }

    parallel_chunks(cfg.pixels_per_step, workers, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t idx = pixel_index[i];
        const std::size_t x = idx % width;
        const std::size_t y = (idx / width) % height;
        const std::size_t f = idx / (width * height);
        rays[i] = pixel_ray(cam.intrinsics, slots[pixel_slot[i]].pose.pose, static_cast<double>(x),
                            static_cast<double>(y));
        forward[i] = render_ray(field, rays[i], sampling, step * 0x100000001b3ull + i);
        rendered[i] = forward[i].color;
        observed[i] = dataset.rs_images[f].at(static_cast<int>(x), static_cast<int>(y));
      }
    });

    const PhotometricLoss loss = photometric_loss(rendered, observed);
    if (!std::isfinite(loss.loss)) {
      throw NonFiniteLoss("train: loss became non-finite at step " + std::to_string(step) +
                          " (lr_field " + std::to_string(lr_field) + ", lr_pose " +
                          std::to_string(lr_pose) + ", alpha " + std::to_string(alpha) + ")");
    }

    std::fill(field_grad.begin(), field_grad.end(), 0.0);
    for (auto& g : worker_grads) std::fill(g.begin(), g.end(), 0.0);
    parallel_chunks(cfg.pixels_per_step, workers, [&](std::size_t w, std::size_t b, std::size_t e) {
      std::span<double> grad = w == 0 ? std::span<double>(field_grad) : std::span<double>(worker_grads[w - 1]);
      for (std::size_t i = b; i < e; ++i) {
        pixel_pose_grad[i] = render_ray_backward(field, rays[i], forward[i], loss.grad[i], grad).pose;
      }
    });
    for (const auto& g : worker_grads) {
      for (std::size_t p = 0; p < n_params; ++p) field_grad[p] += g[p];
    }

    field_adam.step(field.params(), field_grad, lr_field);

    if (optimize_pose) {
      for (std::size_t i = 0; i < cfg.pixels_per_step; ++i) slots[pixel_slot[i]].grad += pixel_pose_grad[i];
      std::fill(pose_grad.begin(), pose_grad.end(), 0.0);
      for (const auto& s : slots) {
        for (const auto& sens : s.pose.sensitivities()) {
          Eigen::Map<Vec6> g(pose_grad.data() + 6 * sens.knot);
          g += sens.jacobian.transpose() * s.grad;
        }
      }
      for (const double g : pose_grad) {
        if (!std::isfinite(g)) throw NonFiniteLoss("train: non-finite pose gradient at step " + std::to_string(step));
      }
      std::fill(pose_delta.begin(), pose_delta.end(), 0.0);
      pose_adam.step(pose_delta, pose_grad, lr_pose);
      traj.retract(pose_delta);
    }

    result.loss_history.push_back(loss.loss);
    if (on_step) on_step({step, loss.loss, lr_field, lr_pose, alpha});
  }
  return result;
}

}  // namespace rsrf
