#pragma once

// Image quality (PSNR, SSIM) and trajectory accuracy (ATE, rotational RPE).

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rsrf/image.hpp"
#include "rsrf/trajectory.hpp"

namespace rsrf {

/// 10 log10(1 / MSE) over all channels; +infinity for identical images.
/// Throws DimensionMismatch.
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM on the channel-mean grayscale image with an 11x11
/// Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1,
/// averaged over windows that fit entirely inside the image. Images smaller
/// than the window use one window clipped to the image.
double ssim(const Image& a, const Image& b);

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (estimate, reference) indices
  std::size_t unmatched_estimate = 0;
  std::size_t unmatched_reference = 0;
};

/// Pairs each reference sample with the nearest estimate stamp within
/// max_dt; each estimate is used at most once. Pairs are in reference order.
Association associate(std::span<const StampedPose> est, std::span<const StampedPose> ref,
                      double max_dt);

enum class Alignment { SE3, Sim3 };
std::string_view to_string(Alignment a);
Alignment alignment_from_string(std::string_view name);

struct AteResult {
  double rmse = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> errors;
  double scale = 1.0;
  Mat4 transform = Mat4::Identity();  ///< maps estimate positions onto the reference
  bool degenerate = false;            ///< collinear geometry, translation-only alignment used
  std::size_t matched = 0;
  std::size_t dropped = 0;
};

/// Aligns estimate positions to reference positions (Umeyama) and reports the
/// residual distances. max_dt <= 0 uses half the median reference spacing.
/// Throws TooFewSamples with fewer than 3 matches.
AteResult ate(std::span<const StampedPose> est, std::span<const StampedPose> ref,
              Alignment alignment = Alignment::Sim3, double max_dt = 0.0);

struct RpeResult {
  double mean = 0.0;  ///< degrees per `delta` frames
  double std = 0.0;
  std::size_t count = 0;
};

/// Angle of (R_ref,i^T R_ref,i+d)^T (R_est,i^T R_est,i+d) in degrees over
/// associated samples. Throws TooFewSamples with fewer than delta + 1 matches.
RpeResult rpe_rot(std::span<const StampedPose> est, std::span<const StampedPose> ref,
                  std::size_t delta = 1, double max_dt = 0.0);

}  // namespace rsrf
