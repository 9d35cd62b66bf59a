#include "rsrf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "rsrf/error.hpp"

namespace rsrf {
namespace {

void check_same_size(const Image& a, const Image& b, const char* what) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionMismatch(std::string(what) + ": image sizes differ (" + std::to_string(a.width) +
                            "x" + std::to_string(a.height) + " vs " + std::to_string(b.width) +
                            "x" + std::to_string(b.height) + ")");
  }
}

std::vector<double> grayscale(const Image& img) {
  std::vector<double> g(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = (img.data[3 * i] + img.data[3 * i + 1] + img.data[3 * i + 2]) / 3.0;
  }
  return g;
}

double median_spacing(std::span<const StampedPose> s) {
  if (s.size() < 2) return 0.0;
  std::vector<double> d;
  for (std::size_t i = 1; i < s.size(); ++i) d.push_back(s[i].timestamp - s[i - 1].timestamp);
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return d[d.size() / 2];
}

double resolve_max_dt(std::span<const StampedPose> ref, double max_dt) {
  if (max_dt > 0.0) return max_dt;
  const double m = median_spacing(ref);
  return m > 0.0 ? 0.5 * m : 1e-6;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same_size(a, b, "psnr");
  if (a.data.empty()) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double ssim(const Image& a, const Image& b) {
  check_same_size(a, b, "ssim");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const int w = a.width;
  const int h = a.height;
  if (w == 0 || h == 0) return 1.0;
  const auto ga = grayscale(a);
  const auto gb = grayscale(b);

  const int wx = std::min(kWin, w);
  const int wy = std::min(kWin, h);
  auto kernel = [](int n) {
    std::vector<double> k(static_cast<std::size_t>(n));
    const double c = 0.5 * (n - 1);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      k[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - c) * (i - c) / (kSigma * kSigma));
      s += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) v /= s;
    return k;
  };
  const auto kx = kernel(wx);
  const auto ky = kernel(wy);

  double total = 0.0;
  std::size_t count = 0;
  for (int y0 = 0; y0 + wy <= h; ++y0) {
    for (int x0 = 0; x0 + wx <= w; ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int j = 0; j < wy; ++j) {
        for (int i = 0; i < wx; ++i) {
          const double wt = ky[static_cast<std::size_t>(j)] * kx[static_cast<std::size_t>(i)];
          const std::size_t p = static_cast<std::size_t>(y0 + j) * w + (x0 + i);
          ma += wt * ga[p];
          mb += wt * gb[p];
          saa += wt * ga[p] * ga[p];
          sbb += wt * gb[p] * gb[p];
          sab += wt * ga[p] * gb[p];
        }
      }
      const double va = saa - ma * ma;
      const double vb = sbb - mb * mb;
      const double cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

Association associate(std::span<const StampedPose> est, std::span<const StampedPose> ref,
                      double max_dt) {
  Association out;
  std::vector<bool> used(est.size(), false);
  for (std::size_t r = 0; r < ref.size(); ++r) {
    const double t = ref[r].timestamp;
    const auto it = std::lower_bound(est.begin(), est.end(), t,
                                     [](const StampedPose& p, double v) { return p.timestamp < v; });
    std::size_t best = est.size();
    double best_dt = std::numeric_limits<double>::infinity();
    for (auto cand : {it, it == est.begin() ? est.end() : it - 1}) {
      if (cand == est.end()) continue;
      const auto idx = static_cast<std::size_t>(cand - est.begin());
      const double dt = std::abs(cand->timestamp - t);
      if (!used[idx] && dt <= max_dt && dt < best_dt) {
        best = idx;
        best_dt = dt;
      }
    }
    if (best == est.size()) {
      ++out.unmatched_reference;
      continue;
    }
    used[best] = true;
    out.pairs.emplace_back(best, r);
  }
  out.unmatched_estimate = est.size() - out.pairs.size();
  return out;
}

std::string_view to_string(Alignment a) { return a == Alignment::SE3 ? "se3" : "sim3"; }

Alignment alignment_from_string(std::string_view name) {
  if (name == "se3" || name == "SE3") return Alignment::SE3;
  if (name == "sim3" || name == "Sim3") return Alignment::Sim3;
  throw ConfigError("unknown alignment '" + std::string(name) + "' (expected se3 or sim3)");
}

AteResult ate(std::span<const StampedPose> est, std::span<const StampedPose> ref, Alignment alignment,
              double max_dt) {
  const Association assoc = associate(est, ref, resolve_max_dt(ref, max_dt));
  const std::size_t n = assoc.pairs.size();
  if (n < 3) {
    throw TooFewSamples("ate: need at least 3 matched samples, got " + std::to_string(n));
  }
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (std::size_t i = 0; i < n; ++i) {
    src.col(static_cast<Eigen::Index>(i)) = est[assoc.pairs[i].first].pose.translation();
    dst.col(static_cast<Eigen::Index>(i)) = ref[assoc.pairs[i].second].pose.translation();
  }

  AteResult res;
  res.matched = n;
  res.dropped = assoc.unmatched_estimate + assoc.unmatched_reference;

  // Rotation is unobservable when either point set is (nearly) collinear.
  auto spread = [](const Eigen::Matrix3Xd& m) {
    const Eigen::Matrix3Xd c = m.colwise() - m.rowwise().mean();
    const Vec3 sv = Eigen::JacobiSVD<Eigen::Matrix3Xd>(c).singularValues();
    return sv;
  };
  const Vec3 s_src = spread(src);
  const Vec3 s_dst = spread(dst);
  res.degenerate = !(s_src[1] > 1e-9 * std::max(s_src[0], 1e-300)) || s_src[0] < 1e-12 ||
                   !(s_dst[1] > 1e-9 * std::max(s_dst[0], 1e-300)) || s_dst[0] < 1e-12;
  if (res.degenerate) {
    res.transform.topRightCorner<3, 1>() = dst.rowwise().mean() - src.rowwise().mean();
  } else {
    res.transform = Eigen::umeyama(src, dst, alignment == Alignment::Sim3);
    res.scale = res.transform.topLeftCorner<3, 3>().col(0).norm();
  }

  const Mat3 a = res.transform.topLeftCorner<3, 3>();
  const Vec3 b = res.transform.topRightCorner<3, 1>();
  double sum = 0.0, sum2 = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double e = (a * src.col(i) + b - dst.col(i)).norm();
    res.errors.push_back(e);
    sum += e;
    sum2 += e * e;
  }
  res.mean = sum / static_cast<double>(n);
  res.rmse = std::sqrt(sum2 / static_cast<double>(n));
  res.std = std::sqrt(std::max(0.0, sum2 / static_cast<double>(n) - res.mean * res.mean));
  return res;
}

RpeResult rpe_rot(std::span<const StampedPose> est, std::span<const StampedPose> ref, std::size_t delta,
                  double max_dt) {
  if (delta == 0) throw ConfigError("rpe_rot: delta must be >= 1");
  const Association assoc = associate(est, ref, resolve_max_dt(ref, max_dt));
  const auto& p = assoc.pairs;
  if (p.size() < delta + 1) {
    throw TooFewSamples("rpe_rot: need at least " + std::to_string(delta + 1) +
                        " matched samples, got " + std::to_string(p.size()));
  }
  std::vector<double> angles;
  for (std::size_t i = 0; i + delta < p.size(); ++i) {
    const Mat3 rel_ref =
        ref[p[i].second].pose.rotation().transpose() * ref[p[i + delta].second].pose.rotation();
    const Mat3 rel_est =
        est[p[i].first].pose.rotation().transpose() * est[p[i + delta].first].pose.rotation();
    angles.push_back(rotation_angle(rel_ref.transpose() * rel_est) * 180.0 / std::numbers::pi);
  }
  RpeResult r;
  r.count = angles.size();
  double s = 0.0, s2 = 0.0;
  for (const double a : angles) {
    s += a;
    s2 += a * a;
  }
  r.mean = s / static_cast<double>(r.count);
  r.std = std::sqrt(std::max(0.0, s2 / static_cast<double>(r.count) - r.mean * r.mean));
  return r;
}

}  // namespace rsrf
