#include <cmath>
#include <vector>

#include "doctest.h"
#include "rsrf/error.hpp"
#include "rsrf/renderer.hpp"
#include "rsrf/scenes.hpp"
#include "rsrf/voxel_grid.hpp"
#include "test_util.hpp"

using namespace rsrf;
using rsrf::testing::Rng;
using rsrf::testing::rel_err;

namespace {

struct ConstantField final : RadianceField {
  FieldSample s;
  FieldSample query(const Vec3&, const Vec3&) const override { return s; }
};

VoxelGrid smooth_grid(Rng& rng, int res = 8) {
  VoxelGridConfig cfg;
  cfg.resolution = {res, res, res};
  cfg.bounds = {Vec3::Constant(-1), Vec3::Constant(1)};
  VoxelGrid g(cfg);
  auto p = g.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = i % 4 == 3 ? rng.uniform(-1.0, 2.0) : rng.uniform(-2.0, 2.0);
  return g;
}

SamplingConfig sampling(int n = 32) {
  SamplingConfig s;
  s.near = 1.5;
  s.far = 4.5;
  s.n_samples = n;
  return s;
}

Intrinsics small_intr() { return {20.0, 20.0, 8.0, 6.0, 16, 12}; }

template <typename F>
bool central_diff(F&& f, double h, double& out) {
  const double f0 = f(0.0), fp = f(h), fm = f(-h);
  const double fwd = (fp - f0) / h, bwd = (f0 - fm) / h;
  out = (fp - fm) / (2 * h);
  return std::abs(fwd - bwd) <= 1e-3 * std::max({std::abs(fwd), std::abs(bwd), 1e-6});
}

}  // namespace

TEST_CASE("sample_depths examples") {
  SamplingConfig c;
  // sample_depths itself does not validate, so a zero near plane still yields midpoints.
  c.near = 0.0;
  c.far = 4.0;
  c.n_samples = 4;
  CHECK(sample_depths(c) == std::vector<double>{0.5, 1.5, 2.5, 3.5});
  c.near = 1.0;
  c.far = 3.0;
  c.n_samples = 2;
  CHECK(sample_depths(c) == std::vector<double>{1.5, 2.5});

  c = sampling(16);
  c.stratified = true;
  c.rng_seed = 5;
  const auto a = sample_depths(c, 17), b = sample_depths(c, 17), other = sample_depths(c, 18);
  CHECK(a == b);
  CHECK(a != other);
  const double bin = (c.far - c.near) / 16;
  for (int i = 0; i < 16; ++i) {
    CHECK(a[i] >= c.near + i * bin);
    CHECK(a[i] <= c.near + (i + 1) * bin);
  }
  c.near = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sampling(1);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("render_ray examples") {
  ConstantField empty;
  const Ray ray;
  auto r = render_ray(empty, ray, sampling());
  CHECK(r.color == Vec3::Zero());
  for (const double w : r.samples.weights) CHECK(w == 0.0);

  r = composite({1.0, 2.0, 3.0}, {1e6, 0.0, 0.0}, {Vec3(1, 0.5, 0.25), Vec3::Ones(), Vec3::Ones()}, Vec3::Zero());
  CHECK((r.color - Vec3(1, 0.5, 0.25)).norm() < 1e-6);

  r = composite({0.0, 1.0}, {std::log(2.0), 1e9}, {Vec3(1, 0, 0), Vec3(0, 1, 0)}, Vec3::Zero());
  CHECK((r.color - Vec3(0.5, 0.5, 0)).norm() < 1e-12);
  CHECK(r.samples.transmittance[1] == doctest::Approx(0.5).epsilon(1e-15));

  // Background shows through an empty ray.
  r = composite({1.0, 2.0}, {0.0, 0.0}, {Vec3::Zero(), Vec3::Zero()}, Vec3(0.2, 0.4, 0.6));
  CHECK((r.color - Vec3(0.2, 0.4, 0.6)).norm() < 1e-15);
}

TEST_CASE("weights are conserved and transmittance never increases") {
  Rng rng(51);
  const VoxelGrid g = smooth_grid(rng);
  for (int i = 0; i < 500; ++i) {
    Ray ray;
    ray.origin = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), -3.0);
    ray.direction = Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 1.0).normalized();
    const auto r = render_ray(g, ray, sampling(48));
    const auto& s = r.samples;
    double sum = s.final_transmittance;
    for (std::size_t k = 0; k < s.weights.size(); ++k) {
      CHECK(s.weights[k] >= 0.0);
      sum += s.weights[k];
      if (k + 1 < s.weights.size()) CHECK(s.transmittance[k + 1] <= s.transmittance[k]);
    }
    CHECK(s.transmittance[0] == 1.0);
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("splitting an interval leaves the composite unchanged") {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 6;
    std::vector<double> depths, dens;
    std::vector<Vec3> cols;
    double z = 1.0;
    for (int i = 0; i < n; ++i) {
      depths.push_back(z);
      z += rng.uniform(0.05, 0.5);
      dens.push_back(rng.uniform(0.0, 5.0));
      cols.push_back(Vec3(rng.uniform(), rng.uniform(), rng.uniform()));
    }
    const Vec3 bg(rng.uniform(), rng.uniform(), rng.uniform());
    const auto whole = composite(depths, dens, cols, bg);
    const int k = static_cast<int>(rng.uniform(0.0, n - 1.0 - 1e-9));
    const double mid = depths[k] + rng.uniform(0.1, 0.9) * (depths[k + 1] - depths[k]);
    depths.insert(depths.begin() + k + 1, mid);
    dens.insert(dens.begin() + k + 1, dens[k]);
    cols.insert(cols.begin() + k + 1, cols[k]);
    const auto split = composite(depths, dens, cols, bg);
    CHECK((whole.color - split.color).norm() < 1e-9);
  }
}

TEST_CASE("render_ray_backward: zero upstream and pose-invariant colour") {
  Rng rng(53);
  VoxelGrid g = smooth_grid(rng);
  std::vector<double> grad(g.num_params(), 0.0);
  Ray ray;
  ray.origin = Vec3(0.1, 0.2, -3.0);
  ray.direction = Vec3(0.05, -0.02, 1.0).normalized();
  const auto fwd = render_ray(g, ray, sampling());
  const auto out = render_ray_backward(g, ray, fwd, Vec3::Zero(), grad);
  CHECK(out.pose == Vec6::Zero());
  for (const double v : grad) CHECK(v == 0.0);

  VoxelGridConfig cfg;
  cfg.resolution = {4, 4, 4};
  cfg.bounds = {Vec3::Constant(-20), Vec3::Constant(20)};
  cfg.init_density = 0.7;
  cfg.init_color = 0.4;
  VoxelGrid constant(cfg);
  std::vector<double> g2(constant.num_params(), 0.0);
  const auto f2 = render_ray(constant, ray, sampling());
  const auto o2 = render_ray_backward(constant, ray, f2, Vec3(1, -2, 0.5), g2);
  CHECK(o2.pose.norm() < 1e-12);
}

TEST_CASE("render_ray_backward pose gradient matches finite differences") {
  Rng rng(54);
  const Intrinsics intr = small_intr();
  const SamplingConfig sc = sampling(32);
  const double h = 1e-5;
  int valid = 0;
  double worst = 0.0;
  for (int attempt = 0; valid < 120 && attempt < 1000; ++attempt) {
    const VoxelGrid g = smooth_grid(rng, 6);
    const Pose pose = look_at(Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), -3.0), rng.vec3(0.1));
    const double px = rng.uniform(2, 13), py = rng.uniform(2, 9);
    const Vec3 up = rng.vec3();
    auto loss = [&](const Pose& p) { return up.dot(render_ray(g, pixel_ray(intr, p, px, py), sc).color); };
    const Ray ray = pixel_ray(intr, pose, px, py);
    std::vector<double> grad(g.num_params(), 0.0);
    const auto out = render_ray_backward(g, ray, render_ray(g, ray, sc), up, grad);
    Vec6 fd;
    bool smooth = true;
    for (int c = 0; c < 6 && smooth; ++c) {
      smooth &= central_diff([&](double e) { return loss(exp_se3(Twist::Unit(c) * e) * pose); }, h, fd[c]);
    }
    if (!smooth) continue;
    const double err = rel_err(out.pose, fd, 1e-6);
    worst = std::max(worst, err);
    CHECK(err < 1e-3);
    ++valid;
  }
  CHECK(valid >= 100);
  MESSAGE("worst through-renderer pose gradient rel. err ", worst);
}

TEST_CASE("render_ray_backward field gradient matches finite differences") {
  Rng rng(55);
  const SamplingConfig sc = sampling(24);
  int valid = 0;
  for (int attempt = 0; valid < 100 && attempt < 400; ++attempt) {
    VoxelGrid g = smooth_grid(rng, 5);
    Ray ray;
    ray.origin = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), -3.0);
    ray.direction = Vec3(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 1.0).normalized();
    const Vec3 up = rng.vec3();
    std::vector<double> grad(g.num_params(), 0.0);
    render_ray_backward(g, ray, render_ray(g, ray, sc), up, grad);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (grad[i] != 0.0 && rng.uniform() < 0.2) idx.push_back(i);
    }
    if (idx.empty()) continue;
    Eigen::VectorXd ana(idx.size()), num(idx.size());
    auto p = g.params();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double saved = p[idx[k]];
      p[idx[k]] = saved + 1e-5;
      const double lp = up.dot(render_ray(g, ray, sc).color);
      p[idx[k]] = saved - 1e-5;
      const double lm = up.dot(render_ray(g, ray, sc).color);
      p[idx[k]] = saved;
      num[k] = (lp - lm) / 2e-5;
      ana[k] = grad[idx[k]];
    }
    CHECK(rel_err(ana, num) < 1e-4);
    ++valid;
  }
  CHECK(valid >= 100);
}

TEST_CASE("global-shutter images of trivial fields") {
  ConstantField empty;
  const Intrinsics intr = small_intr();
  const Image black = render_gs_image(empty, Pose::identity(), intr, sampling());
  for (const double v : black.data) CHECK(v == 0.0);
  ConstantField solid;
  solid.s = {Vec3(0.2, 0.5, 0.9), 50.0};
  const Image flat = render_gs_image(solid, Pose::identity(), intr, sampling());
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) CHECK((flat.at(x, y) - Vec3(0.2, 0.5, 0.9)).norm() < 1e-12);
  }
}

TEST_CASE("rolling-shutter images degenerate to global-shutter ones bitwise") {
  Rng rng(56);
  const VoxelGrid g = smooth_grid(rng);
  const Intrinsics intr = small_intr();
  const SamplingConfig sc = sampling();
  std::vector<Pose> knots;
  Pose p = look_at(Vec3(0.1, -0.1, -3.0), Vec3::Zero());
  for (int i = 0; i < 8; ++i) {
    knots.push_back(p);
    p = exp_se3(rng.twist(0.05, 0.05)) * p;
  }
  const Trajectory moving = Trajectory::cubic_dep(knots, 0.0, 0.1);
  const Trajectory still = Trajectory::cubic_dep(std::vector<Pose>(8, knots[2]), 0.0, 0.1);

  RsCamera zero_readout{intr, {0.0, {0.0, 0.1, 0.2}}};
  RsCamera rs{intr, {0.05 / intr.height, {0.0, 0.1, 0.2}}};
  for (std::size_t f = 0; f < 3; ++f) {
    const Image a = render_rs_image(g, moving, zero_readout, f, sc);
    const Image b = render_gs_image(g, moving.query_pose(zero_readout.timing.frame_starts[f]), intr, sc);
    CHECK(a == b);
    const Image c = render_rs_image(g, still, rs, f, sc);
    const Image d = render_gs_image(g, knots[2], intr, sc);
    CHECK(c == d);
    CHECK(render_rs_image(g, moving, rs, f, sc) != render_gs_image(g, moving.query_pose(0.1 * f), intr, sc));
  }
  RsCamera late{intr, {0.05 / intr.height, {0.0, 0.1, 0.6}}};
  CHECK_THROWS_AS(render_rs_image(g, moving, late, 2, sc), TimeOutOfRange);
}

TEST_CASE("multi-threaded rendering is bitwise identical") {
  Rng rng(57);
  const VoxelGrid g = smooth_grid(rng);
  SamplingConfig sc = sampling();
  sc.stratified = true;
  const Pose pose = look_at(Vec3(0, 0, -3), Vec3::Zero());
  CHECK(render_gs_image(g, pose, small_intr(), sc, 1) == render_gs_image(g, pose, small_intr(), sc, 4));
}
