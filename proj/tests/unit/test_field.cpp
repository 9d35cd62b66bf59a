#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rsrf/encoding.hpp"
#include "rsrf/error.hpp"
#include "rsrf/field.hpp"
#include "rsrf/mlp_field.hpp"
#include "rsrf/voxel_grid.hpp"
#include "test_util.hpp"

using namespace rsrf;
using rsrf::testing::Rng;
using rsrf::testing::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

struct Upstream {
  Vec3 color;
  double density;
};

double scalar_loss(const RadianceField& f, const Vec3& x, const Vec3& d, const Upstream& g) {
  const FieldSample s = f.query(x, d);
  return g.color.dot(s.color) + g.density * s.density;
}

// Central difference of a scalar function; returns false when the one-sided
// differences disagree, meaning a kink (ReLU switch or voxel face) lies in
// the stencil.
template <typename F>
bool central_diff(F&& f, double h, double& out) {
  const double f0 = f(0.0), fp = f(h), fm = f(-h);
  const double fwd = (fp - f0) / h;
  const double bwd = (f0 - fm) / h;
  out = (fp - fm) / (2 * h);
  return std::abs(fwd - bwd) <= 1e-3 * std::max({std::abs(fwd), std::abs(bwd), 1e-6});
}

VoxelGrid random_grid(Rng& rng) {
  VoxelGridConfig cfg;
  cfg.resolution = {5, 4, 6};
  cfg.bounds = {Vec3(-1, -0.5, 0), Vec3(1, 1, 2)};
  VoxelGrid g(cfg);
  for (double& p : g.params()) p = rng.uniform(-2.0, 2.0);
  return g;
}

MlpField random_mlp(Rng& rng, std::uint64_t seed, int pos_order = 6) {
  MlpConfig cfg;
  cfg.hidden = 16;
  cfg.color_hidden = 8;
  cfg.pos_order = pos_order;
  cfg.dir_order = 3;
  cfg.bounds = {Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  cfg.seed = seed;
  MlpField f(cfg);
  f.set_encoding_progress(rng.uniform(0.0, pos_order));
  return f;
}

// Checks parameter and spatial gradients of `f` at random points; returns the
// number of draws with every checked coordinate kink-free.
int check_gradients(TrainableField& f, Rng& rng, const Aabb& box, int wanted, double tol, double h) {
  int valid = 0;
  for (int attempt = 0; valid < wanted && attempt < 20 * wanted; ++attempt) {
    const Vec3 x = box.min + (box.max - box.min).cwiseProduct(Vec3(rng.uniform(0.02, 0.98), rng.uniform(0.02, 0.98), rng.uniform(0.02, 0.98)));
    const Vec3 d = rng.unit();
    const Upstream g{rng.vec3(), rng.normal()};
    std::vector<double> grad(f.num_params(), 0.0);
    const SpatialGrad sg = f.query_with_grads(x, d, g.color, g.density, grad);

    bool smooth = true;
    Vec3 fd_x, fd_d;
    for (int a = 0; a < 3 && smooth; ++a) {
      smooth &= central_diff([&](double e) { return scalar_loss(f, x + e * Vec3::Unit(a), d, g); }, h, fd_x[a]);
      smooth &= central_diff([&](double e) { return scalar_loss(f, x, d + e * Vec3::Unit(a), g); }, h, fd_d[a]);
    }
    // Parameters with a nonzero analytic gradient plus a few random ones.
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < grad.size() && idx.size() < 24; ++i) {
      if (grad[i] != 0.0 && rng.uniform() < 0.5) idx.push_back(i);
    }
    for (int r = 0; r < 8; ++r) idx.push_back(static_cast<std::size_t>(rng.uniform(0.0, grad.size() - 1.0)));
    Eigen::VectorXd ana(idx.size()), num(idx.size());
    auto params = f.params();
    for (std::size_t k = 0; k < idx.size() && smooth; ++k) {
      const std::size_t i = idx[k];
      const double saved = params[i];
      smooth &= central_diff(
          [&](double e) {
            params[i] = saved + e;
            const double v = scalar_loss(f, x, d, g);
            params[i] = saved;
            return v;
          },
          h, num[k]);
      ana[k] = grad[i];
    }
    if (!smooth) continue;
    CHECK(rel_err(sg.position, fd_x) < tol);
    CHECK(rel_err(sg.direction, fd_d) < tol);
    CHECK(rel_err(ana, num) < tol);
    ++valid;
  }
  return valid;
}

}  // namespace

TEST_CASE("positional encoding examples") {
  std::vector<double> out(encoded_size(1, 3));
  const double zero = 0.0;
  positional_encoding({&zero, 1}, 3, 3.0, out);
  CHECK(out == std::vector<double>{0, 0, 1, 0, 1, 0, 1});

  const double p = 0.37;
  positional_encoding({&p, 1}, 3, 0.0, out);
  CHECK(out[0] == p);
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i] == 0.0);

  const double half = 0.5;
  std::vector<double> one(3);
  positional_encoding({&half, 1}, 1, 1.0, one);
  CHECK(one[0] == 0.5);
  CHECK(one[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(one[2]) < 1e-15);

  // Layout: per coordinate, raw value then (sin, cos) per band at 2^k pi.
  const std::array<double, 2> q{0.1, -0.3};
  std::vector<double> two(encoded_size(2, 2));
  positional_encoding(q, 2, 2.0, two);
  CHECK(two[0] == 0.1);
  CHECK(two[3] == doctest::Approx(std::sin(2 * kPi * 0.1)));
  CHECK(two[5] == -0.3);
  CHECK(two[8] == doctest::Approx(std::sin(2 * kPi * -0.3)));
}

TEST_CASE("band window is continuous and monotone") {
  for (int k = 0; k < 4; ++k) {
    double prev = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double a = 4.0 * i / 4000.0;
      const double w = band_window(a, k);
      CHECK(w >= prev);
      CHECK(w - prev < 0.01);
      prev = w;
    }
    CHECK(band_window(4.0, k) == 1.0);
    CHECK(band_window(static_cast<double>(k), k) == 0.0);
    CHECK(band_window(k + 0.5, k) == doctest::Approx(0.5));
  }
}

TEST_CASE("positional encoding backward matches finite differences") {
  Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const std::array<double, 3> p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const int order = 5;
    const double alpha = rng.uniform(0, order);
    std::vector<double> up(encoded_size(3, order));
    for (double& u : up) u = rng.normal();
    std::array<double, 3> grad{0, 0, 0};
    positional_encoding_backward(p, order, alpha, up, grad);
    std::vector<double> e(up.size());
    Vec3 fd;
    for (int a = 0; a < 3; ++a) {
      auto q = p;
      double v[2];
      for (int s = 0; s < 2; ++s) {
        q[a] = p[a] + (s ? -1e-6 : 1e-6);
        positional_encoding(q, order, alpha, e);
        v[s] = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) v[s] += up[j] * e[j];
      }
      fd[a] = (v[0] - v[1]) / 2e-6;
    }
    CHECK(rel_err(Vec3(grad[0], grad[1], grad[2]), fd) < 1e-7);
  }
}

TEST_CASE("voxel grid query examples") {
  VoxelGridConfig cfg;
  cfg.resolution = {4, 4, 4};
  cfg.bounds = {Vec3::Zero(), Vec3::Ones()};
  cfg.init_density = 2.5;
  cfg.init_color = 0.3;
  VoxelGrid g(cfg);
  Rng rng(42);
  for (int i = 0; i < 50; ++i) {
    const auto s = g.query(Vec3(rng.uniform(), rng.uniform(), rng.uniform()), rng.unit());
    CHECK(s.density == doctest::Approx(2.5).epsilon(1e-12));
    CHECK((s.color - Vec3::Constant(0.3)).norm() < 1e-12);
  }
  const auto out = g.query(Vec3(1.01, 0.5, 0.5), Vec3::UnitZ());
  CHECK(out.density == 0.0);
  CHECK(out.color == Vec3::Zero());

  // Centre of the first cell: every corner weighs 1/8.
  double mean = 0.0;
  for (int c = 0; c < 8; ++c) {
    const double pre = rng.uniform(-3, 3);
    g.params()[g.vertex_index(c & 1, (c >> 1) & 1, (c >> 2) & 1) * 4 + 3] = pre;
    mean += pre / 8.0;
  }
  const double cell = 1.0 / 3.0;
  CHECK(g.query(Vec3::Constant(cell / 2), Vec3::UnitZ()).density == doctest::Approx(softplus(mean)).epsilon(1e-14));

  VoxelGrid::Corners cn;
  for (int i = 0; i < 50; ++i) {
    REQUIRE(g.corners(Vec3(rng.uniform(), rng.uniform(), rng.uniform()), cn));
    double sum = 0.0;
    for (const double w : cn.weight) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("voxel gradients: hand-checked chain rule and zero upstream") {
  VoxelGridConfig cfg;
  cfg.resolution = {3, 3, 3};
  cfg.bounds = {Vec3::Zero(), Vec3::Ones()};
  cfg.init_color = 0.7;
  VoxelGrid g(cfg);
  std::vector<double> grad(g.num_params(), 0.0);
  const Vec3 x(0.2, 0.3, 0.45);
  g.query_with_grads(x, Vec3::UnitZ(), Vec3::Zero(), 0.0, grad);
  for (const double v : grad) CHECK(v == 0.0);

  const Vec3 gc(0.5, -1.0, 2.0);
  g.query_with_grads(x, Vec3::UnitZ(), gc, 0.0, grad);
  VoxelGrid::Corners cn;
  REQUIRE(g.corners(x, cn));
  const double sprime = 0.7 * 0.3;
  for (int c = 0; c < 8; ++c) {
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(grad[cn.index[c] * 4 + ch] == doctest::Approx(cn.weight[c] * gc[ch] * sprime).epsilon(1e-12));
    }
    CHECK(grad[cn.index[c] * 4 + 3] == 0.0);
  }
}

TEST_CASE("voxel gradients match central finite differences") {
  Rng rng(43);
  int total = 0;
  for (int trial = 0; trial < 10; ++trial) {
    VoxelGrid g = random_grid(rng);
    total += check_gradients(g, rng, g.config().bounds, 12, 1e-4, 1e-4);
  }
  CHECK(total >= 100);
}

TEST_CASE("MLP gradients match central finite differences") {
  Rng rng(44);
  int total = 0;
  for (int trial = 0; trial < 10; ++trial) {
    MlpField f = random_mlp(rng, 100 + trial);
    total += check_gradients(f, rng, {Vec3::Constant(-1.2), Vec3::Constant(1.2)}, 12, 1e-4, 1e-4);
  }
  CHECK(total >= 100);
}

TEST_CASE("MLP density ignores the view direction and stays non-negative") {
  Rng rng(45);
  MlpField f = random_mlp(rng, 7, 10);
  for (double& p : f.params()) p *= 3.0;
  for (int i = 0; i < 200; ++i) {
    const Vec3 x = rng.vec3();
    const auto a = f.query(x, rng.unit());
    const auto b = f.query(x, rng.unit());
    CHECK(a.density == b.density);
    CHECK(a.density >= 0.0);
    for (int c = 0; c < 3; ++c) {
      CHECK(a.color[c] >= 0.0);
      CHECK(a.color[c] <= 1.0);
    }
  }
}

TEST_CASE("MLP coarse-to-fine progress gates the high bands") {
  Rng rng(46);
  MlpField f = random_mlp(rng, 9, 8);
  CHECK(f.max_encoding_progress() == 8.0);
  const Vec3 x(0.3, -0.2, 0.1);
  f.set_encoding_progress(8.0);
  const auto full = f.query(x, Vec3::UnitZ());
  f.set_encoding_progress(0.0);
  const auto coarse = f.query(x, Vec3::UnitZ());
  CHECK(full.density != coarse.density);
  // At zero progress a tiny move only changes the raw-coordinate input.
  const auto near = f.query(x + Vec3(1e-7, 0, 0), Vec3::UnitZ());
  CHECK(std::abs(near.density - coarse.density) < 1e-5);
}

TEST_CASE("queries are deterministic and checkpoints round-trip bit-exactly") {
  Rng rng(47);
  const auto dir = std::filesystem::temp_directory_path() / "rsrf_test_field";
  std::filesystem::create_directories(dir);
  VoxelGrid g = random_grid(rng);
  MlpField m = random_mlp(rng, 3);
  for (TrainableField* f : std::initializer_list<TrainableField*>{&g, &m}) {
    save_field(dir / "f.ckpt", *f);
    const auto back = load_field(dir / "f.ckpt");
    CHECK(back->backend() == f->backend());
    CHECK(back->encoding_progress() == f->encoding_progress());
    REQUIRE(back->num_params() == f->num_params());
    CHECK(std::equal(back->params().begin(), back->params().end(), f->params().begin()));
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = rng.vec3(0.5), d = rng.unit();
      const auto a = f->query(x, d), b = back->query(x, d);
      CHECK(a.density == b.density);
      CHECK(a.color == b.color);
    }
    const auto cl = f->clone();
    CHECK(std::equal(cl->params().begin(), cl->params().end(), f->params().begin()));
  }
  std::ofstream(dir / "bad.ckpt") << "{\"format\":\"rsrf-field\",\"backend\":\"voxel\"}\n";
  CHECK_THROWS_AS(load_field(dir / "bad.ckpt"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid voxel configuration is rejected") {
  VoxelGridConfig cfg;
  cfg.resolution = {1, 4, 4};
  CHECK_THROWS_AS(VoxelGrid{cfg}, ConfigError);
  cfg.resolution = {4, 4, 4};
  cfg.bounds = {Vec3::Zero(), Vec3(1, 0, 1)};
  CHECK_THROWS_AS(VoxelGrid{cfg}, ConfigError);
}
