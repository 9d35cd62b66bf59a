#include <cmath>

#include "doctest.h"
#include "rsrf/camera.hpp"
#include "rsrf/error.hpp"
#include "test_util.hpp"

using namespace rsrf;

namespace {
Intrinsics intr() { return {50.0, 40.0, 31.5, 23.0, 64, 48}; }
}  // namespace

TEST_CASE("pixel_ray examples") {
  const Intrinsics k = intr();
  // Pixel whose centre is the principal point.
  Ray r = pixel_ray(k, Pose::identity(), k.cx - 0.5, k.cy - 0.5);
  CHECK((r.direction - Vec3(0, 0, 1)).norm() < 1e-15);
  r = pixel_ray(k, Pose::identity(), k.cx + k.fx - 0.5, k.cy - 0.5);
  CHECK((r.direction - Vec3(1, 0, 1).normalized()).norm() < 1e-15);
  const Vec3 t(0.3, -2.0, 5.0);
  const Ray moved = pixel_ray(k, Pose::from_translation(t), 10, 7);
  const Ray still = pixel_ray(k, Pose::identity(), 10, 7);
  CHECK(moved.origin == t);
  CHECK(moved.direction == still.direction);
  CHECK(moved.px == 10.0);
  CHECK(moved.py == 7.0);
}

TEST_CASE("rays under identity pose point forward with unit length") {
  const Intrinsics k = intr();
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Ray r = pixel_ray(k, Pose::identity(), x, y);
      CHECK(r.direction.z() > 0.0);
      CHECK(std::abs(r.direction.norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("rays follow the camera rotation") {
  rsrf::testing::Rng rng(31);
  const Intrinsics k = intr();
  for (int i = 0; i < 20; ++i) {
    const Pose p = rng.pose();
    const Ray r = pixel_ray(k, p, 5, 40);
    // Project back through K with the inverse pose.
    const Vec3 c = p.rotation().transpose() * r.direction;
    CHECK(k.fx * c.x() / c.z() + k.cx == doctest::Approx(5.5).epsilon(1e-12));
    CHECK(k.fy * c.y() / c.z() + k.cy == doctest::Approx(40.5).epsilon(1e-12));
  }
}

TEST_CASE("row_time examples") {
  RsTiming t{100e-6, {0.25, 0.35}};
  CHECK(row_time(t, 0, 0) == 0.25);
  CHECK(row_time(t, 0, 10) == doctest::Approx(0.25 + 1e-3).epsilon(1e-14));
  CHECK(row_time(t, 1, 3) == doctest::Approx(0.35 + 3e-4).epsilon(1e-14));
  CHECK_THROWS_AS(row_time(t, 2, 0), IndexOutOfRange);
  t.line_readout = 0.0;
  for (int r = 0; r < 48; ++r) CHECK(row_time(t, 1, r) == 0.35);

  RsCamera cam{intr(), {1e-3, {0.0, 0.1, 0.2}}};
  double prev = -1.0;
  for (int r = 0; r < 48; ++r) {
    const double tr = cam.row_time(1, r);
    CHECK(tr > prev);
    prev = tr;
  }
  CHECK_THROWS_AS(cam.row_time(0, 48), IndexOutOfRange);
  CHECK(cam.readout_span() == doctest::Approx(0.048));
}

TEST_CASE("timing validation") {
  CHECK_NOTHROW((RsTiming{0.1 / 48, {0.0, 0.1}}.validate(48)));
  CHECK_THROWS_AS((RsTiming{0.11 / 48, {0.0, 0.1}}.validate(48)), ConfigError);
  CHECK_THROWS_AS((RsTiming{1e-4, {0.0, 0.0}}.validate(48)), ConfigError);
  CHECK_THROWS_AS((RsTiming{-1e-4, {0.0}}.validate(48)), ConfigError);
  CHECK_THROWS_AS((Intrinsics{0.0, 1.0, 0, 0, 4, 4}.validate()), ConfigError);
  CHECK_THROWS_AS((Intrinsics{1.0, 1.0, 0, 0, 0, 4}.validate()), ConfigError);
  CHECK((RsTiming{0.0, {0.0, 0.1, 0.2}}.uniform()));
  CHECK_FALSE((RsTiming{0.0, {0.0, 0.1, 0.25}}.uniform()));
}

TEST_CASE("ray pose gradient matches finite differences") {
  rsrf::testing::Rng rng(32);
  const Intrinsics k = intr();
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Pose p = rng.pose();
    const Vec3 go = rng.vec3();
    const Vec3 gd = rng.vec3();
    const double px = rng.uniform(0, 63), py = rng.uniform(0, 47);
    auto loss = [&](const Pose& q) {
      const Ray r = pixel_ray(k, q, px, py);
      return go.dot(r.origin) + gd.dot(r.direction);
    };
    Vec6 fd;
    for (int c = 0; c < 6; ++c) {
      fd[c] = (loss(exp_se3(Twist::Unit(c) * h) * p) - loss(exp_se3(-Twist::Unit(c) * h) * p)) / (2 * h);
    }
    const Ray r = pixel_ray(k, p, px, py);
    CHECK(rsrf::testing::rel_err(ray_pose_gradient(r, go, gd), fd) < 1e-7);
  }
}
