#include <doctest.h>

#include <chrono>
#include <cmath>

#include "fp3d/synthetic.hpp"
#include "fp3d/transform3d.hpp"

using namespace fp3d;

TEST_CASE("zero-amplitude points lie exactly on the analytic surface") {
  SyntheticFingerSpec spec;
  spec.shape = BaseShape::half_cylinder;
  spec.radius_x = spec.radius_z = 8.0;
  spec.length = 10.0;
  spec.ridge_amplitude = 0.0;
  spec.noise_sigma = 0.0;
  spec.sampling_density = 60.0;
  const SyntheticFinger finger = generate(spec);
  double max_dev = 0.0;
  for (const auto& p : finger.cloud.points) {
    const double r = std::hypot(p.x(), p.z());
    max_dev = std::max(max_dev, std::abs(r - 8.0));
  }
  CHECK(max_dev < 1e-9);
}

TEST_CASE("half-cylinder ground truth spans pi*R across the section") {
  SyntheticFingerSpec spec;
  spec.shape = BaseShape::half_cylinder;
  spec.radius_x = spec.radius_z = 8.0;
  spec.length = 10.0;
  spec.ridge_amplitude = 0.0;
  spec.sampling_density = 60.0;
  spec.sample_jitter = 0.0;
  const SyntheticFinger finger = generate(spec);
  CHECK(finger.section_arc_length == doctest::Approx(kPi * 8.0).epsilon(1e-9));
  double lo = 0.0, hi = 0.0;
  for (double s : finger.surface_s) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  // samples live strictly inside the open section
  CHECK(hi - lo <= kPi * 8.0);
  CHECK(hi - lo > kPi * 8.0 - 0.3);
}

TEST_CASE("surface coordinates are isometric against quadrature") {
  // elliptic section: compare stored s against dense numeric arc length
  SyntheticFingerSpec spec;
  spec.shape = BaseShape::elliptic_cylinder;
  spec.radius_x = 9.0;
  spec.radius_z = 6.0;
  spec.length = 8.0;
  spec.ridge_amplitude = 0.0;
  spec.sampling_density = 40.0;
  spec.sample_jitter = 0.0;
  const SyntheticFinger finger = generate(spec);

  auto arc_quadrature = [&](double alpha) {
    // Richardson-free dense midpoint rule, 200k panels
    const int n = 200000;
    const double h = alpha / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = (i + 0.5) * h;
      acc += h * std::hypot(9.0 * std::cos(a), 6.0 * std::sin(a));
    }
    return acc;
  };

  // pick the widest row of samples and check a handful
  for (double alpha : {0.3, 0.9, 1.4}) {
    const double expect = arc_quadrature(alpha);
    // find the sample closest to this alpha on the first station
    double best_err = 1e9;
    for (std::size_t i = 0; i < finger.cloud.size(); ++i) {
      if (finger.surface_t[i] > 0.3) continue;
      const double x = 9.0 * std::sin(alpha);
      if (std::abs(finger.cloud.points[i].x() - x) < 0.15) {
        best_err = std::min(best_err, std::abs(finger.surface_s[i] - expect) / expect);
      }
    }
    CHECK(best_err < 2e-2);  // nearest-sample discretization dominates
  }

  // exact check: the stored table itself against quadrature
  const double full = arc_quadrature(kPi / 2.0);
  CHECK(finger.section_arc_length / 2.0 == doctest::Approx(full).epsilon(1e-6));
}

TEST_CASE("posed generation equals apply_transform of the identity run") {
  SyntheticFingerSpec spec;
  spec.shape = BaseShape::capped_finger;
  spec.radius_x = 8.0;
  spec.radius_z = 6.5;
  spec.length = 20.0;
  spec.sampling_density = 40.0;
  spec.random_minutiae = 8;
  spec.seed = 21;

  ScaledRigidTransform3D pose;
  pose.k = 1.05;
  pose.R = rotation_y(deg2rad(25.0)) * rotation_z(deg2rad(10.0));
  pose.t = Vec3(1.0, -2.0, 3.0);

  SyntheticFingerSpec posed = spec;
  posed.pose = pose;

  const SyntheticFinger base = generate(spec);
  const SyntheticFinger moved = generate(posed);
  REQUIRE(base.cloud.size() == moved.cloud.size());
  const FingerPointCloud mapped = apply_transform(base.cloud, pose);
  double max_err = 0.0;
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    max_err = std::max(max_err, (mapped.points[i] - moved.cloud.points[i]).norm());
  }
  CHECK(max_err < 1e-9);

  REQUIRE(base.minutiae.size() == moved.minutiae.size());
  for (std::size_t i = 0; i < base.minutiae.size(); ++i) {
    CHECK((pose.apply(base.minutiae[i].position) - moved.minutiae[i].position).norm() < 1e-9);
  }
}

TEST_CASE("default finger reaches 100k points in bounded time") {
  SyntheticFingerSpec spec;  // defaults: capped finger, 450 pts/mm^2
  spec.random_minutiae = 30;
  spec.seed = 4;
  const auto t0 = std::chrono::steady_clock::now();
  const SyntheticFinger finger = generate(spec);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(finger.cloud.size() >= 100000);
  CHECK(secs < 5.0);
}

TEST_CASE("spec JSON round-trips") {
  SyntheticFingerSpec spec;
  spec.shape = BaseShape::elliptic_cylinder;
  spec.radius_x = 7.5;
  spec.radius_z = 6.0;
  spec.random_minutiae = 12;
  spec.seed = 99;
  spec.pose.R = rotation_y(0.4);
  const SyntheticFingerSpec back = spec_from_json(spec_to_json(spec));
  CHECK(back.shape == spec.shape);
  CHECK(back.radius_x == doctest::Approx(spec.radius_x));
  CHECK(back.seed == spec.seed);
  CHECK((back.pose.R - spec.pose.R).norm() < 1e-12);
}

TEST_CASE("spec validation rejects bad parameters") {
  SyntheticFingerSpec spec;
  spec.sampling_density = 10.0;
  CHECK_THROWS_AS(generate(spec), Error);
  spec = {};
  spec.ridge_amplitude = 5.0;  // >= 0.2 * radius
  CHECK_THROWS_AS(generate(spec), Error);
}
