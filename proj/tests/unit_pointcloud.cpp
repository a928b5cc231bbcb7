#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

#include "fp3d/local_frame.hpp"
#include "fp3d/point_cloud.hpp"
#include "fp3d/spatial_index.hpp"
#include "fp3d/synthetic.hpp"
#include "fp3d/transform3d.hpp"
#include "support.hpp"

using namespace fp3d;
using testsupport::brute_force_neighborhood;
using testsupport::plane_grid;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load rejects tiny clouds with a point-count message") {
  const auto path = write_temp("tiny.xyz", "0 0 0\n1 0 0\n0 1 0\n");
  try {
    load_point_cloud(path, CloudFormat::xyz_text);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    CHECK(std::string(e.what()).find("fewer than 100 points") != std::string::npos);
  }
}

TEST_CASE("load rejects non-finite coordinates naming the line") {
  std::string body;
  for (int i = 0; i < 50; ++i) body += std::to_string(i) + " 0 0\n";
  body += "1 nan 2\n";
  const auto path = write_temp("nan.xyz", body);
  try {
    load_point_cloud(path, CloudFormat::xyz_text);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":51") != std::string::npos);
  }
}

TEST_CASE("load rejects duplicate points") {
  FingerPointCloud cloud = plane_grid(12, 12, 1.0);
  cloud.points.push_back(cloud.points[57]);
  CHECK_THROWS_AS(validate_cloud(cloud), Error);
}

TEST_CASE("synthetic half-cylinder round-trips through PLY and XYZ") {
  SyntheticFingerSpec spec;
  spec.shape = BaseShape::half_cylinder;
  spec.radius_x = spec.radius_z = 8.0;
  spec.length = 16.0;
  spec.ridge_amplitude = 0.0;
  spec.sampling_density = 130.0;  // ~50k points
  spec.sample_jitter = 0.0;
  const SyntheticFinger finger = generate(spec);
  CHECK(finger.cloud.size() > 45000);

  const Vec3 lo = finger.cloud.bbox_min();
  const Vec3 hi = finger.cloud.bbox_max();
  CHECK(hi.x() - lo.x() == doctest::Approx(16.0).epsilon(0.01));  // 2R across
  CHECK(hi.y() - lo.y() == doctest::Approx(16.0).epsilon(0.01));  // length
  CHECK(hi.z() == doctest::Approx(8.0).epsilon(0.01));

  for (const char* name : {"roundtrip.ply", "roundtrip.xyz"}) {
    const std::string path = std::string("/tmp/") + name;
    const CloudFormat fmt = std::string(name).ends_with(".ply") ? CloudFormat::ply_ascii
                                                                : CloudFormat::xyz_text;
    save_point_cloud(finger.cloud, path, fmt);
    const FingerPointCloud back = load_point_cloud(path, fmt);
    REQUIRE(back.size() == finger.cloud.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
      max_err = std::max(max_err, (back.points[i] - finger.cloud.points[i]).norm());
    }
    CHECK(max_err < 1e-6);  // %.9g text precision
  }
}

TEST_CASE("neighborhood on a regular grid is the 4-neighborhood plus center") {
  FingerPointCloud cloud = plane_grid(11, 11, 1.0);
  const SpatialIndex index(cloud);
  const Vec3 p = cloud.points[5 * 11 + 5];
  // radius between the axis spacing (1) and the diagonal (sqrt 2): the four
  // axis neighbors plus the center
  auto got = neighborhood(cloud, index, p, 1.2);
  CHECK(got.size() == 5);

  // at 1.5 the four diagonals at sqrt(2) enter as well
  CHECK(neighborhood(cloud, index, p, 1.5).size() == 9);

  // radius below the grid spacing: the point alone
  auto self_only = neighborhood(cloud, index, p, 0.5);
  REQUIRE(self_only.size() == 1);
  CHECK(cloud.points[self_only[0]] == p);

  // strictness: r equal to the spacing excludes the ring
  auto strict = neighborhood(cloud, index, p, 1.0);
  CHECK(strict.size() == 1);
}

TEST_CASE("neighborhood matches the brute-force oracle on random clouds") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  FingerPointCloud cloud;
  for (int i = 0; i < 10000; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng) * 0.2);
  const SpatialIndex index(cloud);
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
  std::uniform_real_distribution<double> radius(0.05, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 p = cloud.points[pick(rng)];
    const double r = radius(rng);
    auto got = index.radius_query(p, r);
    auto expect = brute_force_neighborhood(cloud, p, r);
    std::sort(got.begin(), got.end());
    REQUIRE(got.size() == expect.size());
    CHECK(std::equal(got.begin(), got.end(), expect.begin()));
  }
}

TEST_CASE("pca_frame on exact planes") {
  SUBCASE("z = 3") {
    FingerPointCloud cloud = plane_grid(5, 4, 1.0, 0.0, 0.0, 3.0);
    const auto frame = pca_frame(cloud.points, 2.0);
    CHECK(frame.centroid.z() == doctest::Approx(3.0));
    CHECK(frame.normal.isApprox(Vec3(0, 0, 1), 1e-12));
    CHECK(frame.neighbor_count == 20);
  }
  SUBCASE("x + z = 0 up to the sign convention") {
    // points satisfy z = -x; the normal is (1,0,1)/sqrt(2) after orienting
    // toward +z
    FingerPointCloud cloud = plane_grid(5, 4, 1.0, -1.0, 0.0, 0.0);
    const auto frame = pca_frame(cloud.points, 2.0);
    const Vec3 expected = Vec3(1, 0, 1).normalized();
    CHECK(frame.normal.isApprox(expected, 1e-9));
    CHECK(frame.normal.z() > 0.0);
  }
}

TEST_CASE("pca_frame recovers a noisy plane within a degree") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  const Vec3 truth = Vec3(0.3, -0.2, 1.0).normalized();
  // basis of the plane
  const Vec3 e1 = truth.cross(Vec3::UnitX()).normalized();
  const Vec3 e2 = truth.cross(e1).normalized();
  FingerPointCloud cloud;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 400; ++i) {
    cloud.points.push_back(u(rng) * e1 + u(rng) * e2 + noise(rng) * truth);
  }
  const auto frame = pca_frame(cloud.points, 2.0);
  const double angle = std::acos(std::clamp(std::abs(frame.normal.dot(truth)), 0.0, 1.0));
  CHECK(rad2deg(angle) < 1.0);
}

TEST_CASE("pca_frame rejects collinear and undersized neighborhoods") {
  FingerPointCloud line;
  for (int i = 0; i < 30; ++i) line.points.emplace_back(i * 0.1, 2 * i * 0.1, 0.0);
  CHECK_THROWS_AS(pca_frame(line.points, 1.0), Error);

  FingerPointCloud small = plane_grid(3, 3, 1.0);
  CHECK_THROWS_AS(pca_frame(small.points, 1.0), Error);
}

TEST_CASE("pca_frame residual is minimal along the normal direction") {
  SyntheticFingerSpec spec;
  spec.shape = BaseShape::half_cylinder;
  spec.radius_x = spec.radius_z = 8.0;
  spec.length = 6.0;
  spec.ridge_amplitude = 0.02;
  spec.sampling_density = 120.0;
  spec.seed = 3;
  const SyntheticFinger finger = generate(spec);
  const SpatialIndex index(finger.cloud);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, finger.cloud.size() - 1);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 p = finger.cloud.points[pick(rng)];
    auto ids = index.radius_query(p, 1.0);
    if (ids.size() < kMinFramePoints) continue;
    const auto frame = pca_frame(finger.cloud, ids, 1.0);

    // mean |(x - c) . d| along the PCA normal vs. two orthogonal directions
    const Vec3 d1 = frame.normal.cross(Vec3::UnitX()).normalized();
    const Vec3 d2 = frame.normal.cross(d1).normalized();
    double rn = 0, r1 = 0, r2 = 0;
    for (auto id : ids) {
      const Vec3 d = finger.cloud.points[id] - frame.centroid;
      rn += std::abs(d.dot(frame.normal));
      r1 += std::abs(d.dot(d1));
      r2 += std::abs(d.dot(d2));
    }
    CHECK(rn <= r1 + 1e-12);
    CHECK(rn <= r2 + 1e-12);
  }
}

TEST_CASE("pca_frame is rigid-motion equivariant up to sign") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 60; ++i) {
    pts.emplace_back(u(rng), u(rng), 0.3 * u(rng) * u(rng));
  }
  const auto base = pca_frame(pts, 1.0);

  const Mat3 rot = rotation_z(0.7) * rotation_x(0.3);
  std::vector<Vec3> moved;
  for (const auto& p : pts) moved.push_back(rot * p + Vec3(5, -2, 1));
  const auto frame = pca_frame(moved, 1.0);

  const Vec3 mapped = rot * base.normal;
  const double align = std::abs(mapped.dot(frame.normal));
  CHECK(align == doctest::Approx(1.0).epsilon(1e-9));
}
