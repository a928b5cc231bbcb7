#pragma once

// Test-side helpers and independent oracles. Everything here is deliberately
// naive (brute force, dense quadrature) and must stay independent of the
// library code paths it checks.

#include <cmath>
#include <random>
#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/image.hpp"
#include "fp3d/minutia.hpp"
#include "fp3d/point_cloud.hpp"

namespace testsupport {

using fp3d::Vec2;
using fp3d::Vec3;

/// O(n) reference for radius queries: strict inequality, original order.
inline std::vector<std::uint32_t> brute_force_neighborhood(const fp3d::FingerPointCloud& cloud,
                                                           const Vec3& p, double r) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    if ((cloud.points[i] - p).norm() < r) out.push_back(i);
  }
  return out;
}

/// Regular grid on the plane z = a*x + b*y + c, spacing mm.
inline fp3d::FingerPointCloud plane_grid(int nx, int ny, double spacing, double a = 0.0,
                                         double b = 0.0, double c = 0.0) {
  fp3d::FingerPointCloud cloud;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double x = ix * spacing, y = iy * spacing;
      cloud.points.emplace_back(x, y, a * x + b * y + c);
    }
  }
  return cloud;
}

/// Spherical cap of radius R up to polar angle theta_c, sampled on an (x, y)
/// grid: z = sqrt(R^2 - x^2 - y^2) over x^2 + y^2 <= (R sin theta_c)^2.
inline fp3d::FingerPointCloud sphere_cap_grid(double radius, double theta_c, double spacing) {
  fp3d::FingerPointCloud cloud;
  const double rim = radius * std::sin(theta_c);
  const int n = static_cast<int>(std::floor(rim / spacing));
  for (int iy = -n; iy <= n; ++iy) {
    for (int ix = -n; ix <= n; ++ix) {
      const double x = ix * spacing, y = iy * spacing;
      const double r2 = x * x + y * y;
      if (r2 > rim * rim) continue;
      cloud.points.emplace_back(x, y, std::sqrt(radius * radius - r2));
    }
  }
  return cloud;
}

/// Dense polyline arc length of a sampled height profile between two columns
/// (inclusive), on a lattice with the given step.
inline double polyline_arc_length(const std::vector<double>& z, std::size_t from, std::size_t to,
                                  double step) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) {
    const double dz = z[i + 1] - z[i];
    acc += std::sqrt(step * step + dz * dz);
  }
  return acc;
}

/// Uniform random minutiae constellation inside a box.
inline std::vector<fp3d::Minutia> random_constellation(std::mt19937_64& rng, int count,
                                                       double width, double height,
                                                       double min_sep = 12.0) {
  std::uniform_real_distribution<double> ux(0.0, width), uy(0.0, height),
      ut(0.0, 2.0 * fp3d::kPi);
  std::vector<fp3d::Minutia> out;
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard++ < 100000) {
    fp3d::Minutia m;
    m.x = ux(rng);
    m.y = uy(rng);
    m.theta = ut(rng);
    bool ok = true;
    for (const auto& o : out) {
      if (std::hypot(m.x - o.x, m.y - o.y) < min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(m);
  }
  return out;
}

/// Rigidly moves a constellation: rotation phi about the origin, then a
/// translation; directions rotate with it.
inline std::vector<fp3d::Minutia> move_constellation(const std::vector<fp3d::Minutia>& in,
                                                     double phi, double tx, double ty) {
  std::vector<fp3d::Minutia> out = in;
  const double c = std::cos(phi), s = std::sin(phi);
  for (auto& m : out) {
    const double x = c * m.x - s * m.y + tx;
    const double y = s * m.x + c * m.y + ty;
    m.x = x;
    m.y = y;
    m.theta = fp3d::wrap_angle(m.theta + phi);
  }
  return out;
}

}  // namespace testsupport
