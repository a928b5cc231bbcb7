#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fp3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Failure category, used by the CLI to pick a distinct exit code per stage.
enum class ErrorCode {
  io,
  parse,
  validation,
  degenerate_neighborhood,
  degenerate_range,
  degenerate_mask,
  geometry_mismatch,
  insufficient_pairs,
  degenerate_points,
  empty_region,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wrap an angle to [0, 2*pi).
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

/// Signed smallest difference a-b, in (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d <= -kPi) d += 2.0 * kPi;
  if (d > kPi) d -= 2.0 * kPi;
  return d;
}

/// Linear-interpolation percentile of an unsorted sample, p in [0, 100].
double percentile(std::vector<double> values, double p);

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace fp3d
