#pragma once

#include <string>

#include "fp3d/common.hpp"
#include "fp3d/point_cloud.hpp"

namespace fp3d {

/// Similarity transform p' = k * (R * p + t): uniform scale k > 0, proper
/// rotation R, translation t in mm.
struct ScaledRigidTransform3D {
  double k = 1.0;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return k * (R * p + t); }

  ScaledRigidTransform3D inverse() const {
    ScaledRigidTransform3D inv;
    inv.k = 1.0 / k;
    inv.R = R.transpose();
    inv.t = -k * (R.transpose() * t);
    return inv;
  }

  /// Orthonormality within 1e-9, det = +1 within 1e-9, k > 0.
  void validate() const;

  static ScaledRigidTransform3D identity() { return {}; }
};

Mat3 rotation_x(double radians);
Mat3 rotation_y(double radians);
Mat3 rotation_z(double radians);

/// Angle of the rotation taking a to b, in radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Maps every point through T and revalidates the cloud invariants.
FingerPointCloud apply_transform(const FingerPointCloud& cloud,
                                 const ScaledRigidTransform3D& T);

/// Translates all z coordinates so their mean is zero. Unfolding depends on z
/// only through differences, so this is output-neutral but keeps the working
/// frame near the sensor plane.
FingerPointCloud recenter_z(const FingerPointCloud& cloud);

std::string transform_to_json(const ScaledRigidTransform3D& T);
ScaledRigidTransform3D transform_from_json(const std::string& text);
void save_transform(const ScaledRigidTransform3D& T, const std::string& path);
ScaledRigidTransform3D load_transform(const std::string& path);

}  // namespace fp3d
