#pragma once

#include <span>

#include "fp3d/common.hpp"
#include "fp3d/point_cloud.hpp"
#include "fp3d/spatial_index.hpp"

namespace fp3d {

/// Plane fit of a point neighborhood: centroid plus the unit normal of the
/// smallest covariance eigen-direction. The normal sign is fixed globally:
/// positive z component, ties broken toward +y, then +x.
struct LocalFrame {
  Vec3 centroid = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double radius = 0.0;       // neighborhood radius used to gather the points, mm
  std::size_t neighbor_count = 0;
};

inline constexpr std::size_t kMinFramePoints = 10;

/// Neighborhood of p: every cloud point at distance < r (strict), p included.
std::vector<std::uint32_t> neighborhood(const FingerPointCloud& cloud, const SpatialIndex& index,
                                        const Vec3& p, double r);

/// PCA plane fit of the given points. Requires >= 10 points, not all
/// coincident; throws Error(degenerate_neighborhood) when the spread is
/// collinear (relative mid/max eigenvalue ratio below 1e-12).
LocalFrame pca_frame(const FingerPointCloud& cloud, std::span<const std::uint32_t> member_ids,
                     double radius);

LocalFrame pca_frame(std::span<const Vec3> members, double radius);

}  // namespace fp3d
