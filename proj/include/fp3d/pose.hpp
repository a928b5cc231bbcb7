#pragma once

#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/minutia.hpp"
#include "fp3d/point_cloud.hpp"
#include "fp3d/spectral.hpp"
#include "fp3d/transform3d.hpp"
#include "fp3d/unfold.hpp"

namespace fp3d {

/// Matched 3D cloud points (mm) and flat-fingerprint positions (mm, in the
/// flat sensor plane).
struct Lifted3D2DPairs {
  std::vector<Vec3> cloud_points;
  std::vector<Vec2> flat_points;

  std::size_t size() const { return cloud_points.size(); }
};

inline constexpr std::size_t kMinPosePairs = 6;

/// Lifts 2D correspondences to 3D<->2D pairs: the unfolded-side minutia reads
/// its 3D point from the unfold map's provenance at its pixel; the flat-side
/// position converts to mm via the pitch. Minutiae on invalid pixels are
/// dropped (indices reported through dropped, when given); fewer than 6
/// surviving pairs is an error.
Lifted3D2DPairs lift_correspondences(const CorrespondenceSet& matches, const UnfoldMap& map,
                                     const FingerPointCloud& cloud,
                                     const std::vector<Minutia>& unfolded_minutiae,
                                     const std::vector<Minutia>& flat_minutiae,
                                     double flat_pitch_mm,
                                     std::vector<int>* dropped = nullptr);

struct PoseEstimateConfig {
  bool trim_outliers = false;   // one round: drop pairs beyond 3x median residual, refit
  int max_iterations = 100;     // Gauss-Newton
  double tolerance = 1e-14;     // relative cost improvement stop
};

/// Scaled-orthographic pose: minimizes the mean squared distance between the
/// flat positions and the (x,y) part of k*(R*P + t). Weak-perspective
/// factorization initializes; Gauss-Newton with backtracking refines, so the
/// refined residual never exceeds the initializer's. t_z is unobservable
/// under orthographic projection and fixed at 0.
ScaledRigidTransform3D estimate_pose(const Lifted3D2DPairs& pairs,
                                     const PoseEstimateConfig& config = {});

/// Orthographic drop of the model: (x,y) of k*(R*p + t).
Vec2 project_orthographic(const ScaledRigidTransform3D& T, const Vec3& p);

/// Mean reprojection distance over the pairs, mm.
double pose_residual(const ScaledRigidTransform3D& T, const Lifted3D2DPairs& pairs);

}  // namespace fp3d
