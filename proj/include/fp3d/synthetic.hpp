#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/point_cloud.hpp"
#include "fp3d/transform3d.hpp"

namespace fp3d {

enum class BaseShape { half_cylinder, elliptic_cylinder, capped_finger };

/// Planned minutia in surface coordinates: s = cross-section arc length from
/// the top meridian (mm, signed), t = axial station (mm), theta = ridge
/// tangent angle in the (s, t) basis, polarity +1 adds a ridge line around
/// the phase singularity, -1 removes one.
struct MinutiaPlan {
  double s = 0.0;
  double t = 0.0;
  double theta = 0.0;
  int polarity = 1;
};

struct SyntheticFingerSpec {
  BaseShape shape = BaseShape::capped_finger;
  double radius_x = 8.0;            // cross-section semi-axis along x, mm
  double radius_z = 6.5;            // cross-section semi-axis along z, mm
  double length = 24.0;             // axial extent, mm
  double tip_length = 8.0;          // capped finger: taper region length, mm
  double ridge_period = 0.45;       // mm
  double ridge_amplitude = 0.03;    // mm, 0 disables the ridge field
  double ridge_orientation = 0.0;   // phase-gradient tilt in the (s,t) plane, radians
  std::vector<MinutiaPlan> minutiae;
  int random_minutiae = 0;          // generated when the explicit plan is empty
  double sampling_density = 450.0;  // points per mm^2 of surface
  double sample_jitter = 0.25;      // jitter as a fraction of grid spacing
  double noise_sigma = 0.0;         // isotropic Gaussian position noise, mm
  std::uint64_t seed = 1;
  ScaledRigidTransform3D pose;

  void validate() const;
};

/// Ground-truth minutia: surface coordinates plus its realization in the
/// posed 3D frame (position on the base surface, unit ridge tangent, unit
/// outward normal).
struct GroundTruthMinutia {
  double s = 0.0;
  double t = 0.0;
  double theta = 0.0;
  int polarity = 1;
  Vec3 position = Vec3::Zero();
  Vec3 tangent = Vec3::UnitX();
  Vec3 normal = Vec3::UnitZ();
};

struct SyntheticFinger {
  FingerPointCloud cloud;                 // posed
  std::vector<double> surface_s;          // per point, pre-noise surface coords
  std::vector<double> surface_t;
  std::vector<GroundTruthMinutia> minutiae;
  SyntheticFingerSpec spec;

  /// Total cross-section arc length (the unfolded width of the full section)
  /// at the widest station, mm.
  double section_arc_length = 0.0;
};

/// Samples the displaced surface on a jittered arc-length grid. All
/// randomness derives from spec.seed. Posing is performed by
/// apply_transform() on the identity-pose cloud, so posed and unposed runs
/// agree point for point.
SyntheticFinger generate(const SyntheticFingerSpec& spec);

std::string spec_to_json(const SyntheticFingerSpec& spec);
SyntheticFingerSpec spec_from_json(const std::string& text);

/// Ground-truth sidecar: minutiae (surface + 3D), pose, seed, section arc.
void save_ground_truth(const SyntheticFinger& finger, const std::string& path);

/// Writes the posed 3D minutiae as JSON-lines {x,y,z,dir:[...]}, the rolled
/// minutiae input format of the pipeline.
void save_minutiae3d(const std::vector<GroundTruthMinutia>& minutiae, const std::string& path);

struct Minutia3D {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double quality = 1.0;
};

std::vector<Minutia3D> load_minutiae3d(const std::string& path);

}  // namespace fp3d
