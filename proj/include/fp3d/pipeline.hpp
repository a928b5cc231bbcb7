#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/descriptor.hpp"
#include "fp3d/height_field.hpp"
#include "fp3d/image.hpp"
#include "fp3d/minutia.hpp"
#include "fp3d/pose.hpp"
#include "fp3d/render.hpp"
#include "fp3d/rigid2d.hpp"
#include "fp3d/spectral.hpp"
#include "fp3d/synthetic.hpp"
#include "fp3d/tps.hpp"
#include "fp3d/unfold.hpp"

namespace fp3d {

struct PipelineConfig {
  RenderConfig render;
  double smooth_sigma = 1.5;  // mm
  DescriptorConfig descriptor;
  SpectralConfig spectral;
  PoseEstimateConfig pose;
  double tps_lambda = 0.0;
  int arrow_step_px = 32;
  std::uint64_t seed = 0;  // echoed into the report; synthetic inputs bake it in
  std::string output_dir;  // artifacts land here when non-empty
  bool write_images = true;
};

/// One unfolding pass: transform, re-center in z, render, smooth, unfold,
/// and project the rolled 3D minutiae into the unfolded frame. The general
/// and pose-specific passes run exactly this code; only T differs.
struct UnfoldPass {
  FingerPointCloud cloud;  // posed and z-centered
  RenderResult render;
  SmoothedHeightField field;
  UnfoldResult unfolded;
  std::vector<Minutia> minutiae;      // in unfolded-image pixels
  std::vector<int> minutiae_source;   // index into the rolled 3D list
  int minutiae_dropped = 0;
};

UnfoldPass run_unfold_pass(const FingerPointCloud& base, const ScaledRigidTransform3D& T,
                           const std::vector<Minutia3D>& rolled, const PipelineConfig& config);

/// Synthetic stand-in for a contact acquisition: the unfolded frontal finger
/// plus its minutiae and silhouette mask, usable as the flat side of a
/// pipeline run.
struct FlatReference {
  TextureImage image;
  std::vector<Minutia> minutiae;
  TextureImage mask;  // foreground = 1
};

FlatReference make_flat_reference(const FingerPointCloud& frontal_cloud,
                                  const std::vector<Minutia3D>& minutiae3d,
                                  const PipelineConfig& config);

/// Pixels outside the mask foreground are invalidated. The mask must share
/// the image lattice; an all-background mask or a mask disjoint from the
/// image's valid area is an error.
TextureImage crop_by_segmentation(const TextureImage& image, const TextureImage& mask);

struct VariantReport {
  bool present = false;
  int matched = 0;
  double rigid_residual_px = 0.0;   // mean distance after 2D alignment
  double proxy_score = 0.0;         // matched / (1 + mean residual)
  RigidTransform2D registration;
  double tps_mean_px = 0.0, tps_median_px = 0.0, tps_max_px = 0.0;
  double tps_mean_mm = 0.0, tps_median_mm = 0.0, tps_max_mm = 0.0;
  std::string note;  // populated when a step was skipped
};

struct PipelineReport {
  std::vector<std::pair<std::string, double>> timings_ms;
  int cloud_points = 0;
  int roll_minutiae = 0, flat_minutiae = 0;
  int general_correspondences = 0, specific_correspondences = 0;
  int lifted_pairs = 0;
  bool pose_ok = false;
  std::string pose_failure_reason;
  ScaledRigidTransform3D pose;
  VariantReport general, specific;
  std::string error;  // set when a hard stage failure aborted the run

  std::string to_json(bool include_timings = true) const;
};

/// Stage tag rides along so the CLI can exit with a distinct code.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.code(), stage + ": " + inner.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// General unfold -> minutiae match -> 3D pose -> specific unfold -> 2D
/// registration, crop, TPS comparison. Pose failures degrade to the general
/// result with a flagged report; hard stage failures throw StageError after
/// writing the partial report (when an output directory is set).
PipelineReport run_pipeline(const std::string& cloud_path, const std::string& roll_minutiae_path,
                            const std::string& flat_minutiae_path,
                            const std::string& flat_mask_path, const PipelineConfig& config);

/// In-memory variant used by tests and the Python bindings.
PipelineReport run_pipeline(const FingerPointCloud& cloud,
                            const std::vector<Minutia3D>& roll_minutiae,
                            const std::vector<Minutia>& flat_minutiae,
                            const TextureImage& flat_mask, const PipelineConfig& config);

}  // namespace fp3d
