#pragma once

#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/image.hpp"
#include "fp3d/local_frame.hpp"
#include "fp3d/point_cloud.hpp"

namespace fp3d {

struct RenderConfig {
  double radius = 0.8;    // neighborhood radius for the local plane fit, mm
  double pitch = 0.0508;  // mm per pixel (500 dpi)
  double lo_percentile = 0.5;
  double hi_percentile = 99.5;
};

struct RenderResult {
  TextureImage image;
  PixelProvenance provenance;
  std::vector<double> depth;             // per point, mm; NaN when no frame
  std::vector<double> normalized_depth;  // per point, in [0,1]; NaN when no frame
};

/// Signed depth of p against its local plane fit, mm. Positive toward the
/// sensor (+z side of the surface).
double surface_depth(const Vec3& p, const LocalFrame& frame);

/// Maps depths onto [0,1] against robust extremes (lo/hi percentiles of the
/// finite entries, falling back to the raw extremes when the percentile
/// window collapses), then clamps. NaN entries pass through. Throws
/// Error(degenerate_range) when all finite depths are identical.
std::vector<double> normalize_depths(const std::vector<double>& depths,
                                     double lo_percentile = 0.5, double hi_percentile = 99.5);

/// Orthographic splat of the cloud along -z. Each point contributes its
/// normalized depth; pixel conflicts resolve to the lexicographically largest
/// (z, point index), i.e. the point nearest the sensor. Pixel value is
/// 1 - d_n so ridge crests (positive depth) render dark. Points whose
/// neighborhood is smaller than the PCA minimum are skipped.
RenderResult render(const FingerPointCloud& cloud, const RenderConfig& config);

/// z of the provenance point per pixel; mask matches provenance validity.
/// Grid values share the image lattice.
struct HeightGrid {
  int width = 0;
  int height = 0;
  std::vector<double> z;
  std::vector<std::uint8_t> mask;
};

HeightGrid height_from_provenance(const FingerPointCloud& cloud, const TextureImage& img,
                                  const PixelProvenance& prov);

}  // namespace fp3d
