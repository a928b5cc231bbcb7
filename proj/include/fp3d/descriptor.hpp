#pragma once

#include <vector>

#include <Eigen/Core>

#include "fp3d/common.hpp"
#include "fp3d/minutia.hpp"

namespace fp3d {

/// Continuous cylinder-code style descriptor: an N_S x N_S spatial grid of
/// cells in the minutia's local frame (rotated by its direction), each split
/// into N_D relative-direction bins. Cell values accumulate Gaussian
/// contributions of neighboring minutiae and saturate at 1.
struct DescriptorConfig {
  int spatial_bins = 8;                // N_S
  int direction_bins = 6;              // N_D
  double radius = 70.0;                // px at 500 dpi
  double sigma_spatial = 9.33;         // px
  double sigma_direction = deg2rad(30.0);
  double support_reach = 3.0;          // cells valid within reach*sigma_spatial of a minutia
  int min_shared_cells = 12;           // similarity support threshold

  int cells_total() const { return spatial_bins * spatial_bins * direction_bins; }
};

struct CylinderDescriptor {
  int spatial_bins = 0;
  int direction_bins = 0;
  double radius = 0.0;
  std::vector<double> cells;        // length N_S^2 * N_D, entries in [0,1]
  std::vector<std::uint8_t> valid;  // per cell

  bool same_geometry(const CylinderDescriptor& o) const {
    return spatial_bins == o.spatial_bins && direction_bins == o.direction_bins &&
           radius == o.radius;
  }
};

/// m must be an element of all (by value); it contributes nothing to its own
/// cells. An isolated minutia yields an all-zero descriptor.
CylinderDescriptor build_descriptor(const Minutia& m, const std::vector<Minutia>& all,
                                    const DescriptorConfig& config);

/// 1 - ||a-b|| / (||a|| + ||b||) over mutually valid cells; 0 when the shared
/// support is below the configured threshold or both restrictions are zero.
/// Throws Error(geometry_mismatch) on differing descriptor geometry.
double descriptor_similarity(const CylinderDescriptor& a, const CylinderDescriptor& b,
                             const DescriptorConfig& config);

/// Pairwise similarity of two minutiae sets; rows index A, columns index B.
Eigen::MatrixXd similarity_matrix(const std::vector<Minutia>& a, const std::vector<Minutia>& b,
                                  const DescriptorConfig& config);

}  // namespace fp3d
