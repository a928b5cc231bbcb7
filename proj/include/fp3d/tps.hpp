#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "fp3d/common.hpp"

namespace fp3d {

/// Thin-plate-spline map f(p) = affine * (1, x, y)^T + sum_i w_i U(|p - s_i|)
/// with kernel U(r) = r^2 log r. With lambda = 0 the map interpolates the
/// control targets exactly; the radial weights satisfy the orthogonality side
/// conditions (sum w = 0, sum w x = 0, sum w y = 0).
class TpsField {
 public:
  TpsField() = default;

  /// Mapped point.
  Vec2 evaluate(const Vec2& p) const;

  /// evaluate(p) - p.
  Vec2 displacement(const Vec2& p) const { return evaluate(p) - p; }

  /// w^T K w summed over both output components (bending term only).
  double bending_energy() const;

  const std::vector<Vec2>& sources() const { return sources_; }
  const std::vector<Vec2>& targets() const { return targets_; }
  const Eigen::Matrix<double, 2, 3>& affine() const { return affine_; }
  const Eigen::MatrixX2d& weights() const { return weights_; }
  double lambda() const { return lambda_; }

  friend TpsField fit_tps(const std::vector<Vec2>& sources, const std::vector<Vec2>& targets,
                          double lambda);

 private:
  std::vector<Vec2> sources_;
  std::vector<Vec2> targets_;
  Eigen::Matrix<double, 2, 3> affine_ = Eigen::Matrix<double, 2, 3>::Zero();
  Eigen::MatrixX2d weights_;
  double lambda_ = 0.0;
};

/// Solves the standard TPS system with lambda added on the kernel diagonal.
/// Requires >= 3 non-collinear control points; throws
/// Error(degenerate_points) on collinear input and Error(internal) when the
/// bordered system is singular.
TpsField fit_tps(const std::vector<Vec2>& sources, const std::vector<Vec2>& targets,
                 double lambda = 0.0);

struct DeformationArrow {
  double x, y, dx, dy;  // px
};

struct DeformationStats {
  double mean_px = 0.0, median_px = 0.0, max_px = 0.0;
  double mean_mm = 0.0, median_mm = 0.0, max_mm = 0.0;
  std::size_t samples = 0;
  std::vector<DeformationArrow> arrows;
};

/// Samples |f(p) - p| on a step-spaced grid inside the region mask
/// (width x height lattice, row-major). Throws Error(empty_region) when no
/// sample falls inside the region.
DeformationStats deformation_stats(const TpsField& field,
                                   const std::vector<std::uint8_t>& region_mask, int width,
                                   int height, double pitch_mm_per_px, int sample_step_px = 32);

void save_arrows_csv(const DeformationStats& stats, const std::string& path);
void save_arrows_svg(const DeformationStats& stats, int width, int height,
                     const std::string& path);

}  // namespace fp3d
