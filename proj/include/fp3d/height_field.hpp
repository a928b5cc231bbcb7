#pragma once

#include <cstdint>
#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/render.hpp"

namespace fp3d {

/// Macro finger-shape height field on the image lattice, ridge detail
/// removed. Valid wherever enough Gaussian mass fell on measured pixels, so
/// small holes in the raw grid are filled.
struct SmoothedHeightField {
  int width = 0;
  int height = 0;
  double pitch = 0.0508;
  Vec2 origin = Vec2::Zero();
  double sigma = 1.5;  // mm
  std::vector<double> z;
  std::vector<std::uint8_t> mask;

  std::size_t idx(int col, int row) const {
    return static_cast<std::size_t>(row) * width + col;
  }
};

/// Gaussian smoothing by normalized convolution (mask-weighted, separable).
/// sigma is in millimeters. Throws Error(degenerate_mask) when the grid has
/// no valid pixels.
SmoothedHeightField smooth_height(const HeightGrid& grid, double sigma_mm, double pitch,
                                  const Vec2& origin);

inline SmoothedHeightField smooth_height(const HeightGrid& grid, double sigma_mm,
                                         const TextureImage& geometry) {
  return smooth_height(grid, sigma_mm, geometry.pitch, geometry.origin);
}

}  // namespace fp3d
