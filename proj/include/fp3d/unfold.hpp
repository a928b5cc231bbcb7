#pragma once

#include <optional>
#include <string>

#include "fp3d/common.hpp"
#include "fp3d/height_field.hpp"
#include "fp3d/image.hpp"

namespace fp3d {

/// Bidirectional arc-length reparametrization of the image lattice.
///
/// Forward: per source pixel, unfolded coordinates (u, v) in mm, with u the
/// cumulative row arc length and v the cumulative column arc length, both
/// anchored on the lines through the anchor point so u(anchor) = x(anchor).
/// Inverse: per target pixel, source position (x, y) in mm. Provenance rides
/// along so unfolded pixels still name their 3D source point.
struct UnfoldMap {
  int src_width = 0, src_height = 0;
  int dst_width = 0, dst_height = 0;
  double pitch = 0.0508;
  Vec2 src_origin = Vec2::Zero();
  Vec2 dst_origin = Vec2::Zero();

  // Source-lattice grids. u/v are defined on every pixel of a processed
  // row/column (integration runs across interior holes); src_mask marks
  // pixels whose height was actually measured.
  std::vector<double> u, v;
  std::vector<double> du_dx, dv_dy;  // local expansion factors, >= 1
  std::vector<std::uint8_t> src_mask;

  // Target-lattice grids.
  std::vector<double> x, y;
  std::vector<std::uint8_t> dst_mask;
  std::vector<std::int32_t> provenance;  // -1 where absent

  std::size_t sidx(int col, int row) const {
    return static_cast<std::size_t>(row) * src_width + col;
  }
  std::size_t didx(int col, int row) const {
    return static_cast<std::size_t>(row) * dst_width + col;
  }

  /// Bilinear forward lookup at a fractional source pixel. False off-lattice.
  bool forward(double src_col, double src_row, Vec2& uv_mm) const;

  /// Local expansion factors at a fractional source pixel.
  bool expansion(double src_col, double src_row, Vec2& factors) const;

  /// Continuous inverse of the forward map by alternating 1D inversions of
  /// the monotone row/column integrals. False when (u,v) falls outside the
  /// unfolded footprint.
  bool invert_point(const Vec2& uv_mm, Vec2& xy_mm) const;
};

struct UnfoldResult {
  TextureImage image;  // resampled on the (u,v) lattice at the source pitch
  UnfoldMap map;
};

/// Arc-length unfolding: per row, du/dx = sqrt(1 + (dz/dx)^2) integrated from
/// the anchor column; per column the same for v. Gradients use central
/// differences, one-sided at the mask boundary; cells without height data
/// integrate with unit speed. Texture is resampled bilinearly, provenance by
/// nearest source pixel.
///
/// anchor_mm: world point whose column/row anchor the integrals (normally
/// the cloud centroid). Defaults to the mass centroid of the valid pixels.
/// Throws Error(degenerate_mask) when no row or no column crosses the anchor.
UnfoldResult unfold(const SmoothedHeightField& field, const TextureImage& texture,
                    const PixelProvenance* provenance = nullptr,
                    std::optional<Vec2> anchor_mm = std::nullopt);

void save_unfold_map(const UnfoldMap& map, const std::string& path);
UnfoldMap load_unfold_map(const std::string& path);

}  // namespace fp3d
