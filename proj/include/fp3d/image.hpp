#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fp3d/common.hpp"

namespace fp3d {

/// Grayscale raster tied to the world: pixel (col, row) center sits at
/// origin + (col, row) * pitch, +col along +x and +row along +y. Values on
/// valid pixels are in [0,1], 0 = dark (ridge), 1 = bright (background).
struct TextureImage {
  int width = 0;
  int height = 0;
  double pitch = 0.0508;  // mm per pixel (500 dpi)
  Vec2 origin = Vec2::Zero();
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  std::size_t idx(int col, int row) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  bool in_bounds(int col, int row) const {
    return col >= 0 && col < width && row >= 0 && row < height;
  }
  bool valid(int col, int row) const { return in_bounds(col, row) && mask[idx(col, row)]; }

  Vec2 pixel_to_mm(double col, double row) const {
    return origin + Vec2(col * pitch, row * pitch);
  }
  Vec2 mm_to_pixel(const Vec2& mm) const { return (mm - origin) / pitch; }

  static TextureImage blank(int width, int height, double pitch, const Vec2& origin);
  std::size_t valid_count() const;
};

/// Per-pixel index of the 3D point that produced the pixel, -1 where invalid.
struct PixelProvenance {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> point;

  std::int32_t at(int col, int row) const {
    return point[static_cast<std::size_t>(row) * width + col];
  }
};

/// Mask-aware bilinear sample at fractional pixel coordinates. Returns false
/// when the valid-neighbor weight mass is below half.
bool sample_bilinear(const TextureImage& img, double col, double row, double& out);

/// Binary PGM (P5), 8 or 16 bit. Invalid pixels are written as maxval
/// (paper-white background); the mask itself travels in the JSON sidecar.
void save_pgm(const TextureImage& img, const std::string& path, int bits = 16);

/// Reads P5/P2; values normalized to [0,1]; mask all-true.
TextureImage load_pgm(const std::string& path);

/// Sidecar JSON: geometry, run-length-encoded validity mask and, optionally,
/// the provenance table (one point index per valid pixel, row-major).
void save_sidecar(const TextureImage& img, const PixelProvenance* prov, const std::string& path);
void load_sidecar(const std::string& path, TextureImage& img, PixelProvenance* prov);

/// Convenience: path.pgm + path.json.
void save_texture(const TextureImage& img, const PixelProvenance* prov,
                  const std::string& base_path, int bits = 16);
TextureImage load_texture(const std::string& base_path, PixelProvenance* prov);

}  // namespace fp3d
