#include "fp3d/height_field.hpp"

#include <algorithm>
#include <cmath>

#include "fp3d/parallel.hpp"

namespace fp3d {

namespace {

// Minimum share of the kernel mass that must land on measured pixels for the
// smoothed value to count. Keeps extrapolation beyond the silhouette at bay
// while filling interior holes.
constexpr double kMinMass = 0.05;

std::vector<double> gaussian_kernel(double sigma_px) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i / sigma_px) * (i / sigma_px));
    k[i + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

// 1D convolution along rows of a width*height grid.
void convolve_rows(const std::vector<double>& in, std::vector<double>& out, int width,
                   int height, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t row = r0; row < r1; ++row) {
      const double* src = in.data() + row * width;
      double* dst = out.data() + row * width;
      for (int c = 0; c < width; ++c) {
        double acc = 0.0;
        const int k0 = std::max(-radius, -c);
        const int k1 = std::min(radius, width - 1 - c);
        for (int k = k0; k <= k1; ++k) acc += kernel[k + radius] * src[c + k];
        dst[c] = acc;
      }
    }
  });
}

void convolve_cols(const std::vector<double>& in, std::vector<double>& out, int width,
                   int height, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t row = r0; row < r1; ++row) {
      const int k0 = std::max(-radius, -static_cast<int>(row));
      const int k1 = std::min(radius, height - 1 - static_cast<int>(row));
      double* dst = out.data() + row * width;
      for (int c = 0; c < width; ++c) {
        double acc = 0.0;
        for (int k = k0; k <= k1; ++k) {
          acc += kernel[k + radius] * in[(row + k) * width + c];
        }
        dst[c] = acc;
      }
    }
  });
}

}  // namespace

SmoothedHeightField smooth_height(const HeightGrid& grid, double sigma_mm, double pitch,
                                  const Vec2& origin) {
  if (!(sigma_mm > 0.0)) throw Error(ErrorCode::validation, "sigma must be positive");
  if (std::find(grid.mask.begin(), grid.mask.end(), std::uint8_t{1}) == grid.mask.end()) {
    throw Error(ErrorCode::degenerate_mask, "height grid has no valid pixels");
  }

  const std::size_t n = grid.z.size();
  const auto kernel = gaussian_kernel(sigma_mm / pitch);

  std::vector<double> zm(n), m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = grid.mask[i] ? 1.0 : 0.0;
    zm[i] = grid.mask[i] ? grid.z[i] : 0.0;
  }

  std::vector<double> tmp(n), num(n), den(n);
  convolve_rows(zm, tmp, grid.width, grid.height, kernel);
  convolve_cols(tmp, num, grid.width, grid.height, kernel);
  convolve_rows(m, tmp, grid.width, grid.height, kernel);
  convolve_cols(tmp, den, grid.width, grid.height, kernel);

  SmoothedHeightField field;
  field.width = grid.width;
  field.height = grid.height;
  field.pitch = pitch;
  field.origin = origin;
  field.sigma = sigma_mm;
  field.z.assign(n, 0.0);
  field.mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (den[i] >= kMinMass) {
      field.z[i] = num[i] / den[i];
      field.mask[i] = 1;
    }
  }
  return field;
}

}  // namespace fp3d
