#pragma once

#include <string>
#include <vector>

#include "fp3d/common.hpp"

namespace fp3d {

/// 2D ridge feature: position in pixels (col, row), direction in [0, 2*pi).
struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double quality = 1.0;
};

/// JSON-lines, one {x, y, theta, quality?} object per line. theta is
/// normalized into [0, 2*pi); coordinates must be finite and non-negative.
/// Throws on parse failure (with line number) and on empty files.
std::vector<Minutia> load_minutiae(const std::string& path);

void save_minutiae(const std::vector<Minutia>& minutiae, const std::string& path);

}  // namespace fp3d
