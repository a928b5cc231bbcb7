#include "fp3d/common.hpp"

#include <algorithm>

namespace fp3d {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::validation, "percentile of empty sample");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * (static_cast<double>(values.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace fp3d
