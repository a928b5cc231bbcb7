#include "fp3d/descriptor.hpp"

#include <cmath>

#include "fp3d/parallel.hpp"

namespace fp3d {

CylinderDescriptor build_descriptor(const Minutia& m, const std::vector<Minutia>& all,
                                    const DescriptorConfig& config) {
  const int ns = config.spatial_bins;
  const int nd = config.direction_bins;
  CylinderDescriptor d;
  d.spatial_bins = ns;
  d.direction_bins = nd;
  d.radius = config.radius;
  d.cells.assign(static_cast<std::size_t>(config.cells_total()), 0.0);
  d.valid.assign(d.cells.size(), 0);

  const double cell_w = 2.0 * config.radius / ns;
  const double cos_t = std::cos(m.theta);
  const double sin_t = std::sin(m.theta);
  const double s2s = 2.0 * config.sigma_spatial * config.sigma_spatial;
  const double s2d = 2.0 * config.sigma_direction * config.sigma_direction;
  const double reach = config.support_reach * config.sigma_spatial;

  for (int iy = 0; iy < ns; ++iy) {
    for (int ix = 0; ix < ns; ++ix) {
      const double ox = (ix + 0.5) * cell_w - config.radius;
      const double oy = (iy + 0.5) * cell_w - config.radius;
      const std::size_t base = (static_cast<std::size_t>(iy) * ns + ix) * nd;
      if (std::hypot(ox, oy) > config.radius) continue;  // outside the disc
      // cell center in image coordinates, local frame rotated by theta
      const double cx = m.x + cos_t * ox - sin_t * oy;
      const double cy = m.y + sin_t * ox + cos_t * oy;

      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& t : all) {
        nearest = std::min(nearest, std::hypot(cx - t.x, cy - t.y));
      }
      if (nearest > reach) continue;  // cell has no minutia support

      for (int k = 0; k < nd; ++k) {
        const double bin_angle = -kPi + (k + 0.5) * 2.0 * kPi / nd;
        double acc = 0.0;
        for (const auto& t : all) {
          if (&t == &m || (t.x == m.x && t.y == m.y && t.theta == m.theta)) continue;
          const double dist2 = (cx - t.x) * (cx - t.x) + (cy - t.y) * (cy - t.y);
          const double rel = angle_diff(t.theta, m.theta);
          const double dd = angle_diff(bin_angle, rel);
          acc += std::exp(-dist2 / s2s) * std::exp(-dd * dd / s2d);
        }
        d.cells[base + k] = clamp01(acc);
        d.valid[base + k] = 1;
      }
    }
  }
  return d;
}

double descriptor_similarity(const CylinderDescriptor& a, const CylinderDescriptor& b,
                             const DescriptorConfig& config) {
  if (!a.same_geometry(b)) {
    throw Error(ErrorCode::geometry_mismatch, "descriptor geometries differ");
  }
  int shared = 0;
  double diff2 = 0.0, na2 = 0.0, nb2 = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    ++shared;
    const double da = a.cells[i], db = b.cells[i];
    diff2 += (da - db) * (da - db);
    na2 += da * da;
    nb2 += db * db;
  }
  if (shared < config.min_shared_cells) return 0.0;
  const double denom = std::sqrt(na2) + std::sqrt(nb2);
  if (denom < 1e-12) return 0.0;
  return clamp01(1.0 - std::sqrt(diff2) / denom);
}

Eigen::MatrixXd similarity_matrix(const std::vector<Minutia>& a, const std::vector<Minutia>& b,
                                  const DescriptorConfig& config) {
  std::vector<CylinderDescriptor> da(a.size()), db(b.size());
  parallel_for(a.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) da[i] = build_descriptor(a[i], a, config);
  });
  parallel_for(b.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) db[i] = build_descriptor(b[i], b, config);
  });
  Eigen::MatrixXd s(a.size(), b.size());
  parallel_for(a.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        s(i, j) = descriptor_similarity(da[i], db[j], config);
      }
    }
  });
  return s;
}

}  // namespace fp3d
