#include "fp3d/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fp3d/parallel.hpp"
#include "fp3d/spatial_index.hpp"

namespace fp3d {

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double surface_depth(const Vec3& p, const LocalFrame& frame) {
  return (p - frame.centroid).dot(frame.normal);
}

std::vector<double> normalize_depths(const std::vector<double>& depths, double lo_percentile,
                                     double hi_percentile) {
  std::vector<double> finite;
  finite.reserve(depths.size());
  for (double d : depths) {
    if (std::isfinite(d)) finite.push_back(d);
  }
  if (finite.size() < 2) {
    throw Error(ErrorCode::degenerate_range, "need at least two depth values");
  }
  double lo = percentile(finite, lo_percentile);
  double hi = percentile(finite, hi_percentile);
  if (!(hi - lo > 0.0)) {
    // Percentile window collapsed (e.g. a lone bump on a flat field); fall
    // back to the raw extremes before declaring the range degenerate.
    const auto [mn, mx] = std::minmax_element(finite.begin(), finite.end());
    lo = *mn;
    hi = *mx;
  }
  if (!(hi - lo > 0.0)) {
    throw Error(ErrorCode::degenerate_range, "all depths identical");
  }
  std::vector<double> out(depths.size(), kNaN);
  const double inv = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (std::isfinite(depths[i])) out[i] = clamp01((depths[i] - lo) * inv);
  }
  return out;
}

RenderResult render(const FingerPointCloud& cloud, const RenderConfig& config) {
  if (!(config.radius > 0.0)) throw Error(ErrorCode::validation, "radius must be positive");
  if (!(config.pitch > 0.0)) throw Error(ErrorCode::validation, "pitch must be positive");

  const SpatialIndex index(cloud);
  const std::size_t n = cloud.size();

  RenderResult res;
  res.depth.assign(n, kNaN);

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> ids;
    std::vector<Vec3> members;
    for (std::size_t i = begin; i < end; ++i) {
      ids.clear();
      index.radius_query(cloud.points[i], config.radius, ids);
      if (ids.size() < kMinFramePoints) continue;
      members.clear();
      members.reserve(ids.size());
      for (auto id : ids) members.push_back(cloud.points[id]);
      LocalFrame frame;
      try {
        frame = pca_frame(std::span<const Vec3>(members), config.radius);
      } catch (const Error&) {
        continue;  // degenerate neighborhood: point contributes nothing
      }
      res.depth[i] = surface_depth(cloud.points[i], frame);
    }
  });

  res.normalized_depth = normalize_depths(res.depth, config.lo_percentile, config.hi_percentile);

  const Vec3 lo = cloud.bbox_min();
  const Vec3 hi = cloud.bbox_max();
  const int width = static_cast<int>(std::lround((hi.x() - lo.x()) / config.pitch)) + 1;
  const int height = static_cast<int>(std::lround((hi.y() - lo.y()) / config.pitch)) + 1;
  res.image = TextureImage::blank(width, height, config.pitch, Vec2(lo.x(), lo.y()));
  res.provenance.width = width;
  res.provenance.height = height;
  res.provenance.point.assign(static_cast<std::size_t>(width) * height, -1);

  // Serial conflict resolution keeps the output independent of threading.
  auto& img = res.image;
  auto& prov = res.provenance;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(res.normalized_depth[i])) continue;
    const Vec3& p = cloud.points[i];
    const int col = static_cast<int>(std::lround((p.x() - lo.x()) / config.pitch));
    const int row = static_cast<int>(std::lround((p.y() - lo.y()) / config.pitch));
    if (!img.in_bounds(col, row)) continue;
    const std::size_t at = img.idx(col, row);
    const std::int32_t cur = prov.point[at];
    if (cur >= 0) {
      const double zc = cloud.points[cur].z();
      if (p.z() < zc || (p.z() == zc && static_cast<std::int32_t>(i) < cur)) continue;
    }
    prov.point[at] = static_cast<std::int32_t>(i);
    img.values[at] = 1.0 - res.normalized_depth[i];
    img.mask[at] = 1;
  }
  return res;
}

HeightGrid height_from_provenance(const FingerPointCloud& cloud, const TextureImage& img,
                                  const PixelProvenance& prov) {
  HeightGrid grid;
  grid.width = img.width;
  grid.height = img.height;
  grid.z.assign(img.values.size(), 0.0);
  grid.mask.assign(img.values.size(), 0);
  for (std::size_t i = 0; i < prov.point.size(); ++i) {
    const std::int32_t id = prov.point[i];
    if (id >= 0) {
      grid.z[i] = cloud.points[id].z();
      grid.mask[i] = 1;
    }
  }
  return grid;
}

}  // namespace fp3d
