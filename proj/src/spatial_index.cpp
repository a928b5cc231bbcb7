#include "fp3d/spatial_index.hpp"

#include <algorithm>
#include <numeric>

namespace fp3d {

namespace {
constexpr std::uint32_t kLeafSize = 16;
}

SpatialIndex::SpatialIndex(const FingerPointCloud& cloud) {
  ids_.resize(cloud.size());
  std::iota(ids_.begin(), ids_.end(), 0u);
  pts_ = cloud.points;
  nodes_.reserve(cloud.size() / kLeafSize * 2 + 2);
  if (!pts_.empty()) root_ = build(0, static_cast<std::uint32_t>(pts_.size()));
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id] = {0.0f, -1, begin, end};
    return id;
  }
  Vec3 lo = pts_[begin], hi = pts_[begin];
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[i]);
    hi = hi.cwiseMax(pts_[i]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = (begin + end) / 2;
  // Sort slots [begin,end) along the axis; original index breaks exact ties so
  // construction is deterministic.
  std::vector<std::uint32_t> perm(end - begin);
  std::iota(perm.begin(), perm.end(), begin);
  std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (pts_[a][axis] != pts_[b][axis]) return pts_[a][axis] < pts_[b][axis];
                     return ids_[a] < ids_[b];
                   });
  std::vector<Vec3> tmp_pts(end - begin);
  std::vector<std::uint32_t> tmp_ids(end - begin);
  for (std::uint32_t i = 0; i < end - begin; ++i) {
    tmp_pts[i] = pts_[perm[i]];
    tmp_ids[i] = ids_[perm[i]];
  }
  std::copy(tmp_pts.begin(), tmp_pts.end(), pts_.begin() + begin);
  std::copy(tmp_ids.begin(), tmp_ids.end(), ids_.begin() + begin);

  const double split = pts_[mid][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id] = {split, axis, left, right};
  return id;
}

void SpatialIndex::radius_query(const Vec3& p, double r,
                                std::vector<std::uint32_t>& out) const {
  if (!pts_.empty() && r > 0.0) query_rec(root_, p, r * r, out);
}

std::vector<std::uint32_t> SpatialIndex::radius_query(const Vec3& p, double r) const {
  std::vector<std::uint32_t> out;
  radius_query(p, r, out);
  return out;
}

void SpatialIndex::query_rec(std::uint32_t node, const Vec3& p, double r2,
                             std::vector<std::uint32_t>& out) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.left; i < n.right; ++i) {
      if ((pts_[i] - p).squaredNorm() < r2) out.push_back(ids_[i]);
    }
    return;
  }
  const double d = p[n.axis] - n.split;
  if (d <= 0.0) {
    query_rec(n.left, p, r2, out);
    if (d * d < r2) query_rec(n.right, p, r2, out);
  } else {
    query_rec(n.right, p, r2, out);
    if (d * d < r2) query_rec(n.left, p, r2, out);
  }
}

}  // namespace fp3d
