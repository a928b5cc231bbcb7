#pragma once

#include <cstdint>
#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/point_cloud.hpp"

namespace fp3d {

/// Median-split kd-tree over a point cloud. Immutable after construction and
/// safe for concurrent radius queries.
class SpatialIndex {
 public:
  explicit SpatialIndex(const FingerPointCloud& cloud);

  /// All indices i with |points[i] - p| < r (strict). Includes the query
  /// point itself when p is a cloud point. Deterministic order.
  std::vector<std::uint32_t> radius_query(const Vec3& p, double r) const;

  /// radius_query without the result allocation; appends to out.
  void radius_query(const Vec3& p, double r, std::vector<std::uint32_t>& out) const;

  std::size_t size() const { return pts_.size(); }

 private:
  struct Node {
    double split;
    std::int32_t axis;       // -1 for leaf
    std::uint32_t left;      // child node or, for leaves, first point slot
    std::uint32_t right;     // child node or, for leaves, one-past-last slot
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void query_rec(std::uint32_t node, const Vec3& p, double r2,
                 std::vector<std::uint32_t>& out) const;

  std::vector<Vec3> pts_;               // reordered copy for cache locality
  std::vector<std::uint32_t> ids_;      // slot -> original index
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

}  // namespace fp3d
