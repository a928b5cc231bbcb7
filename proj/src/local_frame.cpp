#include "fp3d/local_frame.hpp"

#include <Eigen/Eigenvalues>

namespace fp3d {

std::vector<std::uint32_t> neighborhood(const FingerPointCloud& cloud, const SpatialIndex& index,
                                        const Vec3& p, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::validation, "neighborhood radius must be positive");
  (void)cloud;
  return index.radius_query(p, r);
}

LocalFrame pca_frame(const FingerPointCloud& cloud, std::span<const std::uint32_t> member_ids,
                     double radius) {
  std::vector<Vec3> members;
  members.reserve(member_ids.size());
  for (auto id : member_ids) members.push_back(cloud.points[id]);
  return pca_frame(std::span<const Vec3>(members), radius);
}

LocalFrame pca_frame(std::span<const Vec3> members, double radius) {
  if (members.size() < kMinFramePoints) {
    throw Error(ErrorCode::degenerate_neighborhood,
                "neighborhood has " + std::to_string(members.size()) + " points, need " +
                    std::to_string(kMinFramePoints));
  }
  Vec3 c = Vec3::Zero();
  for (const auto& p : members) c += p;
  c /= static_cast<double>(members.size());

  Mat3 cov = Mat3::Zero();
  for (const auto& p : members) {
    const Vec3 d = p - c;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(members.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);  // eigenvalues ascending
  const Vec3 evals = eig.eigenvalues();
  if (!(evals[2] > 0.0)) {
    throw Error(ErrorCode::degenerate_neighborhood, "all neighborhood points coincident");
  }
  if (evals[1] / evals[2] < 1e-12) {
    throw Error(ErrorCode::degenerate_neighborhood, "neighborhood points are collinear");
  }

  Vec3 n = eig.eigenvectors().col(0);
  n.normalize();
  // Global orientation: toward the sensor (+z); ties toward +y, then +x.
  if (n.z() < 0.0 || (n.z() == 0.0 && (n.y() < 0.0 || (n.y() == 0.0 && n.x() < 0.0)))) {
    n = -n;
  }

  LocalFrame frame;
  frame.centroid = c;
  frame.normal = n;
  frame.radius = radius;
  frame.neighbor_count = members.size();
  return frame;
}

}  // namespace fp3d
