#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fp3d/common.hpp"

namespace fp3d {

enum class CloudFormat { ply_ascii, xyz_text };

/// 3D finger surface samples, coordinates in millimeters.
///
/// Valid clouds hold at least 100 finite points, fit in a 200 mm box per
/// axis, and contain no two points closer than 1e-9 mm. Immutable after load.
struct FingerPointCloud {
  std::vector<Vec3> points;
  std::vector<double> confidence;  // optional, per point, in [0,1]; empty if absent

  std::size_t size() const { return points.size(); }
  bool has_confidence() const { return !confidence.empty(); }

  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
  Vec3 centroid() const;
};

/// Checks all FingerPointCloud invariants; throws Error(validation) on the
/// first violation, with the offending point index in the message.
void validate_cloud(const FingerPointCloud& cloud);

/// Parses a PLY (ascii) or whitespace-separated XYZ file. '#' comments are
/// allowed in XYZ. Parse errors name the 1-based line. The returned cloud is
/// validated.
FingerPointCloud load_point_cloud(const std::string& path, CloudFormat format);

/// Format inferred from the extension (.ply / anything else = xyz).
FingerPointCloud load_point_cloud(const std::string& path);

void save_point_cloud(const FingerPointCloud& cloud, const std::string& path, CloudFormat format);

}  // namespace fp3d
