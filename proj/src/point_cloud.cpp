#include "fp3d/point_cloud.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace fp3d {

namespace {

constexpr std::size_t kMinPoints = 100;
constexpr double kMaxExtentMm = 200.0;
constexpr double kDuplicateDistMm = 1e-9;

bool parse_double(const char*& s, const char* end, double& out) {
  while (s < end && (*s == ' ' || *s == '\t' || *s == '\r')) ++s;
  auto [ptr, ec] = std::from_chars(s, end, out);
  if (ec != std::errc()) return false;
  s = ptr;
  return true;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::parse, path + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Vec3 FingerPointCloud::bbox_min() const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (const auto& p : points) lo = lo.cwiseMin(p);
  return lo;
}

Vec3 FingerPointCloud::bbox_max() const {
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& p : points) hi = hi.cwiseMax(p);
  return hi;
}

Vec3 FingerPointCloud::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return points.empty() ? c : Vec3(c / static_cast<double>(points.size()));
}

void validate_cloud(const FingerPointCloud& cloud) {
  if (cloud.size() < kMinPoints) {
    throw Error(ErrorCode::validation, "fewer than 100 points (" +
                                           std::to_string(cloud.size()) + ")");
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.points[i].allFinite()) {
      throw Error(ErrorCode::validation,
                  "non-finite coordinate at point " + std::to_string(i));
    }
  }
  if (!cloud.confidence.empty()) {
    if (cloud.confidence.size() != cloud.size()) {
      throw Error(ErrorCode::validation, "confidence count does not match point count");
    }
    for (std::size_t i = 0; i < cloud.confidence.size(); ++i) {
      double c = cloud.confidence[i];
      if (!(c >= 0.0 && c <= 1.0)) {
        throw Error(ErrorCode::validation,
                    "confidence out of [0,1] at point " + std::to_string(i));
      }
    }
  }
  const Vec3 extent = cloud.bbox_max() - cloud.bbox_min();
  for (int a = 0; a < 3; ++a) {
    if (extent[a] > kMaxExtentMm) {
      throw Error(ErrorCode::validation,
                  "bounding box exceeds 200 mm on axis " + std::to_string(a));
    }
  }

  // Duplicate scan: points within kDuplicateDistMm must be within it on x as
  // well, so a lexicographic sort bounds the candidate window.
  std::vector<std::uint32_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const Vec3& pa = cloud.points[a];
    const Vec3& pb = cloud.points[b];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return pa.z() < pb.z();
  });
  const double d2 = kDuplicateDistMm * kDuplicateDistMm;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const Vec3& pi = cloud.points[order[i]];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Vec3& pj = cloud.points[order[j]];
      if (pj.x() - pi.x() > kDuplicateDistMm) break;
      if ((pj - pi).squaredNorm() < d2) {
        throw Error(ErrorCode::validation,
                    "duplicate points " + std::to_string(order[i]) + " and " +
                        std::to_string(order[j]));
      }
    }
  }
}

namespace {

FingerPointCloud load_xyz(const std::string& path, std::ifstream& in) {
  FingerPointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const char* s = line.data();
    const char* end = s + line.size();
    while (s < end && (*s == ' ' || *s == '\t' || *s == '\r')) ++s;
    if (s == end || *s == '#') continue;
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      if (!parse_double(s, end, p[a])) parse_fail(path, lineno, "expected 3 numeric fields");
    }
    double conf;
    const char* save = s;
    if (parse_double(s, end, conf)) {
      cloud.confidence.resize(cloud.points.size(), 1.0);
      cloud.confidence.push_back(conf);
    } else {
      s = save;
      if (!cloud.confidence.empty()) cloud.confidence.push_back(1.0);
    }
    if (!p.allFinite()) parse_fail(path, lineno, "non-finite coordinate");
    cloud.points.push_back(p);
  }
  return cloud;
}

FingerPointCloud load_ply(const std::string& path, std::ifstream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") parse_fail(path, lineno ? lineno : 1, "missing 'ply' magic");
  std::size_t vertex_count = 0;
  std::vector<std::string> props;  // per-vertex scalar property names, in order
  bool in_vertex_element = false;
  bool ascii = false;
  while (next_line()) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = (fmt == "ascii");
      if (!ascii) parse_fail(path, lineno, "only ascii PLY is supported");
    } else if (tok == "element") {
      std::string name;
      std::size_t count;
      ls >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
      else if (count > 0 && !props.empty()) break;  // vertices must come first
    } else if (tok == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type >> name;
      if (type == "list") parse_fail(path, lineno, "list property in vertex element");
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    } else if (tok == "comment" || tok == "obj_info" || tok.empty()) {
      continue;
    }
  }
  auto index_of = [&](const std::string& name) {
    auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1 : static_cast<int>(it - props.begin());
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  const int ic = index_of("confidence");
  if (ix < 0 || iy < 0 || iz < 0) {
    parse_fail(path, lineno, "vertex element lacks x/y/z properties");
  }

  FingerPointCloud cloud;
  cloud.points.reserve(vertex_count);
  if (ic >= 0) cloud.confidence.reserve(vertex_count);
  std::vector<double> fields(props.size());
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!next_line()) parse_fail(path, lineno, "unexpected end of file in vertex data");
    const char* s = line.data();
    const char* end = s + line.size();
    for (std::size_t f = 0; f < props.size(); ++f) {
      if (!parse_double(s, end, fields[f])) {
        parse_fail(path, lineno, "expected " + std::to_string(props.size()) + " vertex fields");
      }
    }
    Vec3 p(fields[ix], fields[iy], fields[iz]);
    if (!p.allFinite()) parse_fail(path, lineno, "non-finite coordinate");
    cloud.points.push_back(p);
    if (ic >= 0) cloud.confidence.push_back(fields[ic]);
  }
  return cloud;
}

}  // namespace

FingerPointCloud load_point_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  FingerPointCloud cloud =
      format == CloudFormat::ply_ascii ? load_ply(path, in) : load_xyz(path, in);
  validate_cloud(cloud);
  return cloud;
}

FingerPointCloud load_point_cloud(const std::string& path) {
  const bool ply = path.size() >= 4 && path.compare(path.size() - 4, 4, ".ply") == 0;
  return load_point_cloud(path, ply ? CloudFormat::ply_ascii : CloudFormat::xyz_text);
}

void save_point_cloud(const FingerPointCloud& cloud, const std::string& path,
                      CloudFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  char buf[128];
  if (format == CloudFormat::ply_ascii) {
    out << "ply\nformat ascii 1.0\ncomment units millimeters\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_confidence()) out << "property float confidence\n";
    out << "end_header\n";
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (cloud.has_confidence()) {
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.6g\n", p.x(), p.y(), p.z(),
                    cloud.confidence[i]);
    } else {
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    }
    out << buf;
  }
  if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

}  // namespace fp3d
