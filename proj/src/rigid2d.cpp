#include "fp3d/rigid2d.hpp"

#include <cmath>

#include <Eigen/SVD>
#include <json.hpp>

#include "fp3d/parallel.hpp"

namespace fp3d {

RigidTransform2D estimate_rigid_2d(const CorrespondenceSet& matches,
                                   const std::vector<Minutia>& a,
                                   const std::vector<Minutia>& b) {
  const std::size_t n = matches.size();
  if (n < 2) throw Error(ErrorCode::insufficient_pairs, "need at least 2 correspondences");
  Vec2 ca = Vec2::Zero(), cb = Vec2::Zero();
  for (const auto& c : matches.pairs) {
    ca += Vec2(a[c.a].x, a[c.a].y);
    cb += Vec2(b[c.b].x, b[c.b].y);
  }
  ca /= static_cast<double>(n);
  cb /= static_cast<double>(n);

  Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
  double spread = 0.0;
  for (const auto& c : matches.pairs) {
    const Vec2 pa = Vec2(a[c.a].x, a[c.a].y) - ca;
    const Vec2 pb = Vec2(b[c.b].x, b[c.b].y) - cb;
    cross += pb * pa.transpose();
    spread += pa.squaredNorm();
  }
  if (spread < 1e-12) throw Error(ErrorCode::degenerate_points, "matched points are coincident");

  Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(1, 1) = -1.0;
  const Eigen::Matrix2d r = svd.matrixU() * d * svd.matrixV().transpose();

  RigidTransform2D T;
  T.phi = std::atan2(r(1, 0), r(0, 0));
  T.t = cb - r * ca;
  return T;
}

double rigid_residual_rms(const RigidTransform2D& T, const CorrespondenceSet& matches,
                          const std::vector<Minutia>& a, const std::vector<Minutia>& b) {
  if (matches.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& c : matches.pairs) {
    const Vec2 pa = T.apply(Vec2(a[c.a].x, a[c.a].y));
    acc += (pa - Vec2(b[c.b].x, b[c.b].y)).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(matches.size()));
}

TextureImage resample_rigid(const TextureImage& probe, const RigidTransform2D& T, int out_width,
                            int out_height) {
  TextureImage out = TextureImage::blank(out_width, out_height, probe.pitch, Vec2::Zero());
  const RigidTransform2D inv = T.inverse();
  parallel_for(static_cast<std::size_t>(out_height), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t row = r0; row < r1; ++row) {
      for (int col = 0; col < out_width; ++col) {
        const Vec2 src = inv.apply(Vec2(col, static_cast<double>(row)));
        double val;
        if (sample_bilinear(probe, src.x(), src.y(), val)) {
          const std::size_t i = out.idx(col, static_cast<int>(row));
          out.values[i] = val;
          out.mask[i] = 1;
        }
      }
    }
  });
  return out;
}

std::vector<Minutia> transform_minutiae(const std::vector<Minutia>& m,
                                        const RigidTransform2D& T) {
  std::vector<Minutia> out = m;
  for (auto& mm : out) {
    const Vec2 p = T.apply(Vec2(mm.x, mm.y));
    mm.x = p.x();
    mm.y = p.y();
    mm.theta = wrap_angle(mm.theta + T.phi);
  }
  return out;
}

std::string rigid2d_to_json(const RigidTransform2D& T) {
  nlohmann::json j;
  j["phi"] = T.phi;
  j["tx"] = T.t.x();
  j["ty"] = T.t.y();
  return j.dump(2);
}

RigidTransform2D rigid2d_from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    RigidTransform2D T;
    T.phi = j.at("phi").get<double>();
    T.t = Vec2(j.at("tx").get<double>(), j.at("ty").get<double>());
    return T;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("rigid transform JSON: ") + e.what());
  }
}

}  // namespace fp3d
