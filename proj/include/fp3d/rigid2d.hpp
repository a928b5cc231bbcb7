#pragma once

#include <string>
#include <vector>

#include "fp3d/common.hpp"
#include "fp3d/image.hpp"
#include "fp3d/minutia.hpp"
#include "fp3d/spectral.hpp"

namespace fp3d {

/// In-plane rigid motion q = Rot(phi) * p + t, pixel units. No scale, no
/// reflection.
struct RigidTransform2D {
  double phi = 0.0;
  Vec2 t = Vec2::Zero();

  Vec2 apply(const Vec2& p) const {
    const double c = std::cos(phi), s = std::sin(phi);
    return Vec2(c * p.x() - s * p.y() + t.x(), s * p.x() + c * p.y() + t.y());
  }

  RigidTransform2D inverse() const {
    RigidTransform2D inv;
    inv.phi = -phi;
    const double c = std::cos(phi), s = std::sin(phi);
    inv.t = Vec2(-(c * t.x() + s * t.y()), -(-s * t.x() + c * t.y()));
    return inv;
  }
};

/// Least-squares rotation + translation from matched minutiae positions
/// (orthogonal Procrustes without scale, reflection suppressed). Requires at
/// least 2 pairs with spread; throws Error(degenerate_points) otherwise.
RigidTransform2D estimate_rigid_2d(const CorrespondenceSet& matches,
                                   const std::vector<Minutia>& a, const std::vector<Minutia>& b);

/// Mean distance between T(a) and b over the matched pairs, px.
double rigid_residual_rms(const RigidTransform2D& T, const CorrespondenceSet& matches,
                          const std::vector<Minutia>& a, const std::vector<Minutia>& b);

/// Resamples probe into the target frame: output pixel p takes the probe
/// value at T^-1(p). Lattices share the pixel pitch.
TextureImage resample_rigid(const TextureImage& probe, const RigidTransform2D& T, int out_width,
                            int out_height);

std::vector<Minutia> transform_minutiae(const std::vector<Minutia>& m, const RigidTransform2D& T);

std::string rigid2d_to_json(const RigidTransform2D& T);
RigidTransform2D rigid2d_from_json(const std::string& text);

}  // namespace fp3d
