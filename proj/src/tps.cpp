#include "fp3d/tps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

namespace fp3d {

namespace {

inline double kernel(double r2) {
  // r^2 log r written on the squared distance; limit 0 at r = 0.
  return r2 > 1e-300 ? 0.5 * r2 * std::log(r2) : 0.0;
}

}  // namespace

Vec2 TpsField::evaluate(const Vec2& p) const {
  Vec2 out = affine_ * Eigen::Vector3d(1.0, p.x(), p.y());
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const double u = kernel((p - sources_[i]).squaredNorm());
    out.x() += weights_(static_cast<Eigen::Index>(i), 0) * u;
    out.y() += weights_(static_cast<Eigen::Index>(i), 1) * u;
  }
  return out;
}

double TpsField::bending_energy() const {
  const Eigen::Index n = weights_.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double u = kernel((sources_[i] - sources_[j]).squaredNorm());
      acc += u * (weights_(i, 0) * weights_(j, 0) + weights_(i, 1) * weights_(j, 1));
    }
  }
  return acc;
}

TpsField fit_tps(const std::vector<Vec2>& sources, const std::vector<Vec2>& targets,
                 double lambda) {
  if (sources.size() != targets.size()) {
    throw Error(ErrorCode::geometry_mismatch, "control point counts differ");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(sources.size());
  if (n < 3) throw Error(ErrorCode::insufficient_pairs, "TPS needs at least 3 control points");
  if (lambda < 0.0) throw Error(ErrorCode::validation, "lambda must be nonnegative");

  // Collinearity check on the sources.
  Vec2 c = Vec2::Zero();
  for (const auto& s : sources) c += s;
  c /= static_cast<double>(n);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& s : sources) {
    const Vec2 d = s - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  if (!(eig.eigenvalues()[1] > 0.0) || eig.eigenvalues()[0] / eig.eigenvalues()[1] < 1e-12) {
    throw Error(ErrorCode::degenerate_points, "control points are collinear");
  }

  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + 3, n + 3);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system(i, j) = kernel((sources[i] - sources[j]).squaredNorm());
    }
    system(i, i) += lambda;
    system(i, n) = 1.0;
    system(i, n + 1) = sources[i].x();
    system(i, n + 2) = sources[i].y();
    system(n, i) = 1.0;
    system(n + 1, i) = sources[i].x();
    system(n + 2, i) = sources[i].y();
    rhs(i, 0) = targets[i].x();
    rhs(i, 1) = targets[i].y();
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw Error(ErrorCode::internal, "singular TPS system");
  const Eigen::MatrixXd sol = lu.solve(rhs);

  TpsField field;
  field.sources_ = sources;
  field.targets_ = targets;
  field.lambda_ = lambda;
  field.weights_ = sol.topRows(n);
  field.affine_.col(0) = sol.row(n).transpose();
  field.affine_.col(1) = sol.row(n + 1).transpose();
  field.affine_.col(2) = sol.row(n + 2).transpose();
  return field;
}

DeformationStats deformation_stats(const TpsField& field,
                                   const std::vector<std::uint8_t>& region_mask, int width,
                                   int height, double pitch_mm_per_px, int sample_step_px) {
  if (width <= 0 || height <= 0 ||
      region_mask.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::geometry_mismatch, "region mask does not match lattice");
  }
  if (sample_step_px < 1) sample_step_px = 1;

  DeformationStats stats;
  std::vector<double> mags;
  for (int row = 0; row < height; row += sample_step_px) {
    for (int col = 0; col < width; col += sample_step_px) {
      if (!region_mask[static_cast<std::size_t>(row) * width + col]) continue;
      const Vec2 p(col, row);
      const Vec2 d = field.displacement(p);
      mags.push_back(d.norm());
      stats.arrows.push_back({static_cast<double>(col), static_cast<double>(row), d.x(), d.y()});
    }
  }
  if (mags.empty()) throw Error(ErrorCode::empty_region, "no samples inside the region");

  stats.samples = mags.size();
  stats.max_px = *std::max_element(mags.begin(), mags.end());
  stats.median_px = percentile(mags, 50.0);
  double acc = 0.0;
  for (double m : mags) acc += m;
  stats.mean_px = acc / static_cast<double>(mags.size());
  stats.mean_mm = stats.mean_px * pitch_mm_per_px;
  stats.median_mm = stats.median_px * pitch_mm_per_px;
  stats.max_mm = stats.max_px * pitch_mm_per_px;
  return stats;
}

void save_arrows_csv(const DeformationStats& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "x,y,dx,dy\n";
  for (const auto& a : stats.arrows) {
    out << a.x << "," << a.y << "," << a.dx << "," << a.dy << "\n";
  }
}

void save_arrows_svg(const DeformationStats& stats, int width, int height,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& a : stats.arrows) {
    const double x2 = a.x + a.dx, y2 = a.y + a.dy;
    out << "<line x1=\"" << a.x << "\" y1=\"" << a.y << "\" x2=\"" << x2 << "\" y2=\"" << y2
        << "\" stroke=\"crimson\" stroke-width=\"1\"/>\n";
    out << "<circle cx=\"" << a.x << "\" cy=\"" << a.y << "\" r=\"1.2\" fill=\"navy\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace fp3d
