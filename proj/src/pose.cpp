#include "fp3d/pose.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace fp3d {

Vec2 project_orthographic(const ScaledRigidTransform3D& T, const Vec3& p) {
  const Vec3 q = T.apply(p);
  return Vec2(q.x(), q.y());
}

double pose_residual(const ScaledRigidTransform3D& T, const Lifted3D2DPairs& pairs) {
  if (pairs.size() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    acc += (project_orthographic(T, pairs.cloud_points[i]) - pairs.flat_points[i]).norm();
  }
  return acc / static_cast<double>(pairs.size());
}

Lifted3D2DPairs lift_correspondences(const CorrespondenceSet& matches, const UnfoldMap& map,
                                     const FingerPointCloud& cloud,
                                     const std::vector<Minutia>& unfolded_minutiae,
                                     const std::vector<Minutia>& flat_minutiae,
                                     double flat_pitch_mm, std::vector<int>* dropped) {
  if (!(flat_pitch_mm > 0.0)) throw Error(ErrorCode::validation, "pitch must be positive");
  Lifted3D2DPairs out;
  for (const auto& c : matches.pairs) {
    const Minutia& um = unfolded_minutiae.at(c.a);
    const Minutia& fm = flat_minutiae.at(c.b);
    const int col = static_cast<int>(std::lround(um.x));
    const int row = static_cast<int>(std::lround(um.y));
    std::int32_t point_id = -1;
    if (col >= 0 && col < map.dst_width && row >= 0 && row < map.dst_height) {
      point_id = map.provenance[map.didx(col, row)];
    }
    if (point_id < 0 || point_id >= static_cast<std::int32_t>(cloud.size())) {
      if (dropped) dropped->push_back(c.a);
      continue;
    }
    out.cloud_points.push_back(cloud.points[point_id]);
    out.flat_points.push_back(Vec2(fm.x * flat_pitch_mm, fm.y * flat_pitch_mm));
  }
  if (out.size() < kMinPosePairs) {
    throw Error(ErrorCode::insufficient_pairs,
                "pose estimation needs at least 6 matching points, have " +
                    std::to_string(out.size()));
  }
  return out;
}

namespace {

Mat3 skew_matrix(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 rodrigues(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-16) return Mat3::Identity() + skew_matrix(w);
  Eigen::AngleAxisd aa(angle, Vec3(w / angle));
  return aa.toRotationMatrix();
}

struct PoseParams {
  double k;
  Mat3 R;
  Vec2 t;  // t_z fixed at 0
};

double cost_of(const PoseParams& p, const Eigen::Matrix3Xd& P, const Eigen::Matrix2Xd& q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < P.cols(); ++i) {
    const Vec3 rp = p.R * P.col(i);
    const Vec2 pred(p.k * (rp.x() + p.t.x()), p.k * (rp.y() + p.t.y()));
    acc += (pred - q.col(i)).squaredNorm();
  }
  return acc;
}

/// Gauss-Newton on (k, rotation, t_xy) with backtracking line search; the
/// returned cost never exceeds the initial cost.
PoseParams refine(PoseParams p, const Eigen::Matrix3Xd& P, const Eigen::Matrix2Xd& q,
                  const PoseEstimateConfig& config, double* final_cost) {
  const Eigen::Index n = P.cols();
  double cost = cost_of(p, P, q);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec3 rp = p.R * P.col(i);
      const Vec2 pred(p.k * (rp.x() + p.t.x()), p.k * (rp.y() + p.t.y()));
      const Vec2 r = pred - q.col(i);
      Eigen::Matrix<double, 2, 6> jac;
      // columns: k, w0, w1, w2, tx, ty
      jac(0, 0) = rp.x() + p.t.x();
      jac(1, 0) = rp.y() + p.t.y();
      const Mat3 dw = -p.k * skew_matrix(rp);  // d(k*exp(w)R P)/dw, top rows
      jac.block<2, 3>(0, 1) = dw.topRows<2>();
      jac(0, 4) = p.k;
      jac(0, 5) = 0.0;
      jac(1, 4) = 0.0;
      jac(1, 5) = p.k;
      h.noalias() += jac.transpose() * jac;
      g.noalias() += jac.transpose() * r;
    }
    if (g.norm() < 1e-14 * std::max(1.0, cost)) break;
    const Eigen::Matrix<double, 6, 1> step = h.ldlt().solve(-g);
    if (!step.allFinite()) break;

    bool improved = false;
    double alpha = 1.0;
    for (int bt = 0; bt < 24; ++bt, alpha *= 0.5) {
      PoseParams trial = p;
      trial.k = p.k + alpha * step[0];
      trial.R = rodrigues(alpha * Vec3(step[1], step[2], step[3])) * p.R;
      trial.t = p.t + alpha * Vec2(step[4], step[5]);
      if (!(trial.k > 0.0)) continue;
      const double trial_cost = cost_of(trial, P, q);
      if (trial_cost < cost) {
        p = trial;
        const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
        cost = trial_cost;
        improved = true;
        if (rel < config.tolerance) iter = config.max_iterations;  // converged
        break;
      }
    }
    if (!improved) break;
  }
  if (final_cost) *final_cost = cost;
  return p;
}

ScaledRigidTransform3D solve_pose(const Eigen::Matrix3Xd& P_in, const Eigen::Matrix2Xd& q_in,
                                  const PoseEstimateConfig& config) {
  const Vec3 pc = P_in.rowwise().mean();
  const Vec2 qc = q_in.rowwise().mean();
  Eigen::Matrix3Xd P = P_in.colwise() - pc;
  Eigen::Matrix2Xd q = q_in.colwise() - qc;

  Eigen::JacobiSVD<Eigen::Matrix3Xd> shape_svd(P, Eigen::ComputeThinU);
  const Eigen::Vector3d sv = shape_svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] / sv[0] < 1e-8) {
    throw Error(ErrorCode::degenerate_points, "3D points are collinear");
  }

  // Least-squares 2x3 map from centered 3D to centered 2D; SVD solve keeps
  // near-planar sets well behaved.
  Eigen::JacobiSVD<Eigen::MatrixXd> lsq(P.transpose(),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::Matrix<double, 2, 3> a = lsq.solve(q.transpose()).transpose();

  Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> fac(a,
                                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double k0 = 0.5 * (fac.singularValues()[0] + fac.singularValues()[1]);
  if (!(k0 > 1e-12)) throw Error(ErrorCode::degenerate_points, "projection scale collapsed");
  Eigen::Matrix<double, 2, 3> r2 =
      fac.matrixU() * fac.matrixV().leftCols<2>().transpose();

  auto assemble = [&](const Eigen::Matrix<double, 2, 3>& top) {
    PoseParams p;
    p.k = k0;
    p.R.row(0) = top.row(0);
    p.R.row(1) = top.row(1);
    p.R.row(2) = top.row(0).cross(top.row(1));
    p.t = Vec2::Zero();  // working on centered data
    return p;
  };

  double cost_a;
  PoseParams best = refine(assemble(r2), P, q, config, &cost_a);

  // Near-planar data admits a depth-reversed twin: reflecting the 3D points
  // through their own plane leaves the projections unchanged. Refine both and
  // keep the better; on an exact tie prefer the pose that keeps the sensor
  // side of the patch facing +z.
  if (sv[2] / sv[0] < 1e-6) {
    Vec3 m = shape_svd.matrixU().col(2);
    if (m.z() < 0.0) m = -m;
    const Mat3 reflect = Mat3::Identity() - 2.0 * m * m.transpose();
    double cost_b;
    PoseParams twin = refine(assemble(r2 * reflect), P, q, config, &cost_b);
    const bool tie = std::abs(cost_a - cost_b) <= 1e-12 * std::max(1.0, cost_a);
    if (tie) {
      if ((twin.R * m).z() > (best.R * m).z()) best = twin;
    } else if (cost_b < cost_a) {
      best = twin;
    }
  }

  // Undo the centering: q = k(R(P0 - pc) + t') + qc; t_z stays 0 because the
  // projection never observes it.
  ScaledRigidTransform3D T;
  T.k = best.k;
  T.R = best.R;
  const Vec3 rpc = best.R * pc;
  T.t = Vec3(best.t.x() - rpc.x() + qc.x() / best.k, best.t.y() - rpc.y() + qc.y() / best.k,
             0.0);
  T.validate();
  return T;
}

}  // namespace

ScaledRigidTransform3D estimate_pose(const Lifted3D2DPairs& pairs,
                                     const PoseEstimateConfig& config) {
  if (pairs.size() < kMinPosePairs) {
    throw Error(ErrorCode::insufficient_pairs,
                "pose estimation needs at least 6 matching points, have " +
                    std::to_string(pairs.size()));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  Eigen::Matrix3Xd P(3, n);
  Eigen::Matrix2Xd q(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!pairs.cloud_points[i].allFinite() || !pairs.flat_points[i].allFinite()) {
      throw Error(ErrorCode::validation, "non-finite pair");
    }
    P.col(i) = pairs.cloud_points[i];
    q.col(i) = pairs.flat_points[i];
  }

  ScaledRigidTransform3D T = solve_pose(P, q, config);

  if (config.trim_outliers && pairs.size() > kMinPosePairs) {
    std::vector<double> res(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      res[i] = (project_orthographic(T, pairs.cloud_points[i]) - pairs.flat_points[i]).norm();
    }
    const double med = percentile(res, 50.0);
    Lifted3D2DPairs kept;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (res[i] <= 3.0 * med || med == 0.0) {
        kept.cloud_points.push_back(pairs.cloud_points[i]);
        kept.flat_points.push_back(pairs.flat_points[i]);
      }
    }
    if (kept.size() >= kMinPosePairs && kept.size() < pairs.size()) {
      Eigen::Matrix3Xd P2(3, static_cast<Eigen::Index>(kept.size()));
      Eigen::Matrix2Xd q2(2, static_cast<Eigen::Index>(kept.size()));
      for (std::size_t i = 0; i < kept.size(); ++i) {
        P2.col(static_cast<Eigen::Index>(i)) = kept.cloud_points[i];
        q2.col(static_cast<Eigen::Index>(i)) = kept.flat_points[i];
      }
      T = solve_pose(P2, q2, config);
    }
  }
  return T;
}

}  // namespace fp3d
