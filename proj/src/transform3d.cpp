#include "fp3d/transform3d.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/LU>
#include <json.hpp>

namespace fp3d {

void ScaledRigidTransform3D::validate() const {
  if (!(k > 0.0)) throw Error(ErrorCode::validation, "scale must be positive");
  const double ortho = (R.transpose() * R - Mat3::Identity()).norm();
  if (ortho > 1e-9) throw Error(ErrorCode::validation, "rotation is not orthonormal");
  if (std::abs(R.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorCode::validation, "rotation determinant is not +1");
  }
}

Mat3 rotation_x(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Mat3 rotation_y(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

Mat3 rotation_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double tr = (a.transpose() * b).trace();
  return std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0));
}

FingerPointCloud apply_transform(const FingerPointCloud& cloud,
                                 const ScaledRigidTransform3D& T) {
  T.validate();
  FingerPointCloud out;
  out.points.resize(cloud.size());
  out.confidence = cloud.confidence;
  for (std::size_t i = 0; i < cloud.size(); ++i) out.points[i] = T.apply(cloud.points[i]);
  validate_cloud(out);
  return out;
}

FingerPointCloud recenter_z(const FingerPointCloud& cloud) {
  double zsum = 0.0;
  for (const auto& p : cloud.points) zsum += p.z();
  const double zmean = cloud.size() ? zsum / static_cast<double>(cloud.size()) : 0.0;
  FingerPointCloud out = cloud;
  for (auto& p : out.points) p.z() -= zmean;
  return out;
}

std::string transform_to_json(const ScaledRigidTransform3D& T) {
  nlohmann::json j;
  j["k"] = T.k;
  std::vector<double> r(9);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) r[i * 3 + c] = T.R(i, c);
  j["R"] = r;
  j["t"] = {T.t.x(), T.t.y(), T.t.z()};
  return j.dump(2);
}

ScaledRigidTransform3D transform_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("transform JSON: ") + e.what());
  }
  ScaledRigidTransform3D T;
  try {
    T.k = j.at("k").get<double>();
    auto r = j.at("R").get<std::vector<double>>();
    if (r.size() != 9) throw Error(ErrorCode::parse, "transform JSON: R must have 9 entries");
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 3; ++c) T.R(i, c) = r[i * 3 + c];
    auto t = j.at("t").get<std::vector<double>>();
    if (t.size() != 3) throw Error(ErrorCode::parse, "transform JSON: t must have 3 entries");
    T.t = Vec3(t[0], t[1], t[2]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("transform JSON: ") + e.what());
  }
  T.validate();
  return T;
}

void save_transform(const ScaledRigidTransform3D& T, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << transform_to_json(T) << "\n";
}

ScaledRigidTransform3D load_transform(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return transform_from_json(text);
}

}  // namespace fp3d
