#include "fp3d/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace fp3d {

CorrespondenceSet spectral_match(const std::vector<Minutia>& a, const std::vector<Minutia>& b,
                                 const Eigen::MatrixXd& similarity,
                                 const SpectralConfig& config) {
  if (similarity.rows() != static_cast<Eigen::Index>(a.size()) ||
      similarity.cols() != static_cast<Eigen::Index>(b.size())) {
    throw Error(ErrorCode::geometry_mismatch, "similarity matrix does not match minutiae counts");
  }
  CorrespondenceSet out;
  if (a.empty() || b.empty()) return out;

  // Candidate assignments: per probe minutia, the top-K gallery matches.
  struct Cand {
    int a, b;
    double sim;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    std::vector<int> order(b.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      if (similarity(i, x) != similarity(i, y)) return similarity(i, x) > similarity(i, y);
      return x < y;
    });
    const int k = std::min<int>(config.top_k, static_cast<int>(b.size()));
    for (int j = 0; j < k; ++j) {
      const double s = similarity(i, order[j]);
      if (s >= config.min_similarity) cands.push_back({i, order[j], s});
    }
  }
  if (cands.empty()) return out;

  const int n = static_cast<int>(cands.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double s2d = 2.0 * config.sigma_distance * config.sigma_distance;
  const double s2a = 2.0 * config.sigma_angle * config.sigma_angle;
  const double dist_gate = 3.0 * config.sigma_distance;
  for (int i = 0; i < n; ++i) {
    m(i, i) = cands[i].sim;
    const Minutia& ai = a[cands[i].a];
    const Minutia& bi = b[cands[i].b];
    for (int j = i + 1; j < n; ++j) {
      if (cands[i].a == cands[j].a || cands[i].b == cands[j].b) continue;  // conflicting
      const Minutia& aj = a[cands[j].a];
      const Minutia& bj = b[cands[j].b];
      const double da = std::hypot(aj.x - ai.x, aj.y - ai.y);
      const double db = std::hypot(bj.x - bi.x, bj.y - bi.y);
      if (da < 1e-9 || db < 1e-9) continue;
      const double dd = std::abs(da - db);
      if (dd > dist_gate) continue;
      const double line_a = std::atan2(aj.y - ai.y, aj.x - ai.x);
      const double line_b = std::atan2(bj.y - bi.y, bj.x - bi.x);
      const double d_alpha = angle_diff(angle_diff(ai.theta, line_a), angle_diff(bi.theta, line_b));
      const double d_beta = angle_diff(angle_diff(aj.theta, line_a), angle_diff(bj.theta, line_b));
      const double w = std::exp(-dd * dd / s2d) *
                       std::exp(-(d_alpha * d_alpha + d_beta * d_beta) / s2a);
      m(i, j) = w;
      m(j, i) = w;
    }
  }

  // Principal eigenvector by power iteration; M is nonnegative so the vector
  // stays elementwise nonnegative from a positive start.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (int it = 0; it < config.max_power_iterations; ++it) {
    Eigen::VectorXd next = m * x;
    const double norm = next.norm();
    if (norm < 1e-300) return out;
    next /= norm;
    const double delta = (next - x).norm();
    x = next;
    if (delta < config.power_tolerance) break;
  }

  const double x_max = x.maxCoeff();
  if (!(x_max > 0.0)) return out;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (x[i] != x[j]) return x[i] > x[j];
    if (cands[i].a != cands[j].a) return cands[i].a < cands[j].a;
    return cands[i].b < cands[j].b;
  });

  std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
  for (int id : order) {
    if (x[id] < config.accept_ratio * x_max) break;
    if (used_a[cands[id].a] || used_b[cands[id].b]) continue;
    used_a[cands[id].a] = 1;
    used_b[cands[id].b] = 1;
    out.pairs.push_back({cands[id].a, cands[id].b, clamp01(x[id] / x_max)});
  }
  return out;
}

void save_correspondences(const CorrespondenceSet& set, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : set.pairs) {
    j.push_back({{"a", c.a}, {"b", c.b}, {"score", c.score}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << j.dump(2) << "\n";
}

CorrespondenceSet load_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  CorrespondenceSet set;
  try {
    nlohmann::json j;
    in >> j;
    for (const auto& e : j) {
      Correspondence c;
      c.a = e.at("a").get<int>();
      c.b = e.at("b").get<int>();
      if (e.contains("score")) c.score = e["score"].get<double>();
      set.pairs.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
  return set;
}

}  // namespace fp3d
