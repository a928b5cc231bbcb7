#pragma once

#include <vector>

#include <Eigen/Core>

#include "fp3d/common.hpp"
#include "fp3d/minutia.hpp"

namespace fp3d {

struct Correspondence {
  int a = -1;
  int b = -1;
  double score = 0.0;  // in [0,1]
};

/// One-to-one on both sides by construction.
struct CorrespondenceSet {
  std::vector<Correspondence> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

struct SpectralConfig {
  int top_k = 5;                         // candidate assignments per probe minutia
  double min_similarity = 0.05;          // candidate floor on descriptor similarity
  double sigma_distance = 8.0;           // px, pairwise length agreement
  double sigma_angle = deg2rad(15.0);    // pairwise relative-angle agreement
  double accept_ratio = 0.2;             // keep entries >= ratio * max eigenvector entry
  int max_power_iterations = 500;
  double power_tolerance = 1e-12;
};

/// Pairwise-consistency spectral correspondence: candidate assignments are
/// the top-K descriptor-similar pairs; the affinity matrix carries the
/// similarity on the diagonal and geometric agreement (inter-minutia distance
/// and relative angles, Gaussian weighted) off the diagonal; the principal
/// eigenvector (power iteration) is discretized greedily one-to-one in
/// descending order, dropping entries below the acceptance threshold. An
/// empty result is a valid outcome.
CorrespondenceSet spectral_match(const std::vector<Minutia>& a, const std::vector<Minutia>& b,
                                 const Eigen::MatrixXd& similarity,
                                 const SpectralConfig& config = {});

void save_correspondences(const CorrespondenceSet& set, const std::string& path);
CorrespondenceSet load_correspondences(const std::string& path);

}  // namespace fp3d
