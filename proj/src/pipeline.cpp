#include "fp3d/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fp3d {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Nearest valid unfolded pixel within a small window, or -1.
int nearest_valid_dst(const UnfoldMap& map, double col, double row, int radius) {
  const int c0 = static_cast<int>(std::lround(col));
  const int r0 = static_cast<int>(std::lround(row));
  int best = -1;
  double best_d2 = 1e18;
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      const int c = c0 + dc, r = r0 + dr;
      if (c < 0 || c >= map.dst_width || r < 0 || r >= map.dst_height) continue;
      const std::size_t i = map.didx(c, r);
      if (!map.dst_mask[i] || map.provenance[i] < 0) continue;
      const double d2 = (c - col) * (c - col) + (r - row) * (r - row);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(i);
      }
    }
  }
  return best;
}

}  // namespace

UnfoldPass run_unfold_pass(const FingerPointCloud& base, const ScaledRigidTransform3D& T,
                           const std::vector<Minutia3D>& rolled, const PipelineConfig& config) {
  UnfoldPass pass;
  const FingerPointCloud transformed = apply_transform(base, T);
  double zsum = 0.0;
  for (const auto& p : transformed.points) zsum += p.z();
  const double zshift = transformed.size() ? zsum / static_cast<double>(transformed.size()) : 0.0;
  pass.cloud = transformed;
  for (auto& p : pass.cloud.points) p.z() -= zshift;

  pass.render = render(pass.cloud, config.render);
  const HeightGrid grid =
      height_from_provenance(pass.cloud, pass.render.image, pass.render.provenance);
  pass.field = smooth_height(grid, config.smooth_sigma, pass.render.image.pitch,
                             pass.render.image.origin);
  const Vec3 centroid = pass.cloud.centroid();
  pass.unfolded = unfold(pass.field, pass.render.image, &pass.render.provenance,
                         Vec2(centroid.x(), centroid.y()));

  const UnfoldMap& map = pass.unfolded.map;
  const TextureImage& src = pass.render.image;
  for (std::size_t i = 0; i < rolled.size(); ++i) {
    const Vec3 p = T.apply(rolled[i].position) - Vec3(0.0, 0.0, zshift);
    const double src_col = (p.x() - src.origin.x()) / src.pitch;
    const double src_row = (p.y() - src.origin.y()) / src.pitch;
    Vec2 uv;
    if (!map.forward(src_col, src_row, uv)) {
      ++pass.minutiae_dropped;
      continue;
    }
    double dst_col = (uv.x() - map.dst_origin.x()) / map.pitch;
    double dst_row = (uv.y() - map.dst_origin.y()) / map.pitch;
    // Occluded or hole-adjacent minutiae snap to the nearest carried pixel.
    const int c0 = static_cast<int>(std::lround(dst_col));
    const int r0 = static_cast<int>(std::lround(dst_row));
    bool on_valid = c0 >= 0 && c0 < map.dst_width && r0 >= 0 && r0 < map.dst_height &&
                    map.dst_mask[map.didx(c0, r0)] && map.provenance[map.didx(c0, r0)] >= 0;
    if (!on_valid) {
      const int snapped = nearest_valid_dst(map, dst_col, dst_row, 3);
      if (snapped < 0) {
        ++pass.minutiae_dropped;
        continue;
      }
      dst_col = static_cast<double>(snapped % map.dst_width);
      dst_row = static_cast<double>(snapped / map.dst_width);
    }

    const Vec3 dir3 = T.R * rolled[i].direction;
    Vec2 expansion(1.0, 1.0);
    map.expansion(src_col, src_row, expansion);
    const double dx = dir3.x() * expansion.x();
    const double dy = dir3.y() * expansion.y();
    Minutia m;
    m.x = dst_col;
    m.y = dst_row;
    m.theta = (std::abs(dx) + std::abs(dy) > 1e-12) ? wrap_angle(std::atan2(dy, dx)) : 0.0;
    m.quality = rolled[i].quality;
    pass.minutiae.push_back(m);
    pass.minutiae_source.push_back(static_cast<int>(i));
  }
  return pass;
}

FlatReference make_flat_reference(const FingerPointCloud& frontal_cloud,
                                  const std::vector<Minutia3D>& minutiae3d,
                                  const PipelineConfig& config) {
  const UnfoldPass pass = run_unfold_pass(frontal_cloud, ScaledRigidTransform3D::identity(),
                                          minutiae3d, config);
  FlatReference flat;
  flat.image = pass.unfolded.image;
  flat.minutiae = pass.minutiae;
  flat.mask = flat.image;
  for (std::size_t i = 0; i < flat.mask.values.size(); ++i) {
    flat.mask.values[i] = flat.image.mask[i] ? 1.0 : 0.0;
    flat.mask.mask[i] = 1;
  }
  return flat;
}

TextureImage crop_by_segmentation(const TextureImage& image, const TextureImage& mask) {
  if (mask.width != image.width || mask.height != image.height) {
    throw Error(ErrorCode::geometry_mismatch, "segmentation mask lattice differs from image");
  }
  std::size_t fg = 0, overlap = 0;
  TextureImage out = image;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const bool inside = mask.mask[i] && mask.values[i] >= 0.5;
    if (inside) ++fg;
    if (inside && image.mask[i]) ++overlap;
    if (!inside) out.mask[i] = 0;
  }
  if (fg == 0) throw Error(ErrorCode::empty_region, "segmentation mask is empty");
  if (overlap == 0) throw Error(ErrorCode::empty_region, "segmentation mask disjoint from image");
  return out;
}

namespace {

struct VariantArtifacts {
  TextureImage registered;
  TextureImage cropped;
  DeformationStats stats;
};

VariantReport evaluate_variant(const UnfoldPass& pass, const CorrespondenceSet& matches,
                               const std::vector<Minutia>& flat_minutiae,
                               const TextureImage& flat_mask, const PipelineConfig& config,
                               const std::string& tag) {
  VariantReport rep;
  rep.matched = static_cast<int>(matches.size());
  if (matches.size() < 2) {
    rep.note = "fewer than 2 correspondences; registration skipped";
    return rep;
  }
  rep.registration = estimate_rigid_2d(matches, pass.minutiae, flat_minutiae);

  double mean_res = 0.0;
  for (const auto& c : matches.pairs) {
    const Vec2 pa = rep.registration.apply(Vec2(pass.minutiae[c.a].x, pass.minutiae[c.a].y));
    mean_res += (pa - Vec2(flat_minutiae[c.b].x, flat_minutiae[c.b].y)).norm();
  }
  mean_res /= static_cast<double>(matches.size());
  rep.rigid_residual_px = mean_res;
  rep.proxy_score = static_cast<double>(matches.size()) / (1.0 + mean_res);

  TextureImage registered = resample_rigid(pass.unfolded.image, rep.registration,
                                           flat_mask.width, flat_mask.height);
  TextureImage cropped = crop_by_segmentation(registered, flat_mask);

  // TPS between the registered probe minutiae and the flat minutiae.
  if (matches.size() >= 3) {
    std::vector<Vec2> src, dst;
    for (const auto& c : matches.pairs) {
      src.push_back(rep.registration.apply(Vec2(pass.minutiae[c.a].x, pass.minutiae[c.a].y)));
      dst.push_back(Vec2(flat_minutiae[c.b].x, flat_minutiae[c.b].y));
    }
    try {
      const TpsField field = fit_tps(src, dst, config.tps_lambda);
      std::vector<std::uint8_t> region(cropped.mask.begin(), cropped.mask.end());
      const DeformationStats stats =
          deformation_stats(field, region, cropped.width, cropped.height, cropped.pitch,
                            config.arrow_step_px);
      rep.tps_mean_px = stats.mean_px;
      rep.tps_median_px = stats.median_px;
      rep.tps_max_px = stats.max_px;
      rep.tps_mean_mm = stats.mean_mm;
      rep.tps_median_mm = stats.median_mm;
      rep.tps_max_mm = stats.max_mm;
      if (!config.output_dir.empty()) {
        save_arrows_csv(stats, config.output_dir + "/" + tag + "_deformation.csv");
        save_arrows_svg(stats, cropped.width, cropped.height,
                        config.output_dir + "/" + tag + "_deformation.svg");
      }
    } catch (const Error& e) {
      rep.note = std::string("TPS skipped: ") + e.what();
    }
  } else {
    rep.note = "fewer than 3 correspondences; TPS skipped";
  }

  if (!config.output_dir.empty() && config.write_images) {
    save_pgm(registered, config.output_dir + "/" + tag + "_registered.pgm");
    save_pgm(cropped, config.output_dir + "/" + tag + "_cropped.pgm");
  }
  rep.present = true;
  return rep;
}

nlohmann::json variant_json(const VariantReport& v) {
  nlohmann::json j;
  j["present"] = v.present;
  j["matched"] = v.matched;
  if (v.present) {
    j["rigid_residual_px"] = v.rigid_residual_px;
    j["proxy_score"] = v.proxy_score;
    j["registration"] = {{"phi", v.registration.phi},
                         {"tx", v.registration.t.x()},
                         {"ty", v.registration.t.y()}};
    j["tps"] = {{"mean_px", v.tps_mean_px},   {"median_px", v.tps_median_px},
                {"max_px", v.tps_max_px},     {"mean_mm", v.tps_mean_mm},
                {"median_mm", v.tps_median_mm}, {"max_mm", v.tps_max_mm}};
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

}  // namespace

std::string PipelineReport::to_json(bool include_timings) const {
  nlohmann::json j;
  if (include_timings) {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& [name, ms] : timings_ms) ts.push_back({{"stage", name}, {"ms", ms}});
    j["timings"] = ts;
  }
  j["cloud_points"] = cloud_points;
  j["roll_minutiae"] = roll_minutiae;
  j["flat_minutiae"] = flat_minutiae;
  j["general_correspondences"] = general_correspondences;
  j["specific_correspondences"] = specific_correspondences;
  j["lifted_pairs"] = lifted_pairs;
  j["pose_ok"] = pose_ok;
  if (!pose_failure_reason.empty()) j["pose_failure_reason"] = pose_failure_reason;
  if (pose_ok) j["pose"] = nlohmann::json::parse(transform_to_json(pose));
  j["general"] = variant_json(general);
  j["specific"] = variant_json(specific);
  if (!error.empty()) j["error"] = error;
  return j.dump(2);
}

PipelineReport run_pipeline(const FingerPointCloud& cloud,
                            const std::vector<Minutia3D>& roll_minutiae,
                            const std::vector<Minutia>& flat_minutiae,
                            const TextureImage& flat_mask, const PipelineConfig& config) {
  PipelineReport rep;
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
  }
  auto finish_stage = [&rep](const char* name, Clock::time_point t0) {
    rep.timings_ms.emplace_back(name, ms_since(t0));
  };
  auto guard = [&](const char* stage, auto&& fn) {
    const auto t0 = Clock::now();
    try {
      fn();
    } catch (const Error& e) {
      finish_stage(stage, t0);
      rep.error = std::string(stage) + ": " + e.what();
      if (!config.output_dir.empty()) {
        std::ofstream out(config.output_dir + "/report.json");
        out << rep.to_json() << "\n";
      }
      throw StageError(stage, e);
    }
    finish_stage(stage, t0);
  };

  rep.cloud_points = static_cast<int>(cloud.size());
  rep.roll_minutiae = static_cast<int>(roll_minutiae.size());
  rep.flat_minutiae = static_cast<int>(flat_minutiae.size());

  FingerPointCloud base;
  guard("prepare", [&] { base = recenter_z(cloud); });

  UnfoldPass general;
  guard("general_unfold", [&] {
    general = run_unfold_pass(base, ScaledRigidTransform3D::identity(), roll_minutiae, config);
    if (!config.output_dir.empty() && config.write_images) {
      save_texture(general.unfolded.image, nullptr, config.output_dir + "/general_unfolded");
      save_unfold_map(general.unfolded.map, config.output_dir + "/general_unfolded.map");
      save_minutiae(general.minutiae, config.output_dir + "/general_minutiae.jsonl");
    }
  });

  CorrespondenceSet general_matches;
  guard("match", [&] {
    const Eigen::MatrixXd sim =
        similarity_matrix(general.minutiae, flat_minutiae, config.descriptor);
    general_matches = spectral_match(general.minutiae, flat_minutiae, sim, config.spectral);
    rep.general_correspondences = static_cast<int>(general_matches.size());
    if (!config.output_dir.empty()) {
      save_correspondences(general_matches, config.output_dir + "/general_correspondences.json");
    }
  });

  // 3D pose estimation: failure here is a flagged, recoverable outcome.
  {
    const auto t0 = Clock::now();
    try {
      Lifted3D2DPairs pairs =
          lift_correspondences(general_matches, general.unfolded.map, general.cloud,
                               general.minutiae, flat_minutiae, config.render.pitch);
      rep.lifted_pairs = static_cast<int>(pairs.size());
      rep.pose = estimate_pose(pairs, config.pose);
      rep.pose_ok = true;
      if (!config.output_dir.empty()) {
        save_transform(rep.pose, config.output_dir + "/pose.json");
      }
    } catch (const Error& e) {
      rep.pose_ok = false;
      rep.pose_failure_reason = e.what();
    }
    finish_stage("pose", t0);
  }

  UnfoldPass specific;
  CorrespondenceSet specific_matches;
  if (rep.pose_ok) {
    guard("specific_unfold", [&] {
      specific = run_unfold_pass(base, rep.pose, roll_minutiae, config);
      if (!config.output_dir.empty() && config.write_images) {
        save_texture(specific.unfolded.image, nullptr, config.output_dir + "/specific_unfolded");
        save_unfold_map(specific.unfolded.map, config.output_dir + "/specific_unfolded.map");
        save_minutiae(specific.minutiae, config.output_dir + "/specific_minutiae.jsonl");
      }
    });
    guard("specific_match", [&] {
      const Eigen::MatrixXd sim =
          similarity_matrix(specific.minutiae, flat_minutiae, config.descriptor);
      specific_matches = spectral_match(specific.minutiae, flat_minutiae, sim, config.spectral);
      rep.specific_correspondences = static_cast<int>(specific_matches.size());
    });
  }

  guard("register_crop_tps", [&] {
    rep.general = evaluate_variant(general, general_matches, flat_minutiae, flat_mask, config,
                                   "general");
    if (rep.pose_ok) {
      rep.specific = evaluate_variant(specific, specific_matches, flat_minutiae, flat_mask,
                                      config, "specific");
    }
  });

  guard("report", [&] {
    if (!config.output_dir.empty()) {
      std::ofstream out(config.output_dir + "/report.json");
      if (!out) throw Error(ErrorCode::io, "cannot write report.json");
      out << rep.to_json() << "\n";
    }
  });
  return rep;
}

PipelineReport run_pipeline(const std::string& cloud_path, const std::string& roll_minutiae_path,
                            const std::string& flat_minutiae_path,
                            const std::string& flat_mask_path, const PipelineConfig& config) {
  FingerPointCloud cloud;
  std::vector<Minutia3D> roll;
  std::vector<Minutia> flat;
  TextureImage mask;
  try {
    cloud = load_point_cloud(cloud_path);
    roll = load_minutiae3d(roll_minutiae_path);
    flat = load_minutiae(flat_minutiae_path);
    mask = load_pgm(flat_mask_path);
  } catch (const Error& e) {
    throw StageError("load", e);
  }
  return run_pipeline(cloud, roll, flat, mask, config);
}

}  // namespace fp3d
