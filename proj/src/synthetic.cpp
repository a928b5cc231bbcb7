#include "fp3d/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace fp3d {

namespace {

/// Cross-section arc length table for the half ellipse x = a sin(alpha),
/// z = c cos(alpha), alpha in [-pi/2, pi/2]. Simpson quadrature on a dense
/// grid, linear interpolation in both directions.
class SectionArc {
 public:
  SectionArc(double a, double c) : a_(a), c_(c) {
    const int n = 8192;  // panels over [0, pi/2]
    s_.resize(n + 1);
    s_[0] = 0.0;
    const double h = (kPi / 2.0) / n;
    auto speed = [&](double alpha) {
      const double ca = std::cos(alpha), sa = std::sin(alpha);
      return std::sqrt(a_ * a_ * ca * ca + c_ * c_ * sa * sa);
    };
    for (int i = 0; i < n; ++i) {
      const double x0 = i * h, x1 = (i + 1) * h;
      s_[i + 1] = s_[i] + h / 6.0 * (speed(x0) + 4.0 * speed(0.5 * (x0 + x1)) + speed(x1));
    }
    step_ = h;
  }

  double quarter_length() const { return s_.back(); }

  /// Arc length from the top meridian (alpha = 0), signed like alpha.
  double s_of_alpha(double alpha) const {
    const double mag = std::abs(alpha);
    const double pos = std::min(mag / step_, static_cast<double>(s_.size() - 1));
    const std::size_t lo = std::min(static_cast<std::size_t>(pos), s_.size() - 2);
    const double frac = pos - static_cast<double>(lo);
    const double v = s_[lo] + frac * (s_[lo + 1] - s_[lo]);
    return alpha < 0 ? -v : v;
  }

  double alpha_of_s(double s) const {
    const double mag = std::abs(s);
    auto it = std::lower_bound(s_.begin(), s_.end(), mag);
    double v;
    if (it == s_.begin()) {
      v = 0.0;
    } else if (it == s_.end()) {
      v = kPi / 2.0;
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - s_.begin());
      const double frac = (mag - s_[hi - 1]) / (s_[hi] - s_[hi - 1]);
      v = (static_cast<double>(hi - 1) + frac) * step_;
    }
    return s < 0 ? -v : v;
  }

 private:
  double a_, c_, step_;
  std::vector<double> s_;
};

struct Profile {
  // rho(t): section scale along the axis; 1 on the shaft, elliptical taper
  // over the tip region.
  double length, tip_length;
  bool capped;

  double rho(double t) const {
    if (!capped) return 1.0;
    const double t0 = length - tip_length;
    if (t <= t0) return 1.0;
    const double q = (t - t0) / tip_length;
    return std::sqrt(std::max(0.0, 1.0 - q * q));
  }

  double drho(double t) const {
    if (!capped) return 0.0;
    const double t0 = length - tip_length;
    if (t <= t0) return 0.0;
    const double q = (t - t0) / tip_length;
    const double r = std::sqrt(std::max(1e-12, 1.0 - q * q));
    return -q / (tip_length * r);
  }
};

struct SurfaceGeom {
  double a, c;
  Profile profile;
  const SectionArc* arc;

  Vec3 point(double alpha, double t) const {
    const double r = profile.rho(t);
    return Vec3(a * r * std::sin(alpha), t, c * r * std::cos(alpha));
  }

  Vec3 outward_normal(double alpha, double t) const {
    const double r = profile.rho(t);
    const double dr = profile.drho(t);
    Vec3 n(c * std::sin(alpha), -a * c * r * dr / std::max(r, 1e-12), a * std::cos(alpha));
    return n.normalized();
  }

  Vec3 tangent_s(double alpha) const {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    return Vec3(a * ca, 0.0, -c * sa).normalized();
  }

  Vec3 tangent_t(double alpha, double t) const {
    const double dr = profile.drho(t);
    return Vec3(a * dr * std::sin(alpha), 1.0, c * dr * std::cos(alpha)).normalized();
  }
};

double ridge_phase(const SyntheticFingerSpec& spec, double s, double t) {
  const double beta = spec.ridge_orientation;
  double psi = 2.0 * kPi * (s * std::sin(beta) + t * std::cos(beta)) / spec.ridge_period;
  for (const auto& m : spec.minutiae) {
    psi += static_cast<double>(m.polarity) * std::atan2(s - m.s, t - m.t);
  }
  return psi;
}

}  // namespace

void SyntheticFingerSpec::validate() const {
  const double rmin = std::min(radius_x, radius_z);
  if (!(radius_x > 0.0 && radius_z > 0.0 && length > 0.0)) {
    throw Error(ErrorCode::validation, "finger dimensions must be positive");
  }
  if (shape == BaseShape::half_cylinder && radius_x != radius_z) {
    throw Error(ErrorCode::validation, "half-cylinder requires equal semi-axes");
  }
  if (shape == BaseShape::capped_finger && !(tip_length > 0.0 && tip_length < length)) {
    throw Error(ErrorCode::validation, "tip length must lie in (0, length)");
  }
  if (!(ridge_period > 0.0)) throw Error(ErrorCode::validation, "ridge period must be positive");
  if (ridge_amplitude < 0.0 || ridge_amplitude >= 0.2 * rmin) {
    throw Error(ErrorCode::validation, "ridge amplitude must be in [0, 0.2*radius)");
  }
  if (sampling_density < 25.0) {
    throw Error(ErrorCode::validation, "sampling density below 25 points/mm^2");
  }
  if (noise_sigma < 0.0 || sample_jitter < 0.0 || sample_jitter > 0.5) {
    throw Error(ErrorCode::validation, "invalid noise/jitter parameters");
  }
}

SyntheticFinger generate(const SyntheticFingerSpec& spec_in) {
  SyntheticFingerSpec spec = spec_in;
  spec.validate();

  const SectionArc arc(spec.radius_x, spec.radius_z);
  SurfaceGeom geom{spec.radius_x, spec.radius_z,
                   Profile{spec.length, spec.tip_length, spec.shape == BaseShape::capped_finger},
                   &arc};

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Random minutiae plan, inset from the boundary, with a separation floor.
  if (spec.minutiae.empty() && spec.random_minutiae > 0) {
    const double s_max = 0.75 * arc.quarter_length();
    const double t_lo = 0.12 * spec.length;
    const double t_hi = (geom.profile.capped ? spec.length - 0.55 * spec.tip_length
                                             : 0.88 * spec.length);
    const double min_sep = 2.2 * spec.ridge_period;
    std::uniform_real_distribution<double> us(-s_max, s_max);
    std::uniform_real_distribution<double> ut(t_lo, t_hi);
    std::uniform_real_distribution<double> uth(0.0, 2.0 * kPi);
    int attempts = 0;
    while (static_cast<int>(spec.minutiae.size()) < spec.random_minutiae && attempts < 20000) {
      ++attempts;
      MinutiaPlan m;
      m.s = us(rng);
      m.t = ut(rng);
      m.theta = uth(rng);
      m.polarity = (rng() & 1) ? 1 : -1;
      bool ok = true;
      for (const auto& o : spec.minutiae) {
        if (std::hypot(m.s - o.s, m.t - o.t) < min_sep) {
          ok = false;
          break;
        }
      }
      if (ok) spec.minutiae.push_back(m);
    }
  }

  const double h = 1.0 / std::sqrt(spec.sampling_density);
  const double rho_min = 0.12;

  FingerPointCloud cloud;
  std::vector<double> ss, ts;

  double t = 0.0;
  const double axis_max = std::max(spec.radius_x, spec.radius_z);
  while (t <= spec.length && geom.profile.rho(t) >= rho_min) {
    const double rho = geom.profile.rho(t);
    const double half_arc = rho * arc.quarter_length();
    const long n_side = std::lround(std::floor(half_arc / h));
    for (long i = -n_side; i <= n_side; ++i) {
      double s = static_cast<double>(i) * h;
      double tj = t;
      if (spec.sample_jitter > 0.0) {
        s += spec.sample_jitter * h * uni(rng);
        tj += spec.sample_jitter * h * uni(rng);
        tj = std::clamp(tj, 0.0, spec.length);
        if (std::abs(s) > half_arc) s = std::copysign(half_arc, s);
      }
      const double alpha = arc.alpha_of_s(s / std::max(geom.profile.rho(tj), rho_min));
      Vec3 p = geom.point(alpha, tj);
      if (spec.ridge_amplitude > 0.0) {
        const double psi = ridge_phase(spec, s, tj);
        p += spec.ridge_amplitude * std::cos(psi) * geom.outward_normal(alpha, tj);
      }
      if (spec.noise_sigma > 0.0) {
        p += spec.noise_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
      }
      cloud.points.push_back(p);
      ss.push_back(s);
      ts.push_back(tj);
    }
    // Advance by surface distance, accounting for the meridian slope.
    const double slope = axis_max * std::abs(geom.profile.drho(t));
    t += h / std::sqrt(1.0 + slope * slope);
  }

  SyntheticFinger out;
  out.spec = spec;
  out.surface_s = std::move(ss);
  out.surface_t = std::move(ts);
  out.section_arc_length = 2.0 * arc.quarter_length();

  for (const auto& m : spec.minutiae) {
    GroundTruthMinutia g;
    g.s = m.s;
    g.t = m.t;
    g.theta = m.theta;
    g.polarity = m.polarity;
    const double rho = geom.profile.rho(m.t);
    const double alpha = arc.alpha_of_s(m.s / std::max(rho, rho_min));
    g.position = geom.point(alpha, m.t);
    const Vec3 es = geom.tangent_s(alpha);
    const Vec3 et = geom.tangent_t(alpha, m.t);
    g.tangent = (std::cos(m.theta) * es + std::sin(m.theta) * et).normalized();
    g.normal = geom.outward_normal(alpha, m.t);
    out.minutiae.push_back(g);
  }

  validate_cloud(cloud);
  const bool posed = (spec.pose.k != 1.0) || !spec.pose.R.isIdentity(0.0) ||
                     !spec.pose.t.isZero(0.0);
  if (posed) {
    out.cloud = apply_transform(cloud, spec.pose);
    for (auto& g : out.minutiae) {
      g.position = spec.pose.apply(g.position);
      g.tangent = (spec.pose.R * g.tangent).normalized();
      g.normal = (spec.pose.R * g.normal).normalized();
    }
  } else {
    out.cloud = std::move(cloud);
  }
  return out;
}

namespace {

std::string shape_name(BaseShape s) {
  switch (s) {
    case BaseShape::half_cylinder: return "half-cylinder";
    case BaseShape::elliptic_cylinder: return "elliptic-cylinder";
    case BaseShape::capped_finger: return "capped-finger";
  }
  return "capped-finger";
}

BaseShape shape_from_name(const std::string& n) {
  if (n == "half-cylinder") return BaseShape::half_cylinder;
  if (n == "elliptic-cylinder") return BaseShape::elliptic_cylinder;
  if (n == "capped-finger") return BaseShape::capped_finger;
  throw Error(ErrorCode::parse, "unknown base shape '" + n + "'");
}

}  // namespace

std::string spec_to_json(const SyntheticFingerSpec& spec) {
  nlohmann::json j;
  j["shape"] = shape_name(spec.shape);
  j["radius_x"] = spec.radius_x;
  j["radius_z"] = spec.radius_z;
  j["length"] = spec.length;
  j["tip_length"] = spec.tip_length;
  j["ridge_period"] = spec.ridge_period;
  j["ridge_amplitude"] = spec.ridge_amplitude;
  j["ridge_orientation"] = spec.ridge_orientation;
  j["sampling_density"] = spec.sampling_density;
  j["sample_jitter"] = spec.sample_jitter;
  j["noise_sigma"] = spec.noise_sigma;
  j["random_minutiae"] = spec.random_minutiae;
  j["seed"] = spec.seed;
  nlohmann::json plan = nlohmann::json::array();
  for (const auto& m : spec.minutiae) {
    plan.push_back({{"s", m.s}, {"t", m.t}, {"theta", m.theta}, {"polarity", m.polarity}});
  }
  j["minutiae"] = plan;
  j["pose"] = nlohmann::json::parse(transform_to_json(spec.pose));
  return j.dump(2);
}

SyntheticFingerSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("finger spec JSON: ") + e.what());
  }
  SyntheticFingerSpec spec;
  try {
    if (j.contains("shape")) spec.shape = shape_from_name(j["shape"].get<std::string>());
    auto get = [&](const char* key, double& field) {
      if (j.contains(key)) field = j[key].get<double>();
    };
    get("radius_x", spec.radius_x);
    get("radius_z", spec.radius_z);
    get("length", spec.length);
    get("tip_length", spec.tip_length);
    get("ridge_period", spec.ridge_period);
    get("ridge_amplitude", spec.ridge_amplitude);
    get("ridge_orientation", spec.ridge_orientation);
    get("sampling_density", spec.sampling_density);
    get("sample_jitter", spec.sample_jitter);
    get("noise_sigma", spec.noise_sigma);
    if (j.contains("random_minutiae")) spec.random_minutiae = j["random_minutiae"].get<int>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("minutiae")) {
      for (const auto& m : j["minutiae"]) {
        MinutiaPlan p;
        p.s = m.at("s").get<double>();
        p.t = m.at("t").get<double>();
        if (m.contains("theta")) p.theta = m["theta"].get<double>();
        if (m.contains("polarity")) p.polarity = m["polarity"].get<int>();
        spec.minutiae.push_back(p);
      }
    }
    if (j.contains("pose")) spec.pose = transform_from_json(j["pose"].dump());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string("finger spec JSON: ") + e.what());
  }
  if (spec.shape == BaseShape::half_cylinder) spec.radius_z = spec.radius_x;
  return spec;
}

void save_ground_truth(const SyntheticFinger& finger, const std::string& path) {
  nlohmann::json j;
  j["seed"] = finger.spec.seed;
  j["section_arc_length"] = finger.section_arc_length;
  j["pose"] = nlohmann::json::parse(transform_to_json(finger.spec.pose));
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& g : finger.minutiae) {
    ms.push_back({{"s", g.s},
                  {"t", g.t},
                  {"theta", g.theta},
                  {"polarity", g.polarity},
                  {"position", {g.position.x(), g.position.y(), g.position.z()}},
                  {"tangent", {g.tangent.x(), g.tangent.y(), g.tangent.z()}},
                  {"normal", {g.normal.x(), g.normal.y(), g.normal.z()}}});
  }
  j["minutiae"] = ms;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void save_minutiae3d(const std::vector<GroundTruthMinutia>& minutiae, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  for (const auto& g : minutiae) {
    nlohmann::json j;
    j["x"] = g.position.x();
    j["y"] = g.position.y();
    j["z"] = g.position.z();
    j["dir"] = {g.tangent.x(), g.tangent.y(), g.tangent.z()};
    out << j.dump() << "\n";
  }
}

std::vector<Minutia3D> load_minutiae3d(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::vector<Minutia3D> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Minutia3D m;
      m.position = Vec3(j.at("x").get<double>(), j.at("y").get<double>(),
                        j.at("z").get<double>());
      auto d = j.at("dir").get<std::vector<double>>();
      if (d.size() != 3) throw Error(ErrorCode::parse, "dir must have 3 entries");
      m.direction = Vec3(d[0], d[1], d[2]).normalized();
      if (j.contains("quality")) m.quality = j["quality"].get<double>();
      out.push_back(m);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::validation, "no minutiae in " + path);
  return out;
}

}  // namespace fp3d
