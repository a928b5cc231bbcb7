#include "fp3d/unfold.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fp3d/parallel.hpp"

namespace fp3d {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Row/column arc-length speed sqrt(1 + slope^2) from central differences,
// one-sided at mask boundaries, unit speed where no height is available.
void integrand_rows(const SmoothedHeightField& f, std::vector<double>& g) {
  const int w = f.width, h = f.height;
  g.assign(f.z.size(), 1.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = f.idx(c, r);
      if (!f.mask[i]) continue;
      const bool left = c > 0 && f.mask[i - 1];
      const bool right = c < w - 1 && f.mask[i + 1];
      double slope = 0.0;
      if (left && right) slope = (f.z[i + 1] - f.z[i - 1]) / (2.0 * f.pitch);
      else if (right) slope = (f.z[i + 1] - f.z[i]) / f.pitch;
      else if (left) slope = (f.z[i] - f.z[i - 1]) / f.pitch;
      g[i] = std::sqrt(1.0 + slope * slope);
    }
  }
}

void integrand_cols(const SmoothedHeightField& f, std::vector<double>& g) {
  const int w = f.width, h = f.height;
  g.assign(f.z.size(), 1.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = f.idx(c, r);
      if (!f.mask[i]) continue;
      const bool down = r > 0 && f.mask[i - w];
      const bool up = r < h - 1 && f.mask[i + w];
      double slope = 0.0;
      if (down && up) slope = (f.z[i + w] - f.z[i - w]) / (2.0 * f.pitch);
      else if (up) slope = (f.z[i + w] - f.z[i]) / f.pitch;
      else if (down) slope = (f.z[i] - f.z[i - w]) / f.pitch;
      g[i] = std::sqrt(1.0 + slope * slope);
    }
  }
}

// Cumulative trapezoid along one line from the anchor slot; speeds and
// outputs are strided views so rows and columns share the code.
void integrate_line(const double* speed, std::ptrdiff_t stride, int count, int anchor,
                    double anchor_value, double step, double* out) {
  out[anchor * stride] = anchor_value;
  for (int i = anchor + 1; i < count; ++i) {
    out[i * stride] = out[(i - 1) * stride] +
                      0.5 * step * (speed[(i - 1) * stride] + speed[i * stride]);
  }
  for (int i = anchor - 1; i >= 0; --i) {
    out[i * stride] = out[(i + 1) * stride] -
                      0.5 * step * (speed[i * stride] + speed[(i + 1) * stride]);
  }
}

// Inverts a strictly increasing sampled function at value target; samples are
// at positions origin + k*pitch. Returns false outside the sampled range.
bool invert_monotone(const double* samples, std::ptrdiff_t stride, int count, double origin,
                     double pitch, double target, double& out) {
  if (count < 2) return false;
  if (target < samples[0] || target > samples[(count - 1) * stride]) return false;
  int lo = 0, hi = count - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (samples[mid * stride] <= target) lo = mid;
    else hi = mid;
  }
  const double s0 = samples[lo * stride], s1 = samples[hi * stride];
  const double frac = s1 > s0 ? (target - s0) / (s1 - s0) : 0.0;
  out = origin + (static_cast<double>(lo) + frac) * pitch;
  return true;
}

}  // namespace

bool UnfoldMap::forward(double src_col, double src_row, Vec2& uv_mm) const {
  const int c0 = static_cast<int>(std::floor(src_col));
  const int r0 = static_cast<int>(std::floor(src_row));
  if (c0 < 0 || r0 < 0 || c0 + 1 >= src_width || r0 + 1 >= src_height) return false;
  const double fc = src_col - c0, fr = src_row - r0;
  double acc_u = 0.0, acc_v = 0.0, wsum = 0.0;
  for (int dr = 0; dr <= 1; ++dr) {
    for (int dc = 0; dc <= 1; ++dc) {
      const std::size_t i = sidx(c0 + dc, r0 + dr);
      if (!std::isfinite(u[i]) || !std::isfinite(v[i])) continue;
      const double wgt = (dc ? fc : 1 - fc) * (dr ? fr : 1 - fr);
      acc_u += wgt * u[i];
      acc_v += wgt * v[i];
      wsum += wgt;
    }
  }
  if (wsum < 0.5) return false;
  uv_mm = Vec2(acc_u / wsum, acc_v / wsum);
  return true;
}

bool UnfoldMap::expansion(double src_col, double src_row, Vec2& factors) const {
  const int c = std::clamp(static_cast<int>(std::lround(src_col)), 0, src_width - 1);
  const int r = std::clamp(static_cast<int>(std::lround(src_row)), 0, src_height - 1);
  const std::size_t i = sidx(c, r);
  if (du_dx.empty() || dv_dy.empty()) return false;
  factors = Vec2(du_dx[i], dv_dy[i]);
  return true;
}

bool UnfoldMap::invert_point(const Vec2& uv_mm, Vec2& xy_mm) const {
  const double x_lo = src_origin.x();
  const double x_hi = src_origin.x() + (src_width - 1) * pitch;
  const double y_lo = src_origin.y();
  const double y_hi = src_origin.y() + (src_height - 1) * pitch;
  double xk = std::clamp(uv_mm.x(), x_lo, x_hi);
  double yk = std::clamp(uv_mm.y(), y_lo, y_hi);
  for (int iter = 0; iter < 40; ++iter) {
    const int row = std::clamp(static_cast<int>(std::lround((yk - y_lo) / pitch)), 0,
                               src_height - 1);
    if (!std::isfinite(u[sidx(0, row)])) return false;
    double xn;
    if (!invert_monotone(u.data() + sidx(0, row), 1, src_width, x_lo, pitch, uv_mm.x(), xn)) {
      return false;
    }
    const int col = std::clamp(static_cast<int>(std::lround((xn - x_lo) / pitch)), 0,
                               src_width - 1);
    if (!std::isfinite(v[sidx(col, 0)])) return false;
    double yn;
    if (!invert_monotone(v.data() + sidx(col, 0), src_width, src_height, y_lo, pitch,
                         uv_mm.y(), yn)) {
      return false;
    }
    const double moved = std::abs(xn - xk) + std::abs(yn - yk);
    xk = xn;
    yk = yn;
    if (moved < 1e-10) break;
  }
  xy_mm = Vec2(xk, yk);
  return true;
}

UnfoldResult unfold(const SmoothedHeightField& field, const TextureImage& texture,
                    const PixelProvenance* provenance, std::optional<Vec2> anchor_mm) {
  if (field.width != texture.width || field.height != texture.height) {
    throw Error(ErrorCode::geometry_mismatch, "height field and texture lattices differ");
  }
  const int w = field.width, h = field.height;
  const double pitch = field.pitch;
  const Vec2 origin = field.origin;

  Vec2 anchor;
  if (anchor_mm) {
    anchor = *anchor_mm;
  } else {
    double sx = 0.0, sy = 0.0;
    std::size_t cnt = 0;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (field.mask[field.idx(c, r)]) {
          sx += origin.x() + c * pitch;
          sy += origin.y() + r * pitch;
          ++cnt;
        }
      }
    }
    if (cnt == 0) throw Error(ErrorCode::degenerate_mask, "empty height field");
    anchor = Vec2(sx / cnt, sy / cnt);
  }
  const int anchor_col =
      std::clamp(static_cast<int>(std::lround((anchor.x() - origin.x()) / pitch)), 0, w - 1);
  const int anchor_row =
      std::clamp(static_cast<int>(std::lround((anchor.y() - origin.y()) / pitch)), 0, h - 1);

  UnfoldResult res;
  UnfoldMap& map = res.map;
  map.src_width = w;
  map.src_height = h;
  map.pitch = pitch;
  map.src_origin = origin;
  map.src_mask = field.mask;
  map.u.assign(field.z.size(), kNaN);
  map.v.assign(field.z.size(), kNaN);
  integrand_rows(field, map.du_dx);
  integrand_cols(field, map.dv_dy);

  int rows_on_anchor = 0, cols_on_anchor = 0;

  for (int r = 0; r < h; ++r) {
    int start = -1;
    if (field.mask[field.idx(anchor_col, r)]) {
      start = anchor_col;
      ++rows_on_anchor;
    } else {
      // nearest valid column; keeps odd silhouettes usable
      for (int d = 1; d < w && start < 0; ++d) {
        if (anchor_col - d >= 0 && field.mask[field.idx(anchor_col - d, r)]) start = anchor_col - d;
        else if (anchor_col + d < w && field.mask[field.idx(anchor_col + d, r)]) start = anchor_col + d;
      }
    }
    if (start < 0) continue;  // empty row
    integrate_line(map.du_dx.data() + map.sidx(0, r), 1, w, start,
                   origin.x() + start * pitch, pitch, map.u.data() + map.sidx(0, r));
  }

  for (int c = 0; c < w; ++c) {
    int start = -1;
    if (field.mask[field.idx(c, anchor_row)]) {
      start = anchor_row;
      ++cols_on_anchor;
    } else {
      for (int d = 1; d < h && start < 0; ++d) {
        if (anchor_row - d >= 0 && field.mask[field.idx(c, anchor_row - d)]) start = anchor_row - d;
        else if (anchor_row + d < h && field.mask[field.idx(c, anchor_row + d)]) start = anchor_row + d;
      }
    }
    if (start < 0) continue;
    integrate_line(map.dv_dy.data() + map.sidx(c, 0), w, h, start,
                   origin.y() + start * pitch, pitch, map.v.data() + map.sidx(c, 0));
  }

  if (rows_on_anchor == 0 || cols_on_anchor == 0) {
    throw Error(ErrorCode::degenerate_mask, "no row or column crosses the unfolding anchor");
  }

  double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
  double v_lo = u_lo, v_hi = -u_lo;
  for (std::size_t i = 0; i < map.u.size(); ++i) {
    if (!map.src_mask[i]) continue;
    if (std::isfinite(map.u[i])) {
      u_lo = std::min(u_lo, map.u[i]);
      u_hi = std::max(u_hi, map.u[i]);
    }
    if (std::isfinite(map.v[i])) {
      v_lo = std::min(v_lo, map.v[i]);
      v_hi = std::max(v_hi, map.v[i]);
    }
  }
  if (!(u_hi > u_lo) || !(v_hi > v_lo)) {
    throw Error(ErrorCode::degenerate_mask, "unfolded footprint is degenerate");
  }

  map.dst_width = static_cast<int>(std::lround((u_hi - u_lo) / pitch)) + 1;
  map.dst_height = static_cast<int>(std::lround((v_hi - v_lo) / pitch)) + 1;
  map.dst_origin = Vec2(u_lo, v_lo);

  const std::size_t dn = static_cast<std::size_t>(map.dst_width) * map.dst_height;
  map.x.assign(dn, kNaN);
  map.y.assign(dn, kNaN);
  map.dst_mask.assign(dn, 0);
  map.provenance.assign(dn, -1);

  res.image = TextureImage::blank(map.dst_width, map.dst_height, pitch, map.dst_origin);

  parallel_for(static_cast<std::size_t>(map.dst_height), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t dr = r0; dr < r1; ++dr) {
      for (int dc = 0; dc < map.dst_width; ++dc) {
        const Vec2 uv = map.dst_origin + Vec2(dc * pitch, static_cast<double>(dr) * pitch);
        Vec2 xy;
        if (!map.invert_point(uv, xy)) continue;
        const std::size_t di = map.didx(dc, static_cast<int>(dr));
        map.x[di] = xy.x();
        map.y[di] = xy.y();
        const double pc = (xy.x() - origin.x()) / pitch;
        const double pr = (xy.y() - origin.y()) / pitch;
        const int nc = std::clamp(static_cast<int>(std::lround(pc)), 0, w - 1);
        const int nr = std::clamp(static_cast<int>(std::lround(pr)), 0, h - 1);
        if (!field.mask[field.idx(nc, nr)]) continue;
        double val;
        if (!sample_bilinear(texture, pc, pr, val)) continue;
        map.dst_mask[di] = 1;
        res.image.values[di] = val;
        res.image.mask[di] = 1;
        if (provenance) map.provenance[di] = provenance->point[field.idx(nc, nr)];
      }
    }
  });

  return res;
}

namespace {

template <typename T>
void write_array(std::ofstream& out, const std::vector<T>& a) {
  out.write(reinterpret_cast<const char*>(a.data()),
            static_cast<std::streamsize>(a.size() * sizeof(T)));
}

template <typename T>
void read_array(std::ifstream& in, std::vector<T>& a, std::size_t n) {
  a.resize(n);
  in.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(T)) {
    throw Error(ErrorCode::parse, "unfold map payload truncated");
  }
}

}  // namespace

void save_unfold_map(const UnfoldMap& map, const std::string& path) {
  nlohmann::json j;
  j["src_width"] = map.src_width;
  j["src_height"] = map.src_height;
  j["dst_width"] = map.dst_width;
  j["dst_height"] = map.dst_height;
  j["pitch_mm"] = map.pitch;
  j["src_origin_mm"] = {map.src_origin.x(), map.src_origin.y()};
  j["dst_origin_mm"] = {map.dst_origin.x(), map.dst_origin.y()};
  j["arrays"] = {"u", "v", "du_dx", "dv_dy", "src_mask", "x", "y", "dst_mask", "provenance"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << j.dump() << "\n";
  write_array(out, map.u);
  write_array(out, map.v);
  write_array(out, map.du_dx);
  write_array(out, map.dv_dy);
  write_array(out, map.src_mask);
  write_array(out, map.x);
  write_array(out, map.y);
  write_array(out, map.dst_mask);
  write_array(out, map.provenance);
  if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

UnfoldMap load_unfold_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::parse, path + ": missing header");
  UnfoldMap map;
  try {
    nlohmann::json j = nlohmann::json::parse(header);
    map.src_width = j.at("src_width").get<int>();
    map.src_height = j.at("src_height").get<int>();
    map.dst_width = j.at("dst_width").get<int>();
    map.dst_height = j.at("dst_height").get<int>();
    map.pitch = j.at("pitch_mm").get<double>();
    auto so = j.at("src_origin_mm").get<std::vector<double>>();
    auto do_ = j.at("dst_origin_mm").get<std::vector<double>>();
    map.src_origin = Vec2(so.at(0), so.at(1));
    map.dst_origin = Vec2(do_.at(0), do_.at(1));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
  if (map.src_width <= 0 || map.src_height <= 0 || map.dst_width <= 0 || map.dst_height <= 0) {
    throw Error(ErrorCode::parse, path + ": bad dimensions");
  }
  const std::size_t sn = static_cast<std::size_t>(map.src_width) * map.src_height;
  const std::size_t dn = static_cast<std::size_t>(map.dst_width) * map.dst_height;
  read_array(in, map.u, sn);
  read_array(in, map.v, sn);
  read_array(in, map.du_dx, sn);
  read_array(in, map.dv_dy, sn);
  read_array(in, map.src_mask, sn);
  read_array(in, map.x, dn);
  read_array(in, map.y, dn);
  read_array(in, map.dst_mask, dn);
  read_array(in, map.provenance, dn);
  return map;
}

}  // namespace fp3d
