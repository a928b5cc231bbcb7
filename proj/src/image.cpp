#include "fp3d/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace fp3d {

TextureImage TextureImage::blank(int width, int height, double pitch, const Vec2& origin) {
  TextureImage img;
  img.width = width;
  img.height = height;
  img.pitch = pitch;
  img.origin = origin;
  img.values.assign(static_cast<std::size_t>(width) * height, 0.0);
  img.mask.assign(static_cast<std::size_t>(width) * height, 0);
  return img;
}

std::size_t TextureImage::valid_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

bool sample_bilinear(const TextureImage& img, double col, double row, double& out) {
  const int c0 = static_cast<int>(std::floor(col));
  const int r0 = static_cast<int>(std::floor(row));
  const double fc = col - c0;
  const double fr = row - r0;
  const double w[4] = {(1 - fc) * (1 - fr), fc * (1 - fr), (1 - fc) * fr, fc * fr};
  const int cc[4] = {c0, c0 + 1, c0, c0 + 1};
  const int rr[4] = {r0, r0, r0 + 1, r0 + 1};
  double acc = 0.0, wsum = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (img.valid(cc[i], rr[i])) {
      acc += w[i] * img.values[img.idx(cc[i], rr[i])];
      wsum += w[i];
    }
  }
  if (wsum < 0.5) return false;
  out = acc / wsum;
  return true;
}

void save_pgm(const TextureImage& img, const std::string& path, int bits) {
  if (bits != 8 && bits != 16) throw Error(ErrorCode::validation, "PGM depth must be 8 or 16");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  const int maxval = bits == 8 ? 255 : 65535;
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  std::vector<std::uint8_t> buf;
  buf.reserve(img.values.size() * (bits / 8));
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const double v = img.mask[i] ? clamp01(img.values[i]) : 1.0;
    const unsigned q = static_cast<unsigned>(std::lround(v * maxval));
    if (bits == 16) buf.push_back(static_cast<std::uint8_t>(q >> 8));
    buf.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

TextureImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") {
    throw Error(ErrorCode::parse, path + ": not a PGM file");
  }
  auto next_token = [&]() -> long {
    // skips whitespace and '#' comments
    while (true) {
      int c = in.peek();
      if (c == '#') {
        std::string dummy;
        std::getline(in, dummy);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v;
    if (!(in >> v)) throw Error(ErrorCode::parse, path + ": malformed PGM header");
    return v;
  };
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorCode::parse, path + ": malformed PGM dimensions");
  }
  TextureImage img = TextureImage::blank(static_cast<int>(w), static_cast<int>(h), 0.0508,
                                         Vec2::Zero());
  std::fill(img.mask.begin(), img.mask.end(), 1);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      long v;
      if (!(in >> v)) throw Error(ErrorCode::parse, path + ": truncated PGM data");
      img.values[i] = static_cast<double>(v) / maxval;
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<std::uint8_t> buf(n * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
      throw Error(ErrorCode::parse, path + ": truncated PGM data");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bytes == 2 ? (buf[2 * i] << 8 | buf[2 * i + 1]) : buf[i];
      img.values[i] = static_cast<double>(v) / maxval;
    }
  }
  return img;
}

namespace {

std::vector<std::int64_t> mask_runs(const std::vector<std::uint8_t>& mask) {
  // Alternating run lengths, starting with an invalid run (possibly 0).
  std::vector<std::int64_t> runs;
  std::uint8_t cur = 0;
  std::int64_t len = 0;
  for (std::uint8_t m : mask) {
    if ((m != 0) == (cur != 0)) {
      ++len;
    } else {
      runs.push_back(len);
      cur = m;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

std::vector<std::uint8_t> mask_from_runs(const std::vector<std::int64_t>& runs, std::size_t n) {
  std::vector<std::uint8_t> mask;
  mask.reserve(n);
  std::uint8_t cur = 0;
  for (std::int64_t r : runs) {
    if (r < 0) throw Error(ErrorCode::parse, "negative mask run");
    mask.insert(mask.end(), static_cast<std::size_t>(r), cur);
    cur = cur ? 0 : 1;
  }
  if (mask.size() != n) throw Error(ErrorCode::parse, "mask runs do not cover the image");
  return mask;
}

}  // namespace

void save_sidecar(const TextureImage& img, const PixelProvenance* prov,
                  const std::string& path) {
  nlohmann::json j;
  j["width"] = img.width;
  j["height"] = img.height;
  j["pitch_mm"] = img.pitch;
  j["origin_mm"] = {img.origin.x(), img.origin.y()};
  j["mask_runs"] = mask_runs(img.mask);
  if (prov) {
    std::vector<std::int32_t> ids;
    ids.reserve(img.valid_count());
    for (std::size_t i = 0; i < img.mask.size(); ++i) {
      if (img.mask[i]) ids.push_back(prov->point[i]);
    }
    j["point_indices"] = ids;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << j.dump() << "\n";
}

void load_sidecar(const std::string& path, TextureImage& img, PixelProvenance* prov) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    const int w = j.at("width").get<int>();
    const int h = j.at("height").get<int>();
    if (w != img.width || h != img.height) {
      throw Error(ErrorCode::geometry_mismatch, path + ": sidecar does not match image size");
    }
    img.pitch = j.at("pitch_mm").get<double>();
    auto o = j.at("origin_mm").get<std::vector<double>>();
    img.origin = Vec2(o.at(0), o.at(1));
    img.mask = mask_from_runs(j.at("mask_runs").get<std::vector<std::int64_t>>(),
                              img.values.size());
    if (prov) {
      prov->width = w;
      prov->height = h;
      prov->point.assign(img.values.size(), -1);
      if (j.contains("point_indices")) {
        auto ids = j["point_indices"].get<std::vector<std::int32_t>>();
        std::size_t k = 0;
        for (std::size_t i = 0; i < img.mask.size(); ++i) {
          if (img.mask[i]) {
            if (k >= ids.size()) throw Error(ErrorCode::parse, path + ": provenance too short");
            prov->point[i] = ids[k++];
          }
        }
        if (k != ids.size()) throw Error(ErrorCode::parse, path + ": provenance too long");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
}

void save_texture(const TextureImage& img, const PixelProvenance* prov,
                  const std::string& base_path, int bits) {
  save_pgm(img, base_path + ".pgm", bits);
  save_sidecar(img, prov, base_path + ".json");
}

TextureImage load_texture(const std::string& base_path, PixelProvenance* prov) {
  TextureImage img = load_pgm(base_path + ".pgm");
  load_sidecar(base_path + ".json", img, prov);
  return img;
}

}  // namespace fp3d
