#include "fp3d/minutia.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace fp3d {

std::vector<Minutia> load_minutiae(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::vector<Minutia> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Minutia m;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      m.x = j.at("x").get<double>();
      m.y = j.at("y").get<double>();
      m.theta = j.at("theta").get<double>();
      if (j.contains("quality")) m.quality = j["quality"].get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!std::isfinite(m.x) || !std::isfinite(m.y) || m.x < 0.0 || m.y < 0.0) {
      throw Error(ErrorCode::validation,
                  path + ":" + std::to_string(lineno) + ": coordinates out of range");
    }
    if (!std::isfinite(m.theta)) {
      throw Error(ErrorCode::validation,
                  path + ":" + std::to_string(lineno) + ": non-finite direction");
    }
    if (!(m.quality >= 0.0 && m.quality <= 1.0)) {
      throw Error(ErrorCode::validation,
                  path + ":" + std::to_string(lineno) + ": quality out of [0,1]");
    }
    m.theta = wrap_angle(m.theta);
    out.push_back(m);
  }
  if (out.empty()) throw Error(ErrorCode::validation, "no minutiae in " + path);
  return out;
}

void save_minutiae(const std::vector<Minutia>& minutiae, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  for (const auto& m : minutiae) {
    nlohmann::json j;
    j["x"] = m.x;
    j["y"] = m.y;
    j["theta"] = m.theta;
    j["quality"] = m.quality;
    out << j.dump() << "\n";
  }
}

}  // namespace fp3d
