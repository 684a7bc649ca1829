#include "dflow/correspond/correspond_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "dflow/binary_io.hpp"
#include "dflow/errors.hpp"

namespace dflow {
namespace {

double finite_number(const nlohmann::json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw InvalidInput(std::string("field ") + key + " is not finite");
  return v;
}

Camera camera_from_json(const nlohmann::json& j) {
  Camera c;
  c.fx = finite_number(j, "fx");
  c.fy = finite_number(j, "fy");
  c.cx = finite_number(j, "cx");
  c.cy = finite_number(j, "cy");
  c.width = j.at("width").get<std::uint32_t>();
  c.height = j.at("height").get<std::uint32_t>();
  const auto& t = j.at("T_wc");
  if (!t.is_array() || t.size() != 16) throw InvalidInput("T_wc must hold 16 numbers");
  for (int r = 0; r < 4; ++r)
    for (int col = 0; col < 4; ++col) c.pose(r, col) = t[4 * r + col].get<double>();
  c.validate();
  return c;
}

std::string read_token(std::istream& in) {
  std::string tok;
  in >> tok;
  return tok;
}

}  // namespace

std::vector<RawMatch> read_matches(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<RawMatch> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RawMatch m;
      m.view = j.at("view").get<std::int32_t>();
      m.ub = finite_number(j, "ub");
      m.vb = finite_number(j, "vb");
      m.ua = finite_number(j, "ua");
      m.va = finite_number(j, "va");
      m.confidence = finite_number(j, "conf");
      out.push_back(m);
    } catch (const std::exception& e) {
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_matches(const std::filesystem::path& path, const std::vector<RawMatch>& matches) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  for (const auto& m : matches) {
    const nlohmann::json j = {{"view", m.view}, {"ub", m.ub}, {"vb", m.vb},
                              {"ua", m.ua},     {"va", m.va}, {"conf", m.confidence}};
    out << j.dump() << '\n';
  }
}

std::vector<Camera> read_cameras(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  std::vector<Camera> cams;
  const auto parse_one = [&](const nlohmann::json& item, std::size_t i) {
    try {
      cams.push_back(camera_from_json(item));
    } catch (const std::exception& e) {
      throw InvalidInput(path.string() + ": camera " + std::to_string(i) + ": " + e.what());
    }
  };
  if (j.is_object()) {
    parse_one(j, 0);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) parse_one(j[i], i);
  } else {
    throw InvalidInput(path.string() + ": expected a camera object or array");
  }
  return cams;
}

void write_cameras(const std::filesystem::path& path, const std::vector<Camera>& cameras) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cameras) {
    nlohmann::json t = nlohmann::json::array();
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col) t.push_back(c.pose(r, col));
    arr.push_back({{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
                   {"width", c.width}, {"height", c.height}, {"T_wc", t}});
  }
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << arr.dump(1) << '\n';
}

DepthMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  const std::string source = path.string();
  const std::string magic = read_token(in);
  if (magic != "Pf") throw InvalidInput(source + ": expected a grayscale PFM (Pf), got '" + magic + "'");
  long w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stol(read_token(in));
    h = std::stol(read_token(in));
    scale = std::stod(read_token(in));
  } catch (const std::exception&) {
    throw InvalidInput(source + ": malformed PFM header");
  }
  if (w <= 0 || h <= 0 || scale == 0.0) throw InvalidInput(source + ": malformed PFM header");
  if (scale > 0.0) throw InvalidInput(source + ": big-endian PFM is not supported");
  in.get();  // single whitespace byte before the raster

  DepthMap d;
  d.width = static_cast<std::uint32_t>(w);
  d.height = static_cast<std::uint32_t>(h);
  d.values.resize(static_cast<std::size_t>(w) * h);
  for (long row = h - 1; row >= 0; --row) {
    for (long x = 0; x < w; ++x) {
      d.values[static_cast<std::size_t>(row) * w + x] = detail::read_le<float>(in, source);
    }
  }
  return d;
}

void write_pfm(const std::filesystem::path& path, const DepthMap& depth) {
  if (depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw InvalidInput("depth raster size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "Pf\n" << depth.width << ' ' << depth.height << "\n-1\n";
  for (long row = static_cast<long>(depth.height) - 1; row >= 0; --row) {
    for (std::uint32_t x = 0; x < depth.width; ++x) detail::write_le<float>(out, depth.at(x, static_cast<std::uint32_t>(row)));
  }
}

std::filesystem::path depth_filename(std::int32_t view) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "depth_%04d.pfm", view);
  return buf;
}

}  // namespace dflow
