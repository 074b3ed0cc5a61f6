#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "uvplan/world.hpp"

namespace uvplan {

/// Malformed input file. line() is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr int kWorldFormatVersion = 1;

inline nlohmann::json world_to_json(const World2p5D& world) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (const Polygon& poly : world.obstacles) {
    nlohmann::json verts = nlohmann::json::array();
    for (Vec2 v : poly) verts.push_back({v.x, v.y});
    obstacles.push_back(std::move(verts));
  }
  return {
      {"format", "uvplan-world"},
      {"version", kWorldFormatVersion},
      {"bounds", {{"min", {world.bounds.min.x, world.bounds.min.y}}, {"max", {world.bounds.max.x, world.bounds.max.y}}}},
      {"wall_height", world.wall_height},
      {"patch_resolution", world.patch_resolution},
      {"obstacles", std::move(obstacles)},
  };
}

inline World2p5D world_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "uvplan-world") throw std::invalid_argument("not a uvplan-world document");
  if (j.value("version", 0) != kWorldFormatVersion) {
    throw std::invalid_argument("unsupported world format version " + j.value("version", nlohmann::json()).dump());
  }
  World2p5D world;
  const auto& b = j.at("bounds");
  world.bounds = {{b.at("min").at(0).get<double>(), b.at("min").at(1).get<double>()},
                  {b.at("max").at(0).get<double>(), b.at("max").at(1).get<double>()}};
  world.wall_height = j.at("wall_height").get<double>();
  world.patch_resolution = j.value("patch_resolution", world.patch_resolution);
  for (const auto& poly : j.at("obstacles")) {
    Polygon p;
    for (const auto& v : poly) p.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    world.obstacles.push_back(std::move(p));
  }
  world.validate();
  return world;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline World2p5D parse_world_json(std::string_view text, const std::string& path = "<memory>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < upto; ++i) line += text[i] == '\n';
    throw ParseError(path, line, e.what());
  }
  try {
    return world_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path, 0, e.what());
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string_view next_token(std::string_view& s) {
  const auto start = s.find_first_not_of(" \t\r");
  if (start == std::string_view::npos) {
    s = {};
    return {};
  }
  s.remove_prefix(start);
  const auto end = s.find_first_of(" \t\r");
  std::string_view tok = s.substr(0, end);
  s.remove_prefix(end == std::string_view::npos ? s.size() : end);
  return tok;
}

inline double parse_double(std::string_view tok, const std::string& path, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(path, line, "invalid number '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads the OBJ subset: `v x y z` and triangular `f a b c` lines (index
/// forms a, a/t, a/t/n, a//n; negative indices are relative). Other
/// statements are ignored.
inline TriMeshWorld parse_obj(std::string_view text, const std::string& path = "<memory>") {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<std::size_t> face_lines;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = detail::trim(text.substr(0, eol));
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::string_view rest = line;
    const std::string_view kw = detail::next_token(rest);
    if (kw == "v") {
      Vec3 p;
      p.x = detail::parse_double(detail::next_token(rest), path, line_no);
      p.y = detail::parse_double(detail::next_token(rest), path, line_no);
      p.z = detail::parse_double(detail::next_token(rest), path, line_no);
      vertices.push_back(p);
    } else if (kw == "f") {
      std::array<std::uint32_t, 3> tri{};
      std::size_t count = 0;
      for (std::string_view tok = detail::next_token(rest); !tok.empty(); tok = detail::next_token(rest)) {
        if (count == 3) throw ParseError(path, line_no, "face not triangulated");
        const std::string_view idx_tok = tok.substr(0, tok.find('/'));
        long long idx = 0;
        const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
        if (ec != std::errc{} || ptr != idx_tok.data() + idx_tok.size() || idx == 0) {
          throw ParseError(path, line_no, "invalid face index '" + std::string(tok) + "'");
        }
        const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(vertices.size()) + idx;
        if (resolved < 0 || resolved >= static_cast<long long>(vertices.size())) {
          throw ParseError(path, line_no, "face index out of range");
        }
        tri[count++] = static_cast<std::uint32_t>(resolved);
      }
      if (count != 3) throw ParseError(path, line_no, "face not triangulated");
      triangles.push_back(tri);
      face_lines.push_back(line_no);
    } else if (kw == "vn" || kw == "vt" || kw == "vp" || kw == "o" || kw == "g" || kw == "s" || kw == "usemtl" ||
               kw == "mtllib" || kw == "l") {
      continue;
    } else {
      throw ParseError(path, line_no, "unsupported statement '" + std::string(kw) + "'");
    }
  }
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    const double area = triangle_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    if (!(area > TriMeshWorld::kMinTriangleArea)) throw ParseError(path, face_lines[t], "degenerate (zero-area) triangle");
  }
  return TriMeshWorld::from_triangles(std::move(vertices), std::move(triangles));
}

inline std::string format_obj(const TriMeshWorld& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 64 + mesh.triangles.size() * 32);
  char buf[128];
  for (Vec3 v : mesh.vertices) {
    const int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    out.append(buf, static_cast<std::size_t>(n));
  }
  for (const auto& tri : mesh.triangles) {
    const int n = std::snprintf(buf, sizeof buf, "f %u %u %u\n", tri[0] + 1, tri[1] + 1, tri[2] + 1);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

/// Loads a world by extension: `.json` for 2.5D rooms, `.obj` for meshes.
inline AnyWorld load_world(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const std::string ext = path.extension().string();
  if (ext == ".obj" || ext == ".OBJ") return parse_obj(text, path.string());
  return parse_world_json(text, path.string());
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void save_world(const World2p5D& world, const std::filesystem::path& path) {
  write_text_file(path, world_to_json(world).dump(2) + "\n");
}

inline void save_world(const TriMeshWorld& mesh, const std::filesystem::path& path) { write_text_file(path, format_obj(mesh)); }

inline void save_world(const AnyWorld& world, const std::filesystem::path& path) {
  std::visit([&](const auto& w) { save_world(w, path); }, world);
}

}  // namespace uvplan
