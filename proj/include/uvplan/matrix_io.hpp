#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "uvplan/radiometry.hpp"

namespace uvplan {

// Irradiance matrix file layout:
//   line 1: the magic "UVIRR"
//   line 2: one-line JSON header {format, version, rows, cols, dtype, order, units, patch_ids, vantage_ids}
//   rest:   rows * cols little-endian IEEE-754 float64 values, row-major (row = patch)

static_assert(std::endian::native == std::endian::little, "matrix files are written in host byte order");

inline constexpr const char* kMatrixMagic = "UVIRR";

inline std::string serialize_irradiance_matrix(const IrradianceMatrix& m) {
  const nlohmann::json header = {
      {"format", "uvplan-irradiance"}, {"version", 1},         {"rows", m.rows},
      {"cols", m.cols},                {"dtype", "float64le"}, {"order", "row-major"},
      {"units", "W/m^2"},              {"patch_ids", m.patch_ids}, {"vantage_ids", m.vantage_ids},
  };
  std::string out = std::string(kMatrixMagic) + "\n" + header.dump() + "\n";
  const std::size_t offset = out.size();
  out.resize(offset + m.values.size() * sizeof(double));
  std::memcpy(out.data() + offset, m.values.data(), m.values.size() * sizeof(double));
  return out;
}

inline IrradianceMatrix deserialize_irradiance_matrix(const std::string& bytes) {
  const auto first = bytes.find('\n');
  if (first == std::string::npos || bytes.compare(0, first, kMatrixMagic) != 0) {
    throw std::runtime_error("not an irradiance matrix file (bad magic)");
  }
  const auto second = bytes.find('\n', first + 1);
  if (second == std::string::npos) throw std::runtime_error("irradiance matrix header is truncated");
  const auto header = nlohmann::json::parse(bytes.substr(first + 1, second - first - 1));
  if (header.at("format") != "uvplan-irradiance" || header.at("dtype") != "float64le") {
    throw std::runtime_error("unsupported irradiance matrix header");
  }
  IrradianceMatrix m(header.at("rows").get<std::size_t>(), header.at("cols").get<std::size_t>());
  m.patch_ids = header.at("patch_ids").get<std::vector<std::size_t>>();
  m.vantage_ids = header.at("vantage_ids").get<std::vector<std::size_t>>();
  if (m.patch_ids.size() != m.rows || m.vantage_ids.size() != m.cols) {
    throw std::runtime_error("irradiance matrix id lists do not match dimensions");
  }
  const std::size_t payload = bytes.size() - second - 1;
  if (payload != m.values.size() * sizeof(double)) {
    throw std::runtime_error("irradiance matrix payload has " + std::to_string(payload) + " bytes, expected " +
                             std::to_string(m.values.size() * sizeof(double)));
  }
  std::memcpy(m.values.data(), bytes.data() + second + 1, payload);
  return m;
}

inline void save_irradiance_matrix(const IrradianceMatrix& m, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = serialize_irradiance_matrix(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline IrradianceMatrix load_irradiance_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_irradiance_matrix(bytes);
}

}  // namespace uvplan
