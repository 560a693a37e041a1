#include "retreg/io/cloud_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace retreg {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int ply_type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" || type == "float" ||
      type == "float32") {
    return 4;
  }
  if (type == "double" || type == "float64" || type == "int64" || type == "uint64") return 8;
  return 0;
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  long count = 0;
  std::vector<PlyProperty> properties;
};

double read_binary_scalar(std::istream& in, const std::string& type, const std::string& path) {
  unsigned char buf[8];
  const int size = ply_type_size(type);
  if (!in.read(reinterpret_cast<char*>(buf), size)) {
    fail(Errc::parse_error, "truncated PLY payload in '" + path + "'");
  }
  static_assert(std::endian::native == std::endian::little, "PLY reader assumes little-endian");
  if (type == "float" || type == "float32") {
    float f;
    std::memcpy(&f, buf, 4);
    return static_cast<double>(f);
  }
  if (type == "double" || type == "float64") {
    double d;
    std::memcpy(&d, buf, 8);
    return d;
  }
  // Integer types are only read to be skipped or used as list counts.
  uint64_t u = 0;
  for (int b = size - 1; b >= 0; --b) u = (u << 8) | buf[b];
  if (type == "char" || type == "int8") return static_cast<int8_t>(u);
  if (type == "short" || type == "int16") return static_cast<int16_t>(u);
  if (type == "int" || type == "int32") return static_cast<int32_t>(u);
  if (type == "int64") return static_cast<double>(static_cast<int64_t>(u));
  return static_cast<double>(u);
}

}  // namespace

PointCloud read_xyz(const std::string& path, std::string id) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open cloud file '" + path + "'");
  std::vector<Eigen::Vector3d> points;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) {
      fail(Errc::parse_error, "malformed XYZ line " + std::to_string(line_no) + " in '" + path + "'");
    }
    points.emplace_back(x, y, z);
  }
  if (points.empty()) fail(Errc::empty_cloud, "empty cloud in '" + path + "'");
  Eigen::Matrix3Xd mat(3, points.size());
  for (size_t i = 0; i < points.size(); ++i) mat.col(i) = points[i];
  return PointCloud(std::move(mat), std::move(id));
}

void write_xyz(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  for (int i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i);
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
        << '\n';
  }
  if (!out) fail(Errc::io_error, "write failed for '" + path + "'");
}

PointCloud read_ply(const std::string& path, std::string id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open cloud file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse_error, "empty PLY file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") fail(Errc::bad_magic, "not a PLY file: '" + path + "'");

  bool binary = false;
  bool format_seen = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string kind, version;
      ls >> kind >> version;
      if (kind == "ascii") {
        binary = false;
      } else if (kind == "binary_little_endian") {
        binary = true;
      } else {
        fail(Errc::parse_error, "unsupported PLY format '" + kind + "' in '" + path + "'");
      }
      format_seen = true;
    } else if (keyword == "element") {
      PlyElement e;
      if (!(ls >> e.name >> e.count)) fail(Errc::parse_error, "malformed element in '" + path + "'");
      elements.push_back(e);
    } else if (keyword == "property") {
      if (elements.empty()) fail(Errc::parse_error, "property before element in '" + path + "'");
      PlyProperty p;
      std::string first;
      ls >> first;
      if (first == "list") {
        p.is_list = true;
        if (!(ls >> p.count_type >> p.type >> p.name)) {
          fail(Errc::parse_error, "malformed list property in '" + path + "'");
        }
      } else {
        p.type = first;
        if (!(ls >> p.name)) fail(Errc::parse_error, "malformed property in '" + path + "'");
      }
      if (ply_type_size(p.type) == 0 || (p.is_list && ply_type_size(p.count_type) == 0)) {
        fail(Errc::parse_error, "unknown PLY type '" + p.type + "' in '" + path + "'");
      }
      elements.back().properties.push_back(p);
    } else if (keyword == "end_header") {
      break;
    } else {
      fail(Errc::parse_error, "unknown PLY header keyword '" + keyword + "' in '" + path + "'");
    }
  }
  if (!format_seen) fail(Errc::parse_error, "PLY header missing format line in '" + path + "'");

  const auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                      [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) fail(Errc::parse_error, "PLY without vertex element in '" + path + "'");
  if (vertex_it->count < 1) fail(Errc::empty_cloud, "empty cloud in '" + path + "'");

  int xi = -1, yi = -1, zi = -1;
  for (size_t p = 0; p < vertex_it->properties.size(); ++p) {
    const PlyProperty& prop = vertex_it->properties[p];
    if (prop.is_list) continue;
    const bool is_float = ply_type_size(prop.type) >= 4 &&
                          (prop.type == "float" || prop.type == "float32" || prop.type == "double" ||
                           prop.type == "float64");
    if (!is_float) continue;
    if (prop.name == "x") xi = static_cast<int>(p);
    if (prop.name == "y") yi = static_cast<int>(p);
    if (prop.name == "z") zi = static_cast<int>(p);
  }
  if (xi < 0 || yi < 0 || zi < 0) {
    fail(Errc::parse_error, "PLY vertex element lacks float x/y/z in '" + path + "'");
  }

  Eigen::Matrix3Xd mat(3, vertex_it->count);

  auto read_ascii_row = [&](const PlyElement& e, bool keep, long row) {
    std::string row_line;
    do {
      if (!std::getline(in, row_line)) fail(Errc::parse_error, "truncated PLY payload in '" + path + "'");
      if (!row_line.empty() && row_line.back() == '\r') row_line.pop_back();
    } while (row_line.find_first_not_of(" \t") == std::string::npos);
    std::istringstream rs(row_line);
    double value = 0.0;
    for (size_t p = 0; p < e.properties.size(); ++p) {
      const PlyProperty& prop = e.properties[p];
      if (prop.is_list) {
        long count;
        if (!(rs >> count)) fail(Errc::parse_error, "malformed PLY list in '" + path + "'");
        for (long c = 0; c < count; ++c) {
          if (!(rs >> value)) fail(Errc::parse_error, "malformed PLY list in '" + path + "'");
        }
        continue;
      }
      if (!(rs >> value)) fail(Errc::parse_error, "malformed PLY row in '" + path + "'");
      if (keep) {
        if (static_cast<int>(p) == xi) mat(0, row) = value;
        if (static_cast<int>(p) == yi) mat(1, row) = value;
        if (static_cast<int>(p) == zi) mat(2, row) = value;
      }
    }
  };

  auto read_binary_row = [&](const PlyElement& e, bool keep, long row) {
    for (size_t p = 0; p < e.properties.size(); ++p) {
      const PlyProperty& prop = e.properties[p];
      if (prop.is_list) {
        const double count = read_binary_scalar(in, prop.count_type, path);
        for (long c = 0; c < static_cast<long>(count); ++c) read_binary_scalar(in, prop.type, path);
        continue;
      }
      const double value = read_binary_scalar(in, prop.type, path);
      if (keep) {
        if (static_cast<int>(p) == xi) mat(0, row) = value;
        if (static_cast<int>(p) == yi) mat(1, row) = value;
        if (static_cast<int>(p) == zi) mat(2, row) = value;
      }
    }
  };

  for (const PlyElement& e : elements) {
    const bool keep = (&e == &*vertex_it);
    for (long row = 0; row < e.count; ++row) {
      if (binary) {
        read_binary_row(e, keep, row);
      } else {
        read_ascii_row(e, keep, row);
      }
    }
    if (keep) break;  // everything after the vertex element is ignorable
  }

  return PointCloud(std::move(mat), std::move(id));
}

void write_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (int i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i);
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
        << '\n';
  }
  if (!out) fail(Errc::io_error, "write failed for '" + path + "'");
}

void write_ply_with_labels(const std::string& path, const PointCloud& cloud,
                           std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != cloud.size()) {
    fail(Errc::count_mismatch, "label/point count mismatch");
  }
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nproperty int class\nend_header\n";
  for (int i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.point(i);
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << ' '
        << labels[i] << '\n';
  }
  if (!out) fail(Errc::io_error, "write failed for '" + path + "'");
}

PointCloud read_cloud(const std::string& path, std::string id) {
  const size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot + 1));
  if (ext == "xyz" || ext == "txt") return read_xyz(path, std::move(id));
  if (ext == "ply") return read_ply(path, std::move(id));
  fail(Errc::invalid_argument, "unsupported cloud format '" + ext + "' for '" + path + "'");
}

}  // namespace retreg
