#include "retreg/features/crsf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace retreg {

namespace {

constexpr char kMagic[4] = {'C', 'R', 'S', 'F'};
constexpr uint32_t kVersion = 1;

uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    fail(Errc::parse_error, "truncated CRSF header in '" + path + "'");
  }
  return static_cast<uint32_t>(buf[0]) | (static_cast<uint32_t>(buf[1]) << 8) |
         (static_cast<uint32_t>(buf[2]) << 16) | (static_cast<uint32_t>(buf[3]) << 24);
}

void write_u32(std::ostream& out, uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

void write_crsf(const std::string& path, const FeatureSet::Matrix& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(rows.rows()));
  write_u32(out, static_cast<uint32_t>(rows.cols()));
  static_assert(std::endian::native == std::endian::little, "CRSF writer assumes little-endian");
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(sizeof(float)) * rows.size());
  if (!out) fail(Errc::io_error, "write failed for '" + path + "'");
}

FeatureSet::Matrix read_crsf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open feature file '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4)) fail(Errc::parse_error, "truncated CRSF header in '" + path + "'");
  if (std::memcmp(magic, kMagic, 4) != 0) fail(Errc::bad_magic, "bad CRSF magic in '" + path + "'");
  const uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    fail(Errc::bad_version, "unsupported CRSF version " + std::to_string(version) + " in '" + path + "'");
  }
  const uint32_t n = read_u32(in, path);
  const uint32_t c = read_u32(in, path);
  if (n == 0 || c == 0) fail(Errc::parse_error, "empty feature matrix in '" + path + "'");

  FeatureSet::Matrix rows(n, c);
  if (!in.read(reinterpret_cast<char*>(rows.data()),
               static_cast<std::streamsize>(sizeof(float)) * rows.size())) {
    fail(Errc::parse_error, "truncated CRSF payload in '" + path + "'");
  }
  if (!rows.allFinite()) fail(Errc::non_finite, "non-finite feature in '" + path + "'");
  return rows;
}

FeatureSet load_features(const std::string& path, int expected_points) {
  FeatureSet::Matrix rows = read_crsf(path);
  if (static_cast<int>(rows.rows()) != expected_points) {
    fail(Errc::count_mismatch, "feature/point count mismatch in '" + path + "': " +
                                   std::to_string(rows.rows()) + " rows for " +
                                   std::to_string(expected_points) + " points");
  }
  double worst = 0.0;
  for (int i = 0; i < rows.rows(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < rows.cols(); ++k) {
      const double v = static_cast<double>(rows(i, k));
      sum += v * v;
    }
    worst = std::max(worst, std::abs(std::sqrt(sum) - 1.0));
  }
  if (worst > 1e-6) return FeatureSet::from_unnormalized(std::move(rows), FeatureSource::external);
  return FeatureSet(std::move(rows), FeatureSource::external);
}

void write_features(const std::string& path, const FeatureSet& features) {
  write_crsf(path, features.matrix());
}

}  // namespace retreg
