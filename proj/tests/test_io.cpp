#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "retreg/features/crsf.hpp"
#include "retreg/io/cloud_io.hpp"
#include "test_helpers.hpp"

using namespace retreg;
using namespace retreg::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("retreg_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void append_u32(std::vector<unsigned char>& bytes, uint32_t v) {
  for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xff));
}

void append_f32(std::vector<unsigned char>& bytes, float v) {
  unsigned char buf[4];
  std::memcpy(buf, &v, 4);
  bytes.insert(bytes.end(), buf, buf + 4);
}

}  // namespace

TEST_CASE("xyz round-trip preserves coordinates exactly") {
  TempDir tmp;
  const PointCloud cloud = random_cloud(50, 17);
  write_xyz(tmp.file("cloud.xyz"), cloud);
  const PointCloud back = read_xyz(tmp.file("cloud.xyz"), "back");
  REQUIRE(back.size() == cloud.size());
  CHECK((back.points() - cloud.points()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.id() == "back");
}

TEST_CASE("xyz reader rejects malformed lines") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("bad.xyz"));
    out << "1.0 2.0 3.0\n1.0 nope 3.0\n";
  }
  try {
    read_xyz(tmp.file("bad.xyz"));
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_xyz(tmp.file("absent.xyz")), Error);
}

TEST_CASE("ply ascii round-trip via the writer") {
  TempDir tmp;
  const PointCloud cloud = random_cloud(64, 23);
  write_ply(tmp.file("cloud.ply"), cloud);
  const PointCloud back = read_ply(tmp.file("cloud.ply"));
  REQUIRE(back.size() == cloud.size());
  CHECK((back.points() - cloud.points()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ply reader handles binary little-endian with extra properties") {
  TempDir tmp;
  const int n = 5;
  std::vector<unsigned char> bytes;
  const std::string header =
      "ply\nformat binary_little_endian 1.0\n"
      "comment synthetic fixture\n"
      "element vertex " + std::to_string(n) + "\n"
      "property float x\nproperty float y\nproperty float z\n"
      "property uchar red\n"
      "end_header\n";
  bytes.insert(bytes.end(), header.begin(), header.end());
  Eigen::Matrix3Xd expected(3, n);
  for (int i = 0; i < n; ++i) {
    const float x = 0.5f * i, y = -1.0f + i, z = 2.0f * i;
    expected.col(i) = Eigen::Vector3d(x, y, z);
    append_f32(bytes, x);
    append_f32(bytes, y);
    append_f32(bytes, z);
    bytes.push_back(static_cast<unsigned char>(i));
  }
  write_bytes(tmp.file("bin.ply"), bytes);

  const PointCloud cloud = read_ply(tmp.file("bin.ply"));
  REQUIRE(cloud.size() == n);
  CHECK((cloud.points() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ply reader skips non-vertex elements and double precision works") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("faces.ply"));
    out << "ply\nformat ascii 1.0\n"
        << "element vertex 3\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "element face 1\nproperty list uchar int vertex_indices\n"
        << "end_header\n"
        << "0 0 0\n1 0 0\n0 1 0\n"
        << "3 0 1 2\n";
  }
  const PointCloud cloud = read_ply(tmp.file("faces.ply"));
  REQUIRE(cloud.size() == 3);
  CHECK(cloud.point(1) == Eigen::Vector3d(1.0, 0.0, 0.0));
}

TEST_CASE("ply reader reports declared error codes") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("notply.ply"));
    out << "solid something\n";
  }
  try {
    read_ply(tmp.file("notply.ply"));
    FAIL("expected bad magic");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_magic);
  }

  {
    std::ofstream out(tmp.file("short.ply"));
    out << "ply\nformat ascii 1.0\nelement vertex 4\n"
        << "property float x\nproperty float y\nproperty float z\nend_header\n"
        << "0 0 0\n1 1 1\n";
  }
  try {
    read_ply(tmp.file("short.ply"));
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
  }

  {
    std::ofstream out(tmp.file("bigendian.ply"));
    out << "ply\nformat binary_big_endian 1.0\nelement vertex 1\n"
        << "property float x\nproperty float y\nproperty float z\nend_header\n";
  }
  CHECK_THROWS_AS(read_ply(tmp.file("bigendian.ply")), Error);
}

TEST_CASE("labeled ply writes a class property and stays readable") {
  TempDir tmp;
  const PointCloud cloud = random_cloud(8, 3);
  const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1};
  write_ply_with_labels(tmp.file("split.ply"), cloud, labels);

  const PointCloud back = read_ply(tmp.file("split.ply"));
  CHECK(back.size() == cloud.size());
  CHECK((back.points() - cloud.points()).cwiseAbs().maxCoeff() == 0.0);

  std::ifstream in(tmp.file("split.ply"));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("property int class") != std::string::npos);

  CHECK_THROWS_AS(write_ply_with_labels(tmp.file("bad.ply"), cloud, std::vector<int>{1, 2}), Error);
}

TEST_CASE("crsf round-trip is bit exact") {
  TempDir tmp;
  const FeatureSet features = random_features(20, 33, 7);
  write_features(tmp.file("f.crsf"), features);
  const FeatureSet back = load_features(tmp.file("f.crsf"), 20);
  CHECK(back.source() == FeatureSource::external);
  CHECK(back.matrix() == features.matrix());
}

TEST_CASE("crsf loader reports distinct error codes") {
  TempDir tmp;
  const FeatureSet features = random_features(4, 8, 9);
  write_features(tmp.file("ok.crsf"), features);

  try {
    load_features(tmp.file("ok.crsf"), 5);
    FAIL("expected count mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::count_mismatch);
    CHECK(std::string(e.what()).find("feature/point count mismatch") != std::string::npos);
  }

  {
    std::vector<unsigned char> bytes{'N', 'O', 'P', 'E'};
    append_u32(bytes, 1);
    append_u32(bytes, 1);
    append_u32(bytes, 1);
    append_f32(bytes, 1.0f);
    write_bytes(tmp.file("magic.crsf"), bytes);
  }
  try {
    load_features(tmp.file("magic.crsf"), 1);
    FAIL("expected bad magic");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_magic);
  }

  {
    std::vector<unsigned char> bytes{'C', 'R', 'S', 'F'};
    append_u32(bytes, 9);
    append_u32(bytes, 1);
    append_u32(bytes, 1);
    append_f32(bytes, 1.0f);
    write_bytes(tmp.file("version.crsf"), bytes);
  }
  try {
    load_features(tmp.file("version.crsf"), 1);
    FAIL("expected bad version");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_version);
  }

  {
    std::vector<unsigned char> bytes{'C', 'R', 'S', 'F'};
    append_u32(bytes, 1);
    append_u32(bytes, 1);
    append_u32(bytes, 2);
    append_f32(bytes, std::numeric_limits<float>::quiet_NaN());
    append_f32(bytes, 1.0f);
    write_bytes(tmp.file("nan.crsf"), bytes);
  }
  try {
    load_features(tmp.file("nan.crsf"), 1);
    FAIL("expected non-finite");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_finite);
    CHECK(std::string(e.what()).find("non-finite feature") != std::string::npos);
  }

  {
    std::vector<unsigned char> bytes{'C', 'R', 'S', 'F'};
    append_u32(bytes, 1);
    append_u32(bytes, 3);
    append_u32(bytes, 2);
    append_f32(bytes, 1.0f);  // payload truncated
    write_bytes(tmp.file("trunc.crsf"), bytes);
  }
  try {
    load_features(tmp.file("trunc.crsf"), 3);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
  }
}

TEST_CASE("crsf loader renormalizes drifted rows") {
  TempDir tmp;
  std::vector<unsigned char> bytes{'C', 'R', 'S', 'F'};
  append_u32(bytes, 1);
  append_u32(bytes, 1);
  append_u32(bytes, 4);
  append_f32(bytes, 2.0f);
  append_f32(bytes, 0.0f);
  append_f32(bytes, 0.0f);
  append_f32(bytes, 0.0f);
  write_bytes(tmp.file("drift.crsf"), bytes);

  const FeatureSet features = load_features(tmp.file("drift.crsf"), 1);
  CHECK(features.matrix()(0, 0) == 1.0f);
}

TEST_CASE("read_cloud dispatches by extension") {
  TempDir tmp;
  const PointCloud cloud = random_cloud(10, 31);
  write_ply(tmp.file("c.ply"), cloud);
  write_xyz(tmp.file("c.xyz"), cloud);
  CHECK(read_cloud(tmp.file("c.ply")).size() == 10);
  CHECK(read_cloud(tmp.file("c.xyz")).size() == 10);
  CHECK_THROWS_AS(read_cloud(tmp.file("c.obj")), Error);
}
