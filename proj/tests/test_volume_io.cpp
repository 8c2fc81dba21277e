#include "xtalsst/volume_io.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "xtalsst/errors.hpp"

namespace fs = std::filesystem;
using namespace xtal;

namespace {

class VolumeIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("xtal_io_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()
                                            ->current_test_info()
                                            ->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

ScalarVolume random_volume(int n1, int n2, int n3, std::uint64_t seed) {
  ScalarVolume vol(n1, n2, n3);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  for (auto& v : vol.data) v = dist(rng);
  return vol;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Builds a minimal npy v1.0 file by hand, independent of the writer.
std::string handmade_npy(const std::string& descr, const std::string& order,
                         const std::string& shape, const void* payload, std::size_t bytes) {
  std::string header = "{'descr': '" + descr + "', 'fortran_order': " + order +
                       ", 'shape': " + shape + ", }";
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';
  std::string file("\x93NUMPY\x01\x00", 8);
  const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
  file.push_back(static_cast<char>(hlen & 0xff));
  file.push_back(static_cast<char>(hlen >> 8));
  file += header;
  file.append(static_cast<const char*>(payload), bytes);
  return file;
}

}  // namespace

TEST_F(VolumeIoTest, NpyRoundTripIsBitExact) {
  const ScalarVolume vol = random_volume(5, 6, 7, 11);
  const fs::path path = dir_ / "vol.npy";
  save_volume(vol, path);
  const ScalarVolume back = load_volume(path);
  ASSERT_EQ(back.dims, vol.dims);
  ASSERT_EQ(back.data.size(), vol.data.size());
  EXPECT_EQ(std::memcmp(back.data.data(), vol.data.data(), vol.data.size() * sizeof(double)), 0);
}

TEST_F(VolumeIoTest, NpyHeaderLayout) {
  const ScalarVolume vol = random_volume(5, 6, 7, 12);
  const fs::path path = dir_ / "vol.npy";
  save_volume(vol, path);
  const std::string bytes = read_bytes(path);
  ASSERT_GE(bytes.size(), 10u);
  EXPECT_EQ(bytes.substr(0, 8), std::string("\x93NUMPY\x01\x00", 8));
  const std::uint16_t hlen = static_cast<std::uint8_t>(bytes[8]) |
                             (static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes[9])) << 8);
  EXPECT_EQ((10 + hlen) % 64, 0u);
  const std::string header = bytes.substr(10, hlen);
  EXPECT_NE(header.find("'descr': '<f8'"), std::string::npos);
  EXPECT_NE(header.find("'fortran_order': False"), std::string::npos);
  EXPECT_NE(header.find("(5, 6, 7)"), std::string::npos);
  EXPECT_EQ(header.back(), '\n');
  EXPECT_EQ(bytes.size(), 10 + hlen + vol.data.size() * sizeof(double));
}

TEST_F(VolumeIoTest, NpyFloat32IsWidened) {
  std::vector<float> payload = {1.5f, -2.25f, 0.0f, 8.0f, -1.0f, 3.0f, 0.5f, 4.0f};
  const fs::path path = dir_ / "f32.npy";
  write_bytes(path, handmade_npy("<f4", "False", "(2, 2, 2)", payload.data(),
                                 payload.size() * sizeof(float)));
  const ScalarVolume vol = load_volume(path);
  ASSERT_EQ(vol.dims, (Index3{2, 2, 2}));
  for (std::size_t i = 0; i < payload.size(); ++i)
    EXPECT_EQ(vol.data[i], static_cast<double>(payload[i]));
}

TEST_F(VolumeIoTest, NpyRejectsFortranOrder) {
  std::vector<double> payload(8, 0.0);
  const fs::path path = dir_ / "fortran.npy";
  write_bytes(path, handmade_npy("<f8", "True", "(2, 2, 2)", payload.data(),
                                 payload.size() * sizeof(double)));
  EXPECT_THROW(load_volume(path), FormatError);
}

TEST_F(VolumeIoTest, NpyRejectsTruncatedPayload) {
  std::vector<double> payload(7, 1.0);  // one element short of 2x2x2
  const fs::path path = dir_ / "short.npy";
  write_bytes(path, handmade_npy("<f8", "False", "(2, 2, 2)", payload.data(),
                                 payload.size() * sizeof(double)));
  EXPECT_THROW(load_volume(path), FormatError);
}

TEST_F(VolumeIoTest, NpyRejectsBadMagicAndNon3d) {
  const fs::path bad = dir_ / "bad.npy";
  write_bytes(bad, "not an npy file at all");
  EXPECT_THROW(load_volume(bad), FormatError);

  std::vector<double> payload(4, 0.0);
  const fs::path flat = dir_ / "flat.npy";
  write_bytes(flat, handmade_npy("<f8", "False", "(4,)", payload.data(),
                                 payload.size() * sizeof(double)));
  EXPECT_THROW(load_volume(flat), FormatError);
}

TEST_F(VolumeIoTest, RawRoundTripAndSidecar) {
  const ScalarVolume vol = random_volume(4, 3, 5, 13);
  const fs::path path = dir_ / "vol.f64raw";
  save_volume(vol, path);
  ASSERT_TRUE(fs::exists(dir_ / "vol.meta.json"));
  const std::string meta = read_bytes(dir_ / "vol.meta.json");
  EXPECT_NE(meta.find("\"dims\""), std::string::npos);
  EXPECT_NE(meta.find("\"f64\""), std::string::npos);

  const ScalarVolume back = load_volume(path);
  ASSERT_EQ(back.dims, vol.dims);
  EXPECT_EQ(std::memcmp(back.data.data(), vol.data.data(), vol.data.size() * sizeof(double)), 0);
}

TEST_F(VolumeIoTest, RawRequiresSidecarAndMatchingLength) {
  const ScalarVolume vol = random_volume(4, 3, 5, 14);
  const fs::path path = dir_ / "vol.f64raw";
  save_volume(vol, path);
  fs::remove(dir_ / "vol.meta.json");
  EXPECT_THROW(load_volume(path), FormatError);

  save_volume(vol, path);
  fs::resize_file(path, 8);
  EXPECT_THROW(load_volume(path), FormatError);
}

TEST_F(VolumeIoTest, UnknownExtensionRejected) {
  const ScalarVolume vol = random_volume(4, 4, 4, 15);
  EXPECT_THROW(save_volume(vol, dir_ / "vol.dat"), FormatError);
  write_bytes(dir_ / "vol.dat", "x");
  EXPECT_THROW(load_volume(dir_ / "vol.dat"), FormatError);
}

TEST_F(VolumeIoTest, SliceExportMatchesDirectIndexing) {
  const ScalarVolume vol = random_volume(4, 5, 6, 16);
  const auto paths = export_field_slices(vol, 1, 2, dir_);
  ASSERT_EQ(paths.size(), 2u);  // planes 0 and 2 along the first axis
  EXPECT_EQ(paths[0].filename(), "slice_1_0.npy");
  EXPECT_EQ(paths[1].filename(), "slice_1_2.npy");

  for (std::size_t p = 0; p < paths.size(); ++p) {
    const int i1 = static_cast<int>(2 * p);
    const std::string bytes = read_bytes(paths[p]);
    const std::uint16_t hlen =
        static_cast<std::uint8_t>(bytes[8]) |
        (static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes[9])) << 8);
    const std::string header = bytes.substr(10, hlen);
    EXPECT_NE(header.find("(5, 6)"), std::string::npos);
    ASSERT_EQ(bytes.size(), 10 + hlen + 5 * 6 * sizeof(double));
    const double* plane = reinterpret_cast<const double*>(bytes.data() + 10 + hlen);
    for (int i2 = 0; i2 < 5; ++i2)
      for (int i3 = 0; i3 < 6; ++i3) EXPECT_EQ(plane[i2 * 6 + i3], vol.at(i1, i2, i3));
  }
}

TEST_F(VolumeIoTest, SliceExportValidatesArguments) {
  const ScalarVolume vol = random_volume(4, 4, 4, 17);
  EXPECT_THROW(export_field_slices(vol, 0, 1, dir_), ValidationError);
  EXPECT_THROW(export_field_slices(vol, 4, 1, dir_), ValidationError);
  EXPECT_THROW(export_field_slices(vol, 1, 0, dir_), ValidationError);
  EXPECT_THROW(export_field_slices(vol, 1, 5, dir_), ValidationError);
}

TEST_F(VolumeIoTest, ValidateVolumeRejectsBadShapes) {
  ScalarVolume vol = random_volume(4, 4, 4, 18);
  vol.dims[1] = 0;
  EXPECT_THROW(validate_volume(vol), ValidationError);
  vol.dims[1] = 4;
  vol.data[10] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate_volume(vol), ValidationError);
  vol.data[10] = 0.0;
  vol.data.pop_back();
  EXPECT_THROW(validate_volume(vol), ValidationError);
}
