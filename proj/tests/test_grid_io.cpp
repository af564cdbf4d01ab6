// Copyright 2026 The ECTPI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "ectpi/grid_io.hpp"
#include "support.hpp"

namespace ectpi {
namespace {

using cplx = std::complex<double>;

ResponseGrid small_grid() {
  GridSpec s;
  s.pi2.n = 4;
  s.pi3.n = 3;
  s.pi4.n = 2;
  ResponseGrid::Axes axes{s.pi2.nodes(), s.pi3.nodes(), s.pi4.nodes()};
  std::vector<cplx> v;
  for (std::size_t k = 0; k < 24; ++k) v.emplace_back(0.1 * k, -1.0 / (k + 1.0));
  return ResponseGrid(reference_probe(), axes, v, GridBuildInfo{});
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
}

DatabaseErrorKind load_error_kind(const std::string& path) {
  try {
    load_grid(path);
  } catch (const DatabaseError& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kFormat);
    return e.kind();
  }
  ADD_FAILURE() << "load_grid accepted a damaged file";
  return DatabaseErrorKind::kBadMetadata;
}

TEST(GridIo, RoundTripIsExact) {
  const auto g = small_grid();
  const std::string path = test::scratch_path("roundtrip.db");
  save_grid(g, path);
  EXPECT_TRUE(load_grid(path) == g);
  EXPECT_TRUE(std::filesystem::exists(manifest_path(path)));
  const auto manifest = nlohmann::json::parse(read_file(manifest_path(path)));
  EXPECT_EQ(manifest, nlohmann::json::parse(grid_metadata_json(g)));
}

TEST(GridIo, DefaultGridRoundTrip) {
  const auto& g = test::default_grid();
  const std::string path = test::scratch_path("default_copy.db");
  save_grid(g, path);
  EXPECT_TRUE(load_grid(path) == g);
}

TEST(GridIo, HeaderLayout) {
  const auto g = small_grid();
  const std::string path = test::scratch_path("layout.db");
  save_grid(g, path);
  const std::string data = read_file(path);
  ASSERT_GE(data.size(), 20u);
  EXPECT_EQ(data.substr(0, 8), "ECTPIDB1");
  std::uint32_t version = 0;
  std::memcpy(&version, data.data() + 8, 4);
  EXPECT_EQ(version, kDatabaseVersion);
  std::uint64_t len = 0;
  std::memcpy(&len, data.data() + 12, 8);
  EXPECT_EQ(data.size(), 20 + len + 24 * 16);
  const auto meta = nlohmann::json::parse(data.substr(20, len));
  EXPECT_EQ(meta.at("probe").at("turns").get<double>(), 117.0);
  // First payload value is node (0, 0, 0).
  double re = 0.0, im = 0.0;
  std::memcpy(&re, data.data() + 20 + len, 8);
  std::memcpy(&im, data.data() + 28 + len, 8);
  EXPECT_EQ(re, 0.0);
  EXPECT_EQ(im, -1.0);
}

TEST(GridIo, DamagedFilesAreRejectedByKind) {
  const auto g = small_grid();
  const std::string path = test::scratch_path("good.db");
  save_grid(g, path);
  const std::string good = read_file(path);
  std::uint64_t len = 0;
  std::memcpy(&len, good.data() + 12, 8);
  const std::string bad = test::scratch_path("bad.db");

  std::string d = good;
  d[0] = 'X';
  write_file(bad, d);
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kBadMagic);

  d = good;
  const std::uint32_t v2 = 2;
  std::memcpy(d.data() + 8, &v2, 4);
  write_file(bad, d);
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kUnsupportedVersion);

  write_file(bad, good.substr(0, 5));
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kTruncated);
  write_file(bad, good.substr(0, 30));
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kTruncated);
  write_file(bad, good.substr(0, good.size() - 3));
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kTruncated);

  d = good;
  d[20] = '#';
  write_file(bad, d);
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kBadMetadata);

  write_file(bad, good + "xx");
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kBadMetadata);

  d = good;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(d.data() + 20 + len + 16 * 5, &nan, 8);
  write_file(bad, d);
  EXPECT_EQ(load_error_kind(bad), DatabaseErrorKind::kInvalidPayload);
}

TEST(GridIo, MissingFileIsAnIoError) {
  EXPECT_THROW(load_grid(test::scratch_path("absent.db")), IoError);
  EXPECT_THROW(save_grid(small_grid(), "/nonexistent_dir/x/y.db"), IoError);
}

TEST(GridIo, ErrorKindNames) {
  EXPECT_STREQ(to_string(DatabaseErrorKind::kBadMagic), "bad-magic");
  EXPECT_STRNE(to_string(DatabaseErrorKind::kTruncated), "");
}

}  // namespace
}  // namespace ectpi
