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

#include "ectpi/grid_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

namespace ectpi {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  v = to_little(v);
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) {
      std::ostringstream msg;
      msg << "database truncated while reading " << what << " (need " << n
          << " bytes, " << remaining() << " left)";
      throw DatabaseError(DatabaseErrorKind::kTruncated, msg.str());
    }
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

json metadata(const ResponseGrid& grid) {
  const auto& p = grid.probe();
  const auto& info = grid.info();
  static constexpr const char* names[3] = {"pi2", "pi3", "pi4"};
  json axes = json::object();
  for (int d = 0; d < 3; ++d) {
    axes[names[d]] = {{"spacing", to_string(info.spacing[d])},
                      {"nodes", grid.axis(d)}};
  }
  return {
      {"format_version", info.format_version},
      {"probe",
       {{"inner_radius_m", p.inner_radius},
        {"outer_radius_m", p.outer_radius},
        {"height_m", p.height},
        {"turns", p.turns},
        {"tilt_rad", p.tilt}}},
      {"shape_vector", {p.shape_radius(), p.shape_height()}},
      {"tilt_rad", p.tilt},
      {"axes", axes},
      {"build",
       {{"reference_sigma_s_per_m", info.reference_sigma},
        {"forward_rel_tol", info.forward_rel_tol},
        {"resolution", {grid.size(0), grid.size(1), grid.size(2)}}}},
  };
}

}  // namespace

const char* to_string(DatabaseErrorKind kind) {
  switch (kind) {
    case DatabaseErrorKind::kBadMagic: return "bad-magic";
    case DatabaseErrorKind::kUnsupportedVersion: return "unsupported-version";
    case DatabaseErrorKind::kTruncated: return "truncated";
    case DatabaseErrorKind::kBadMetadata: return "bad-metadata";
    case DatabaseErrorKind::kInvalidPayload: return "invalid-payload";
  }
  return "unknown";
}

std::string grid_metadata_json(const ResponseGrid& grid) {
  return metadata(grid).dump(2);
}

std::string manifest_path(const std::string& path) { return path + ".json"; }

void save_grid(const ResponseGrid& grid, const std::string& path) {
  const std::string meta = grid_metadata_json(grid);
  std::string out;
  out.reserve(32 + meta.size() + grid.node_count() * 16);
  out.append(kDatabaseMagic, sizeof(kDatabaseMagic));
  put<std::uint32_t>(out, grid.info().format_version);
  put<std::uint64_t>(out, meta.size());
  out += meta;
  for (const auto& v : grid.values()) {
    put<double>(out, v.real());
    put<double>(out, v.imag());
  }

  // Write to a sibling temp file and rename so readers never see a partial
  // database.
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move database into place at '" + path + "'");
  }

  std::ofstream m(manifest_path(path), std::ios::trunc);
  if (!m) throw IoError("cannot write manifest '" + manifest_path(path) + "'");
  m << meta << '\n';
}

ResponseGrid load_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open database '" + path + "'");
  const std::string data((std::istreambuf_iterator<char>(f)),
                         std::istreambuf_iterator<char>());
  Reader r(data);

  const std::string magic = r.bytes(sizeof(kDatabaseMagic), "magic");
  if (std::memcmp(magic.data(), kDatabaseMagic, sizeof(kDatabaseMagic)) != 0) {
    throw DatabaseError(DatabaseErrorKind::kBadMagic,
                        "'" + path + "' is not a response database (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("format version");
  if (version != kDatabaseVersion) {
    throw DatabaseError(DatabaseErrorKind::kUnsupportedVersion,
                        "unsupported database format version " +
                            std::to_string(version));
  }
  const auto meta_len = r.get<std::uint64_t>("metadata length");
  if (meta_len > r.remaining()) {
    throw DatabaseError(DatabaseErrorKind::kTruncated,
                        "database truncated inside the metadata block");
  }
  const std::string meta_text =
      r.bytes(static_cast<std::size_t>(meta_len), "metadata");

  ProbeGeometry probe;
  ResponseGrid::Axes axes;
  GridBuildInfo info;
  try {
    const json meta = json::parse(meta_text);
    const auto& p = meta.at("probe");
    probe.inner_radius = p.at("inner_radius_m").get<double>();
    probe.outer_radius = p.at("outer_radius_m").get<double>();
    probe.height = p.at("height_m").get<double>();
    probe.turns = p.at("turns").get<double>();
    probe.tilt = p.at("tilt_rad").get<double>();
    static constexpr const char* names[3] = {"pi2", "pi3", "pi4"};
    for (int d = 0; d < 3; ++d) {
      const auto& a = meta.at("axes").at(names[d]);
      axes[d] = a.at("nodes").get<std::vector<double>>();
      info.spacing[d] = axis_spacing_from_string(a.at("spacing").get<std::string>());
    }
    const auto& b = meta.at("build");
    info.reference_sigma = b.at("reference_sigma_s_per_m").get<double>();
    info.forward_rel_tol = b.at("forward_rel_tol").get<double>();
    info.format_version = meta.at("format_version").get<std::uint32_t>();
  } catch (const json::exception& e) {
    throw DatabaseError(DatabaseErrorKind::kBadMetadata,
                        std::string("malformed database metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw DatabaseError(DatabaseErrorKind::kBadMetadata,
                        std::string("malformed database metadata: ") + e.what());
  }
  if (info.format_version != version) {
    throw DatabaseError(DatabaseErrorKind::kBadMetadata,
                        "metadata format version disagrees with the header");
  }

  std::size_t count = 1;
  for (const auto& a : axes) count *= a.size();
  if (r.remaining() < count * 16) {
    throw DatabaseError(DatabaseErrorKind::kTruncated,
                        "database payload truncated: expected " +
                            std::to_string(count * 16) + " bytes, found " +
                            std::to_string(r.remaining()));
  }
  if (r.remaining() > count * 16) {
    throw DatabaseError(DatabaseErrorKind::kBadMetadata,
                        "database has trailing bytes after the payload");
  }
  std::vector<std::complex<double>> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double re = r.get<double>("payload");
    const double im = r.get<double>("payload");
    if (!std::isfinite(re) || !std::isfinite(im)) {
      throw DatabaseError(DatabaseErrorKind::kInvalidPayload,
                          "non-finite response value at node " + std::to_string(k));
    }
    values[k] = {re, im};
  }
  try {
    return ResponseGrid(probe, std::move(axes), std::move(values), info);
  } catch (const DomainError& e) {
    throw DatabaseError(DatabaseErrorKind::kBadMetadata,
                        std::string("inconsistent database: ") + e.what());
  }
}

}  // namespace ectpi
