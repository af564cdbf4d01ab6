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

// Response database file, all integers little-endian:
//
//   magic    8 bytes  "ECTPIDB1"
//   version  u32      1
//   length   u64      byte length of the JSON metadata block
//   metadata          UTF-8 JSON (probe, shape vector, tilt, axes, build info)
//   payload           n2*n3*n4 x (f64 real, f64 imag), pi4 fastest, then pi3,
//                     then pi2
//
// save() also writes the metadata as a human-readable manifest to
// "<path>.json".

#ifndef ECTPI_GRID_IO_HPP_
#define ECTPI_GRID_IO_HPP_

#include <cstdint>
#include <string>

#include "ectpi/error.hpp"
#include "ectpi/response_grid.hpp"

namespace ectpi {

inline constexpr char kDatabaseMagic[8] = {'E', 'C', 'T', 'P', 'I', 'D', 'B', '1'};
inline constexpr std::uint32_t kDatabaseVersion = 1;

enum class DatabaseErrorKind {
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kBadMetadata,
  kInvalidPayload,
};

const char* to_string(DatabaseErrorKind kind);

class DatabaseError : public Error {
 public:
  DatabaseError(DatabaseErrorKind kind, const std::string& what)
      : Error(ErrorCategory::kFormat, what), kind_(kind) {}

  DatabaseErrorKind kind() const noexcept { return kind_; }

 private:
  DatabaseErrorKind kind_;
};

// Metadata block as JSON text (also the manifest content).
std::string grid_metadata_json(const ResponseGrid& grid);

void save_grid(const ResponseGrid& grid, const std::string& path);
ResponseGrid load_grid(const std::string& path);

std::string manifest_path(const std::string& path);

}  // namespace ectpi

#endif  // ECTPI_GRID_IO_HPP_
