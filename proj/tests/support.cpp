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

#include "support.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>

#include "ectpi/grid_io.hpp"
#include "ectpi/nondim.hpp"

namespace ectpi::test {

namespace fs = std::filesystem;

namespace {

fs::path cache_dir() {
  fs::path dir(ECTPI_TEST_CACHE_DIR);
  fs::create_directories(dir);
  return dir;
}

bool matches_default(const ResponseGrid& g) {
  const GridSpec spec;
  const ResponseGrid::Axes want{spec.pi2.nodes(), spec.pi3.nodes(), spec.pi4.nodes()};
  return g.probe() == reference_probe() && g.axes() == want &&
         g.info() == GridBuildInfo{};
}

ResponseGrid load_or_build() {
  const std::string path = default_grid_path();
  if (fs::exists(path)) {
    try {
      auto g = load_grid(path);
      if (matches_default(g)) return g;
    } catch (const Error&) {
      // Stale or damaged cache; rebuild below.
    }
  }
  auto g = build_grid(reference_model(), GridSpec{});
  // save_grid writes a temporary file and renames it, so concurrent test
  // processes never observe a partial database.
  save_grid(g, path);
  return g;
}

}  // namespace

const ImpedanceModel& reference_model() {
  static const ImpedanceModel model(reference_probe());
  return model;
}

std::string default_grid_path() { return (cache_dir() / "default.db").string(); }

const ResponseGrid& default_grid() {
  static const ResponseGrid grid = load_or_build();
  return grid;
}

std::string scratch_path(const std::string& stem) {
  static std::atomic<int> counter{0};
  const fs::path dir = cache_dir() / "scratch";
  fs::create_directories(dir);
  return (dir / (stem + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++)))
      .string();
}

std::complex<double> forward(double sigma, double thickness, double lift_off,
                             double f_hz) {
  return reference_model().delta_impedance({sigma, thickness},
                                           {angular_frequency(f_hz), lift_off});
}

}  // namespace ectpi::test
